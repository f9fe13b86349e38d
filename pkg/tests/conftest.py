import pytest

from artifact.blueprint import build_blueprint, build_growth_sequence, gen_col_size_target
from artifact.fundamental import build_fundamental
from artifact.groups import Zd

# the pattern {0:1, 1:1, 2:0} is the g, g^2 example and fits the seed {0,1,2}
Z_SEED = [(0,), (1,), (2,)]
Z_PATTERN = {(0,): 1, (1,): 1, (2,): 0}


@pytest.fixture(scope="session")
def zgroup():
    return Zd(1)


@pytest.fixture(scope="session")
def z_growth(zgroup):
    return build_growth_sequence(zgroup, 3, Z_SEED, [gen_col_size_target])


@pytest.fixture(scope="session")
def z_blueprint(zgroup, z_growth):
    return build_blueprint(zgroup, z_growth)


@pytest.fixture(scope="session")
def z_fundamental(z_blueprint):
    return build_fundamental(z_blueprint, Z_PATTERN)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
