import random

import pytest

from artifact.blueprint import (BlueprintPrefix, GrowthSequence, LocallyRecognizable, build_growth_sequence,
                                check_growth_sequence, check_locally_recognizable, erode,
                                extend_locally_recognizable, is_maximally_disjoint, is_rho_certificate,
                                max_disjoint, minimal_from_pattern, rho, rho_lower_packing, set_mul,
                                verify_blueprint)
from artifact.groups import FiniteTable, Free, Zd
from artifact.verifier import SpecError, check_minimality

Z = Zd(1)


def zs(*xs):
    return [(x,) for x in xs]


def test_max_disjoint_greedy_order():
    assert max_disjoint(Z, zs(0, 1), zs(*range(6))) == zs(0, 2, 4)
    assert max_disjoint(Z, zs(0, 1, 2), zs(0, 1)) == []


def test_max_disjoint_is_maximal():
    region = zs(*range(-7, 8))
    delta = max_disjoint(Z, zs(0, 2), region)
    ok, _ = is_maximally_disjoint(Z, zs(0, 2), region, delta)
    assert ok


def test_rho_small_cases():
    value, D = rho(Z, zs(*range(5)), zs(0, 1))
    assert value == 2 and is_rho_certificate(Z, zs(*range(5)), zs(0, 1), D)
    assert rho(Z, zs(*range(5)), zs(0), mode="exact")[0] == 5
    assert rho(Z, zs(*range(5)), zs(0, 1), mode="greedy")[0] >= 2


def test_rho_exact_bound():
    with pytest.raises(SpecError):
        rho(Z, zs(*range(30)), zs(0, 1), bound=20)


def test_packing_is_a_lower_bound():
    B, A = zs(*range(12)), zs(0, 1, 3)
    pack = rho_lower_packing(Z, B, A)
    assert len(pack) <= rho(Z, B, A)[0]


def test_erode_and_set_mul():
    assert sorted(erode(Z, zs(*range(-5, 6)), zs(-1, 0, 1))) == zs(*range(-4, 5))
    assert sorted(set_mul(Z, zs(0, 1), zs(0, 10))) == zs(0, 1, 10, 11)
    F = Free(2)
    assert set_mul(F, [(), (1,)], [(-1,)]) == {(-1,), ()}


def test_growth_sequence_small():
    gs = build_growth_sequence(Z, 2, zs(-1, 0, 1))
    assert gs.radii[0] == 1
    assert gs.radii[1] >= 3
    assert all(len(c) >= 3 for c in gs.certificates[1:])
    assert check_growth_sequence(gs).all_confirmed
    back = GrowthSequence.from_json(gs.to_json())
    assert back.radii == gs.radii


def test_growth_sequence_needs_identity():
    with pytest.raises(SpecError):
        build_growth_sequence(Z, 1, zs(1, 2))


def test_z_growth_sequence_frozen(z_growth):
    assert z_growth.radii == [2, 85, 426, 2131]
    assert [len(c) for c in z_growth.certificates] == [1, 34, 3, 3]


def test_z_blueprint_shape(z_blueprint):
    bp = z_blueprint
    assert [len(f) for f in bp.F] == [3, 168, 840, 4200]
    assert [len(bp.D[(n, n - 1)]) for n in (1, 2, 3)] == [56, 5, 5]
    assert bp.alpha[1:] == zs(3, 168, 840)
    assert bp.beta[1:] == zs(-3, -168, -840)
    assert bp.a == zs(0, 3, 171, 1011) and bp.b == zs(0, -3, -171, -1011)


def test_z_blueprint_verifies(z_blueprint):
    bundle = verify_blueprint(z_blueprint)
    assert bundle.all_confirmed, bundle.failures()
    assert any(name.startswith("dense.") for name in bundle.names())


def test_corrupted_blueprint_is_refuted(z_blueprint):
    bp = BlueprintPrefix.from_json(z_blueprint.to_json())
    # an extra level-0 center overlapping the tile at 0
    bp.D[(3, 0)] = list(bp.D[(3, 0)]) + [(1,)]
    bp.refresh()
    bundle = verify_blueprint(bp)
    assert bundle["disjoint.0"].status.value == "Refuted"
    assert not bundle["uniform.0<1"].confirmed


def test_blueprint_json_round_trip(z_blueprint):
    text = z_blueprint.dumps()
    assert BlueprintPrefix.from_json(text).dumps() == text


def test_locally_recognizable_examples():
    assert check_locally_recognizable(Z, {(0,): 1, (1,): 1, (2,): 0})[0]
    K = FiniteTable([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]])
    assert check_locally_recognizable(K, {0: 1, 1: 1, 2: 1, 3: 0})[0]
    ok, bad = check_locally_recognizable(Z, {(0,): 1, (1,): 1, (2,): 1})
    assert not ok and bad != (0,)


def test_extend_locally_recognizable_from_single_point():
    R = extend_locally_recognizable(Z, {(0,): 0})
    assert R.R[(0,)] == 0
    assert check_locally_recognizable(Z, R.R)[0]
    assert sum(1 for v in R.R.values() if v == 0) >= 4
    assert LocallyRecognizable.from_json(R.to_json()).R == R.R


def test_extend_locally_recognizable_on_free_group():
    F = Free(2)
    rng = random.Random(7)
    for _ in range(10):
        B = {F.element(rng.randrange(20)) for _ in range(rng.randint(1, 5))}
        Q = {b: rng.randint(0, 1) for b in B}
        R = extend_locally_recognizable(F, Q)
        assert all(R.R[b] == Q[b] for b in Q)
        assert check_locally_recognizable(F, R.R)[0] and R.nontrivial


def test_minimal_from_pattern_repeats_at_centers(z_blueprint):
    bp = z_blueprint
    pattern = {(0,): 1, (1,): 0, (2,): 1}
    y = minimal_from_pattern(bp, pattern)
    centers = [g for g in bp.D[(3, 0)] if abs(g[0]) < 1500]
    assert centers
    for g in centers:
        for a, v in pattern.items():
            assert y.value((g[0] + a[0],)) == v
    assert check_minimality(y, list(pattern), 1000, r_max=50).confirmed


def test_minimal_from_pattern_domain_check(z_blueprint):
    with pytest.raises(SpecError):
        minimal_from_pattern(z_blueprint, {(0,): 1, (7,): 0})
