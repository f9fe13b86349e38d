import json

import pytest

from artifact.blueprint import build_blueprint, build_growth_sequence
from artifact.coloring import Undetermined
from artifact.fundamental import (FREE, FundamentalPrefix, apply_overlay, apply_strong, blocking_graph,
                                  build_fundamental, check_block_extension, check_orthogonal_pair, code_length,
                                  determinate_window, extend_block_all, greedy_coloring, membership_test,
                                  orthogonal_extension, strong_extension, verify_extensions, verify_fundamental)
from artifact.groups import Zd
from artifact.verifier import SpecError, check_membership_test, check_strong_blocking

from conftest import Z_PATTERN


def test_fundamental_conclusions_hold(z_fundamental):
    bundle = verify_fundamental(z_fundamental)
    assert bundle.all_confirmed, bundle.failures()
    assert "membership.3.fill1" in bundle.names()


def test_pattern_at_level_one_centers(z_fundamental):
    fund = z_fundamental
    bp = fund.bp
    for gam in bp.D[(3, 1)]:
        assert [fund.eval((gam[0] + f,)) for f in range(3)] == [1, 1, 0]


def test_free_points_and_horizon(z_fundamental):
    fund = z_fundamental
    bp = fund.bp
    lam = bp.Lambda[2][0]
    g = (bp.D[(3, 2)][0][0] + lam[0] + bp.b[1][0],)
    v = fund.eval(g)
    assert isinstance(v, Undetermined) and v.reason == FREE and v.level == 2
    assert fund.horizon_points() == [(1011,), (-1011,)]
    assert len(fund.free_points()) == 1337
    assert fund.eval((5000,)).reason == "outside"


def test_background_value(z_fundamental):
    fund = z_fundamental
    bp = fund.bp
    G = fund.group
    level1 = G.set_mul(bp.D[(3, 1)], set(bp.F[0]) | set(bp.D[(1, 0)]))
    off = [g for g in bp.F[3] if g not in level1]
    assert off and all(fund.eval(g) == 0 for g in off)


def test_ledger_starts_canonical(z_fundamental):
    fund = z_fundamental
    assert [len(t) for t in fund.ledger] == [0, 53, 2, 2]
    assert fund.ledger[1] == fund.bp.Lambda[1]


def test_test_regions(z_fundamental):
    fund = z_fundamental
    bp = fund.bp
    assert fund.V[1] == bp.F[0] and fund.P[1] == Z_PATTERN
    assert set(fund.V[3]) == set(bp.F[0]) | {bp.a[1], bp.b[1], bp.a[2], bp.b[2]}
    for n in (1, 2, 3):
        assert set(fund.V[n]) <= set(bp.F[n - 1])


def test_membership_test_at_centers_and_off_centers(z_fundamental):
    fund = z_fundamental
    bp = fund.bp
    x = fund.completion(0)
    for n in (1, 2, 3):
        centers = bp.D[(3, n)]
        assert all(membership_test(fund, n, x, g) for g in centers)
    # every nonidentity offset inside a level-2 tile fails the level-2 test
    offsets = [h for h in bp.F[2] if h != (0,)]
    assert not any(membership_test(fund, 2, x, h) for h in offsets)


def test_level_one_test_is_the_pattern(z_fundamental):
    fund = z_fundamental
    x = fund.completion(1)
    for g in determinate_window(fund, [fund.V[1]])[:500]:
        direct = all(x.value((g[0] + f,)) == Z_PATTERN[(f,)] for f in range(3))
        assert membership_test(fund, 1, x, g) == direct


def test_corrupting_a_center_breaks_membership(z_fundamental):
    fund = z_fundamental.derive()
    bp = fund.bp
    gam = [g for g in bp.D[(3, 1)] if g != (0,)][0]
    fund.values[gam] = 1 - fund.values[gam]
    W = determinate_window(fund, [fund.V[1]])
    rep = check_membership_test(fund.completion(0), set(bp.D[(3, 1)]), fund.V[1], fund.P[1], W)
    assert rep.status.value == "Refuted" and rep.counterexample == gam


def test_build_rejects_bad_patterns(z_blueprint):
    with pytest.raises(SpecError):
        build_fundamental(z_blueprint, {(0,): 1, (1,): 1, (2,): 1})
    with pytest.raises(SpecError):
        build_fundamental(z_blueprint, {(0,): 1, (1,): 0, (2,): 1, (5,): 0})
    with pytest.raises(SpecError):
        # locally recognizable but only the identity carries R(1)
        build_fundamental(z_blueprint, {(0,): 0, (1,): 1, (2,): 1})


def test_json_round_trip(z_fundamental):
    text = z_fundamental.dumps()
    back = FundamentalPrefix.from_json(json.loads(text))
    assert back.values == z_fundamental.values
    assert back.dumps() == text


def test_code_length_and_greedy_coloring():
    assert code_length(3) == 8
    assert code_length(168) == 31
    adj = {1: {2}, 2: {1, 3}, 3: {2}}
    assert greedy_coloring([1, 2, 3], adj) == {1: 0, 2: 1, 3: 0}


def test_blocking_graph_is_proper_after_coloring(z_fundamental):
    fund = z_fundamental
    G = fund.group
    centers = G.sort(fund.bp.D[(3, 1)])
    adj = blocking_graph(G, centers, fund.bp.F[1], (1,))
    mu = greedy_coloring(centers, adj)
    assert all(mu[u] != mu[v] for u in adj for v in adj[u])
    assert max(len(a) for a in adj.values()) <= 2 * len(fund.bp.F[1]) ** 4


def test_block_extension(z_fundamental):
    ext = extend_block_all(z_fundamental, [(1,)])
    assert [len(t) for t in ext.fund.ledger] == [0, 53 - 31, 2, 2]
    assert [len(t) for t in z_fundamental.ledger] == [0, 53, 2, 2]
    bundle = check_block_extension(ext, 1)
    assert bundle.all_confirmed, bundle.failures()
    assert verify_fundamental(ext.fund).all_confirmed
    assert verify_extensions(ext.fund).all_confirmed


def test_block_extension_rejects_identity(z_fundamental):
    with pytest.raises(SpecError):
        extend_block_all(z_fundamental, [(0,)])


def test_block_extension_needs_room(z_fundamental):
    with pytest.raises(SpecError):
        extend_block_all(z_fundamental, [(1,), (2,)])


def test_orthogonal_extension_ledger(z_fundamental):
    x = orthogonal_extension(z_fundamental, "010")
    assert [len(t) for t in x.ledger] == [0, 52, 1, 1]
    th = z_fundamental.ledger[2][0]
    assert all(x.eval(g) == 1 for g in z_fundamental.free_slot_points(2, th))
    assert verify_fundamental(x).all_confirmed


def test_orthogonal_pair_and_same_tau(z_fundamental):
    assert check_orthogonal_pair(z_fundamental, "0", "1").confirmed
    assert check_orthogonal_pair(z_fundamental, "00", "01").confirmed
    with pytest.raises(SpecError):
        check_orthogonal_pair(z_fundamental, "01", "01")


def test_orthogonal_extension_rejects_written_slot(z_fundamental):
    once = orthogonal_extension(z_fundamental, "1")
    once.ledger[1] = z_fundamental.ledger[1]
    with pytest.raises(SpecError):
        orthogonal_extension(once, "1")


def test_strong_extension(z_fundamental):
    fund = z_fundamental
    S = [(1,), (5,), (-7,)]
    plan = strong_extension(fund, S)
    assert [k for _, k, _, _ in plan.plants] == [1, 2, 3]
    points = [p for _, _, p, q in plan.plants] + [q for _, _, p, q in plan.plants]
    assert len(set(points)) == len(points)
    c = apply_overlay(fund, plan.overlay)
    for _, _, p, q in plan.plants:
        assert c.value(p) != c.value(q)
    base = fund.completion(0)
    untouched = [g for g in fund.bp.F[3][:2000] if g not in plan.overlay]
    assert all(c.value(g) == base.value(g) for g in untouched)
    W = [g for g in fund.bp.F[3] if abs(g[0]) < 900]
    assert all(check_strong_blocking(c, s, W) >= 1 for s in S)
    applied = apply_strong(fund, plan, S)
    assert verify_fundamental(applied).all_confirmed
    assert verify_extensions(applied).all_confirmed


def test_strong_extension_runs_out(z_fundamental):
    with pytest.raises(SpecError):
        strong_extension(z_fundamental, [(1,), (2,), (3,), (4,)])


def test_fundamental_on_z2():
    G = Zd(2)
    gs = build_growth_sequence(G, 2, [(0, 0), (1, 0), (2, 0)])
    bp = build_blueprint(G, gs)
    fund = build_fundamental(bp, {(0, 0): 1, (1, 0): 1, (2, 0): 0})
    assert verify_fundamental(fund).all_confirmed
