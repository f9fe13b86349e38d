"""rho, maximally disjoint translates, growth sequences, blueprint prefixes and
locally recognizable functions."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .coloring import Coloring, Undetermined
from .groups import Group, Zd, from_descriptor
from .verifier import ReportBundle, SpecError, inconclusive, verdict


# -- set arithmetic -----------------------------------------------------------------

def _box(G, X):
    """Per-coordinate bounds when X is a full box of Z^d, else None."""
    if not isinstance(G, Zd) or not X:
        return None
    lo = [min(g[i] for g in X) for i in range(G.d)]
    hi = [max(g[i] for g in X) for i in range(G.d)]
    vol = 1
    for a, b in zip(lo, hi):
        vol *= b - a + 1
    return (lo, hi) if vol == len(X) else None


def set_mul(G: Group, X, Y) -> set:
    """XY, with a shortcut when both are boxes of Z^d."""
    bx, by = _box(G, X), _box(G, Y)
    if bx is not None and by is not None:
        axes = [range(bx[0][i] + by[0][i], bx[1][i] + by[1][i] + 1) for i in range(G.d)]
        return set(itertools.product(*axes))
    return G.set_mul(X, Y)


def erode(G: Group, X, F) -> set:
    """{y : yF in X}; F must contain the identity."""
    X = set(X)
    F = list(F)
    box = _box(G, X)
    if box is not None:
        lo, hi = box
        flo = [min(f[i] for f in F) for i in range(G.d)]
        fhi = [max(f[i] for f in F) for i in range(G.d)]
        axes = [range(lo[i] - flo[i], hi[i] - fhi[i] + 1) for i in range(G.d)]
        return set(itertools.product(*axes))
    mul = G.mul
    return {y for y in X if all(mul(y, f) in X for f in F)}


# -- maximal disjointness and rho ------------------------------------------------

def max_disjoint(G: Group, A, region, forbidden=(), first=None) -> list:
    """Greedy maximal disjoint translates gA inside region - forbidden.

    Candidates are scanned in enumeration order; ``first`` (if it fits) is
    placed before the scan starts.
    """
    A = G.sort(A)
    allowed = set(region) - set(forbidden)
    used = set()
    out = []
    mul = G.mul

    def try_add(g):
        cells = []
        for a in A:
            c = mul(g, a)
            if c not in allowed or c in used:
                return False
            cells.append(c)
        used.update(cells)
        out.append(g)
        return True

    if first is not None:
        try_add(first)
    for g in G.sort(allowed):
        if g != first:
            try_add(g)
    return out


def is_maximally_disjoint(G: Group, A, region, delta, forbidden=()) -> tuple[bool, object]:
    """Independent re-scan: contained, pairwise disjoint, and no room for another translate."""
    allowed = set(region) - set(forbidden)
    used = set()
    for d in delta:
        cells = {G.mul(d, a) for a in A}
        if not cells <= allowed or cells & used:
            return False, d
        used |= cells
    for g in G.sort(allowed):
        cells = {G.mul(g, a) for a in A}
        if cells <= allowed and not cells & used:
            return False, g
    return True, None


def _positions(G, B, A):
    """g with gA inside B."""
    Bs = set(B)
    if _box(G, Bs) is not None:
        return G.sort(erode(G, Bs, A))
    return [g for g in G.sort(Bs) if all(G.mul(g, a) in Bs for a in A)]


def rho_lower_packing(G: Group, B, A) -> list:
    """Positions g_i with g_iA in B and g_iAA^{-1} pairwise disjoint.

    Any D meeting every translate gA inside B needs a distinct point in each
    g_iAA^{-1}, so the packing size bounds rho from below.
    """
    AAi = G.sort(G.set_mul(A, G.set_inv(A)))
    used = set()
    out = []
    mul = G.mul
    for g in _positions(G, B, A):
        if not any(mul(g, x) in used for x in AAi):
            used.update(mul(g, x) for x in AAi)
            out.append(g)
    return out


def rho(G: Group, B, A, mode: str = "exact", bound: int = 20) -> tuple[int, list]:
    """rho(B;A): least |D|, D in B, with gA meeting DA whenever gA lies in B.

    Exact mode is a branch-and-bound set cover seeded with the greedy value;
    greedy mode returns a maximal disjoint family, an upper bound.
    """
    A = list(A)
    if G.identity not in A:
        raise SpecError("A must contain the identity")
    B = G.sort(set(B))
    greedy = max_disjoint(G, A, B)
    if mode == "greedy":
        return len(greedy), greedy
    if mode != "exact":
        raise SpecError(f"unknown rho mode {mode!r}")
    if len(B) > bound:
        raise SpecError(f"exact rho limited to |B| <= {bound}")
    U = _positions(G, B, A)
    if not U:
        return 0, []
    Bs = set(B)
    AAi = G.set_mul(A, G.set_inv(A))
    # d meets gA with dA iff d in gAA^{-1}
    covers = {d: frozenset(i for i, g in enumerate(U) if G.mul(G.inv(g), d) in AAi) for d in B}
    hitters = [[d for d in B if i in covers[d]] for i in range(len(U))]
    best = [len(greedy), list(greedy)]

    def search(uncovered: frozenset, chosen: list):
        if not uncovered:
            if len(chosen) < best[0]:
                best[0], best[1] = len(chosen), list(chosen)
            return
        if len(chosen) + 1 >= best[0]:
            return
        # a lower bound: largest single cover cannot finish faster than this
        top = max(len(covers[d] & uncovered) for d in Bs)
        if len(chosen) + -(-len(uncovered) // top) >= best[0]:
            return
        i = min(uncovered, key=lambda j: len(hitters[j]))
        for d in sorted(hitters[i], key=lambda d: -len(covers[d] & uncovered)):
            chosen.append(d)
            search(uncovered - covers[d], chosen)
            chosen.pop()

    search(frozenset(range(len(U))), [])
    return best[0], G.sort(best[1])


def is_rho_certificate(G: Group, B, A, D) -> bool:
    """D in B meets every translate gA in B."""
    Bs = set(B)
    if not set(D) <= Bs:
        return False
    DA = G.set_mul(D, A)
    return all(any(G.mul(g, a) in DA for a in A) for g in _positions(G, B, A))


# -- growth sequences ----------------------------------------------------------------

def gen_col_size_target(k: int) -> int:
    """p(k) = 8(2k^4 + 1): leaves room for a (2|B|^4+1)-coloring code past three reserved centers."""
    return 8 * (2 * k ** 4 + 1)


@dataclass
class GrowthSequence:
    group: Group
    H: list
    radii: list  # H_n = ball(radii[n]) for n >= 1; H_0 is the seed
    certificates: list  # per-level packings certifying rho(H_n; H_{n-1})
    targets: list

    @property
    def N(self) -> int:
        return len(self.H) - 1

    def to_json(self) -> dict:
        G = self.group
        return {
            "group": G.descriptor(),
            "H": [[G.fmt(g) for g in G.sort(h)] for h in self.H],
            "radii": self.radii,
            "rho_lower": [len(c) for c in self.certificates],
            "certificates": [[G.fmt(g) for g in c] for c in self.certificates],
            "targets": self.targets,
        }

    @classmethod
    def from_json(cls, obj) -> "GrowthSequence":
        G = from_descriptor(obj["group"])
        return cls(G, [[G.parse(s) for s in h] for h in obj["H"]], list(obj["radii"]),
                   [[G.parse(s) for s in c] for c in obj["certificates"]], list(obj["targets"]))


def _smallest_radius(ok: Callable[[int], bool], start: int, limit: int) -> int:
    """Least r >= start with ok(r), by galloping then bisection, then a linear
    confirmation pass since greedy certificates need not be monotone in r."""
    if ok(start):
        return start
    lo, step = start, 1
    while True:
        hi = lo + step
        if hi > limit:
            hi = limit
            if not ok(hi):
                raise SpecError(f"growth target unreachable below radius {limit}")
            break
        if ok(hi):
            break
        lo, step = hi, step * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def clause_product(G: Group, H: list, n: int) -> set:
    """H_{n-1}(H_0^{-1}H_0)...(H_{n-1}^{-1}H_{n-1})"""
    prod = set(H[n - 1])
    for j in range(n):
        prod = set_mul(G, prod, set_mul(G, G.set_inv(H[j]), H[j]))
    return prod


def build_growth_sequence(G: Group, N: int, seed, targets: Sequence[Callable | None] | None = None,
                          max_radius: int = 100000) -> GrowthSequence:
    """H_0 = seed; H_n is the least ball containing the clause product
    H_{n-1}(H_0^{-1}H_0)...(H_{n-1}^{-1}H_{n-1}) and extending H_{n-1}'s
    radius, whose rho over H_{n-1} is certified at least
    max(3, ceil(log2 p_n(|H_n|))) by a packing.

    ``targets[n-1]`` is p_n, or None for p_n = 1.
    """
    H0 = G.sort(set(seed))
    if G.identity not in H0:
        raise SpecError("the seed must contain the identity")
    targets = list(targets or [])
    H = [H0]
    radii = [max(G.norm(g) for g in H0)]
    certs = [[G.identity]]
    goals = [1]
    for n in range(1, N + 1):
        prev = H[n - 1]
        prod = clause_product(G, H, n)
        start = max(radii[n - 1] + 1, max(G.norm(g) for g in prod))
        p = targets[n - 1] if n - 1 < len(targets) else None
        cache = {}

        def attempt(r):
            if r not in cache:
                ball = G.ball(r)
                goal = 3 if p is None else max(3, math.ceil(math.log2(p(len(ball)))))
                pack = rho_lower_packing(G, ball, prev)
                cache[r] = (ball, goal, pack)
            _, goal, pack = cache[r]
            return len(pack) >= goal

        r = _smallest_radius(attempt, start, max_radius)
        ball, goal, pack = cache[r]
        H.append(ball)
        radii.append(r)
        certs.append(pack)
        goals.append(goal)
    return GrowthSequence(G, H, radii, certs, goals)


def check_growth_sequence(gs: GrowthSequence) -> ReportBundle:
    G = gs.group
    bundle = ReportBundle()
    bundle.add("identity", verdict(G, G.identity in set(gs.H[0]), counterexample=G.identity))
    for n in range(1, gs.N + 1):
        prod = clause_product(G, gs.H, n)
        missing = G.sort(prod - set(gs.H[n]))
        bundle.add(f"level{n}.closure", verdict(G, not missing, counterexample=missing[0] if missing else None))
        cert = gs.certificates[n]
        AAi = G.set_mul(gs.H[n - 1], G.set_inv(gs.H[n - 1]))
        Hn = set(gs.H[n])
        ok = all(all(G.mul(g, a) in Hn for a in gs.H[n - 1]) for g in cert)
        seen = set()
        for g in cert:
            cells = {G.mul(g, x) for x in AAi}
            ok = ok and not cells & seen
            seen |= cells
        ok = ok and len(cert) >= max(3, gs.targets[n])
        bundle.add(f"level{n}.rho", verdict(G, ok, counterexample=G.identity, lower_bound=len(cert),
                                             target=gs.targets[n]))
    return bundle


# -- blueprints ------------------------------------------------------------------------

@dataclass
class BlueprintPrefix:
    group: Group
    F: list  # F_0..F_N
    delta: dict  # (n, k) -> delta^n_k
    D: dict  # (n, k) -> D^n_k
    alpha: list  # index n >= 1; entry 0 unused
    beta: list
    gamma: list
    Lambda: list
    a: list  # a_0..a_N
    b: list
    gs: GrowthSequence | None = None
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.F) - 1

    def in_delta(self, k: int, g) -> bool | None:
        """Membership of g in Delta_k, decided inside F_N."""
        if g not in self._FN:
            return None
        return g in self._Dsets[k]

    def __post_init__(self):
        self.refresh()

    def refresh(self):
        self._FN = frozenset(self.F[-1])
        self._Dsets = {k: frozenset(self.D[(self.N, k)]) for k in range(self.N + 1)}
        self._Fsets = [frozenset(f) for f in self.F]

    def to_json(self) -> dict:
        G = self.group
        fs = lambda xs: [G.fmt(g) for g in G.sort(xs)]
        N = self.N
        return {
            "group": G.descriptor(),
            "N": N,
            "F": [fs(f) for f in self.F],
            "delta": {f"{n},{k}": fs(self.delta[(n, k)]) for n in range(1, N + 1) for k in range(n)},
            "D": {f"{n},{k}": fs(self.D[(n, k)]) for n in range(N + 1) for k in range(n + 1)},
            "alpha": [None] + [G.fmt(x) for x in self.alpha[1:]],
            "beta": [None] + [G.fmt(x) for x in self.beta[1:]],
            "gamma": [None] + [G.fmt(x) for x in self.gamma[1:]],
            "Lambda": [[]] + [fs(x) for x in self.Lambda[1:]],
            "a": [G.fmt(x) for x in self.a],
            "b": [G.fmt(x) for x in self.b],
            "growth": self.gs.to_json() if self.gs is not None else None,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def from_json(cls, obj) -> "BlueprintPrefix":
        if isinstance(obj, str):
            obj = json.loads(obj)
        G = from_descriptor(obj["group"])
        P = lambda xs: [G.parse(s) for s in xs]
        key = lambda s: tuple(int(t) for t in s.split(","))
        gs = GrowthSequence.from_json(obj["growth"]) if obj.get("growth") else None
        one = lambda xs: [None] + [G.parse(s) for s in xs[1:]]
        return cls(G, [P(f) for f in obj["F"]], {key(k): P(v) for k, v in obj["delta"].items()},
                   {key(k): P(v) for k, v in obj["D"].items()}, one(obj["alpha"]), one(obj["beta"]),
                   one(obj["gamma"]), [[]] + [P(x) for x in obj["Lambda"][1:]], P(obj["a"]), P(obj["b"]), gs)


def buffer_region(G: Group, H_n, F: list, n: int, k: int) -> set:
    """B^n_k = {g : g (F_{k+1}^{-1}F_{k+1}) ... (F_{n-1}^{-1}F_{n-1}) in H_n}.

    Erosion by F^{-1}F is erosion by F^{-1} after erosion by F, taken from the
    outermost factor inward.
    """
    X = set(H_n)
    for j in range(n - 1, k, -1):
        X = erode(G, X, F[j])
        X = erode(G, X, G.set_inv(F[j]))
    return X


def build_blueprint(G: Group, gs: GrowthSequence, N: int | None = None) -> BlueprintPrefix:
    N = gs.N if N is None else N
    if N > gs.N:
        raise SpecError("growth sequence is shorter than the requested prefix")
    e = G.identity
    F = [G.sort(gs.H[0])]
    delta, D = {}, {(0, 0): [e]}
    alpha, beta, gamma, Lam = [None], [None], [None], [[]]
    a, b = [e], [e]
    for n in range(1, N + 1):
        Hn = gs.H[n]
        used = set()
        top = max_disjoint(G, F[n - 1], Hn, first=e)
        if e not in top:
            raise SpecError(f"F_{n - 1} does not fit in H_{n}")
        delta[(n, n - 1)] = G.sort(top)
        used |= G.set_mul(top, F[n - 1])
        for k in range(n - 2, -1, -1):
            region = buffer_region(G, Hn, F, n, k)
            dk = max_disjoint(G, F[k], region, forbidden=used)
            delta[(n, k)] = G.sort(dk)
            used |= G.set_mul(dk, F[k])
        if len(delta[(n, n - 1)]) < 3:
            raise SpecError(f"only {len(delta[(n, n - 1)])} level-{n - 1} tiles fit in H_{n}")
        F.append(G.sort(used))
        D[(n, n)] = [e]
        for k in range(n):
            acc = set()
            for m in range(k, n):
                acc |= G.set_mul(delta[(n, m)], D[(m, k)])
            D[(n, k)] = G.sort(acc)
        top_sorted = D[(n, n - 1)]
        gamma.append(e)
        rest = [x for x in top_sorted if x != e]
        alpha.append(rest[0])
        beta.append(rest[1])
        Lam.append(rest[2:])
        a.append(G.mul(alpha[n], a[n - 1]))
        b.append(G.mul(beta[n], b[n - 1]))
    return BlueprintPrefix(G, F, delta, D, alpha, beta, gamma, Lam, a, b, gs)


def _paint(G, centers, tile):
    owner, clash = {}, None
    for c in centers:
        for f in tile:
            cell = G.mul(c, f)
            if cell in owner:
                clash = clash if clash is not None else c
            else:
                owner[cell] = c
    return owner, clash


def verify_blueprint(bp: BlueprintPrefix, dense_radius: int | None = None) -> ReportBundle:
    """Blueprint clauses on the window F_N, plus the D-algebra identities.

    Delta_k inside F_N is D^N_k.  The dense clause is checked on ball(r) for
    the growth sequence's level-1 radius unless ``dense_radius`` is given.
    """
    G = bp.group
    N = bp.N
    e = G.identity
    FN = set(bp.F[N])
    bundle = ReportBundle()
    owners = {}
    for n in range(N + 1):
        Dn = G.sort(bp.D[(N, n)])
        owner, clash = _paint(G, Dn, bp.F[n])
        owners[n] = owner
        bundle.add(f"disjoint.{n}", verdict(G, clash is None and set(owner) <= FN, counterexample=clash))
    # dense: Delta_n F_n F_n^{-1} covers the window
    r = dense_radius if dense_radius is not None else (bp.gs.radii[1] if bp.gs is not None and bp.gs.N >= 1 else 0)
    ball = G.ball(r)
    for n in range(N + 1):
        FFi = G.set_mul(bp.F[n], G.set_inv(bp.F[n]))
        reach = G.set_mul(bp.D[(N, n)], FFi)
        miss = next((g for g in ball if g not in reach), None)
        bundle.add(f"dense.{n}", verdict(G, miss is None, counterexample=miss, window_radius=r))
    # coherent: a level-k tile meeting a level-n tile lies inside it
    for n in range(1, N + 1):
        for k in range(n):
            bad = None
            for psi in G.sort(bp.D[(N, k)]):
                seen = {owners[n].get(G.mul(psi, f)) for f in bp.F[k]}
                if len(seen - {None}) > 1 or (len(seen) > 1 and None in seen):
                    bad = psi
                    break
            bundle.add(f"coherent.{k}<{n}", verdict(G, bad is None, counterexample=bad))
    # uniform: every level-n center sees the same level-k pattern
    for n in range(1, N + 1):
        for k in range(n):
            pattern = set(bp.D[(n, k)])
            Dk = set(bp.D[(N, k)])
            bad = None
            for gam in G.sort(bp.D[(N, n)]):
                gi = G.inv(gam)
                seen = {G.mul(gi, x) for x in (G.mul(gam, f) for f in bp.F[n]) if x in Dk}
                if seen != pattern:
                    bad = gam
                    break
            bundle.add(f"uniform.{k}<{n}", verdict(G, bad is None, counterexample=bad))
    for n in range(1, N + 1):
        top = bp.D[(n, n - 1)]
        bundle.add(f"growth.{n}", verdict(G, len(top) >= 3, counterexample=e, size=len(top)))
    bundle.add("algebra", _check_algebra(bp))
    return bundle


def _check_algebra(bp: BlueprintPrefix):
    """D^n_kF_k in F_n, D^n_mD^m_k in D^n_k, F_n the disjoint union of delta^n_kF_k,
    identity in delta^n_{n-1}, a_n != b_n inside F_n."""
    G = bp.group
    e = G.identity
    N = bp.N
    for n in range(1, N + 1):
        Fn = set(bp.F[n])
        cells = [G.mul(d, f) for k in range(n) for d in bp.delta[(n, k)] for f in bp.F[k]]
        if len(cells) != len(set(cells)) or set(cells) != Fn:
            return verdict(G, False, counterexample=e, failing=f"tile union at level {n}")
        if e not in bp.delta[(n, n - 1)]:
            return verdict(G, False, counterexample=e, failing=f"identity missing at level {n}")
        if bp.a[n] == bp.b[n] or bp.a[n] not in Fn or bp.b[n] not in Fn:
            return verdict(G, False, counterexample=bp.a[n], failing=f"a/b at level {n}")
        for k in range(n + 1):
            if not G.set_mul(bp.D[(n, k)], bp.F[k]) <= Fn:
                return verdict(G, False, counterexample=e, failing=f"D^{n}_{k}F_{k} not in F_{n}")
            for m in range(k, n + 1):
                if not G.set_mul(bp.D[(n, m)], bp.D[(m, k)]) <= set(bp.D[(n, k)]):
                    return verdict(G, False, counterexample=e, failing=f"D^{n}_{m}D^{m}_{k}")
    return verdict(G, True)


# -- locally recognizable functions ---------------------------------------------------

@dataclass
class LocallyRecognizable:
    group: Group
    R: dict  # A -> {0,1}

    @property
    def A(self) -> list:
        return self.group.sort(self.R)

    @property
    def nontrivial(self) -> bool:
        e = self.group.identity
        return sum(1 for v in self.R.values() if v == self.R[e]) > 1

    def to_json(self) -> dict:
        G = self.group
        return {"group": G.descriptor(), "R": [[G.fmt(g), self.R[g]] for g in self.A]}

    @classmethod
    def from_json(cls, obj) -> "LocallyRecognizable":
        G = from_descriptor(obj["group"])
        return cls(G, {G.parse(s): int(v) for s, v in obj["R"]})


def check_locally_recognizable(G: Group, R: dict) -> tuple[bool, object]:
    """Every a != 1 in A has b in A with ab in A and R(ab) != R(b)."""
    if G.identity not in R:
        return False, G.identity
    for a in G.sort(R):
        if a == G.identity:
            continue
        if not any(G.mul(a, b) in R and R[G.mul(a, b)] != R[b] for b in R):
            return False, a
    return True, None


def lr_pattern_match(G: Group, R: dict, x: Coloring, a) -> bool:
    """The pattern test: x(ab) = R(b) for all b in A, read at translate a."""
    return all(x.value(G.mul(a, b)) == v for b, v in R.items())


def extend_locally_recognizable(G: Group, Q: dict) -> LocallyRecognizable:
    """A nontrivial locally recognizable R extending Q.

    a, b are the least elements outside B, c the least outside
    B_2B_2 u B_2B_2^{-1} with B_2 = B u {a, b}; A = B_3B_3 with
    B_3 = B_2 u {c}.  R copies Q on B, takes Q(1) on {a, b, c} and the
    opposite value elsewhere.
    """
    e = G.identity
    Q = dict(Q)
    if e not in Q:
        Q[e] = 0
    B = set(Q)
    outside = (g for g in G.enumerate() if g not in B)
    a = next(outside)
    b = next(outside)
    B2 = B | {a, b}
    B2B2 = G.set_mul(B2, B2)
    excl = B2B2 | G.set_mul(B2, G.set_inv(B2))
    c = next(g for g in G.enumerate() if g not in excl)
    B3 = B2 | {c}
    A = G.set_mul(B3, B3)
    q1 = Q[e]
    R = {}
    for g in A:
        if g in Q:
            R[g] = Q[g]
        elif g in (a, b, c):
            R[g] = q1
        else:
            R[g] = 1 - q1
    return LocallyRecognizable(G, R)


# -- minimal points from a pattern ----------------------------------------------------------

def minimal_from_pattern(bp: BlueprintPrefix, pattern: dict) -> Coloring:
    """Repeat the pattern at every Delta_0 center: y(ga) = pattern(a) for g in Delta_0.

    Cells off the repeated pattern are 0.  Delta_0 is known inside F_N only,
    so cells that could belong to an undecidable center are Undetermined.
    """
    G = bp.group
    A = G.sort(pattern)
    if not set(A) <= set(bp.F[0]):
        raise SpecError("pattern domain must lie in F_0")
    Ainv = [(a, G.inv(a)) for a in A]
    FN = bp._FN
    D0 = bp._Dsets[0]

    def fn(g):
        unknown = False
        for a, ai in Ainv:
            c = G.mul(g, ai)
            if c not in FN:
                unknown = True
            elif c in D0:
                return pattern[a]
        return Undetermined(reason="outside blueprint window") if unknown else 0

    return Coloring(G, fn, {"ctor": "minimal_from_pattern", "size": len(A)})
