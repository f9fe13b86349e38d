"""The fundamental partial coloring on a blueprint prefix, its membership tests,
and the extensions that encode blocking, orthogonality and strong blocking
into the free points."""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field

from .blueprint import BlueprintPrefix, LocallyRecognizable, check_locally_recognizable
from .coloring import Coloring, PartialColoring, Undetermined
from .groups import Group
from .verifier import (ReportBundle, SpecError, WitnessReport, check_blocking, check_membership_test,
                       check_orthogonality, inconclusive, verdict)

FREE = "free"
HORIZON = "horizon"
OUTSIDE = "outside"


@dataclass
class FundamentalPrefix:
    bp: BlueprintPrefix
    R: dict  # locally recognizable pattern, padded to all of F_0
    values: dict  # g in F_N -> bit or Undetermined
    ledger: list  # ledger[n]: unused free slots of level n, in rank order
    V: list  # V[n]: test region of the level-n membership test
    P: list  # P[n]: test pattern on V[n]
    writes: list = field(default_factory=list)  # extension log

    @property
    def group(self) -> Group:
        return self.bp.group

    @property
    def N(self) -> int:
        return self.bp.N

    def eval(self, g):
        v = self.values.get(g)
        return Undetermined(reason=OUTSIDE) if v is None else v

    def coloring(self) -> Coloring:
        return Coloring(self.group, self.eval, {"ctor": "fundamental", "N": self.N}, memo=False)

    def completion(self, fill: int) -> Coloring:
        """Free points set to ``fill``; horizon and outside cells stay undetermined."""
        vals = self.values

        def fn(g):
            v = vals.get(g)
            if v is None:
                return Undetermined(reason=OUTSIDE)
            if isinstance(v, Undetermined) and v.reason == FREE:
                return fill
            return v

        return Coloring(self.group, fn, {"ctor": "fundamental_completion", "fill": fill}, memo=False)

    def free_points(self) -> list:
        return self.group.sort(g for g, v in self.values.items() if isinstance(v, Undetermined) and v.reason == FREE)

    def horizon_points(self) -> list:
        return self.group.sort(g for g, v in self.values.items() if isinstance(v, Undetermined) and v.reason == HORIZON)

    def partial(self) -> PartialColoring:
        G = self.group
        return PartialColoring(G, G.sort(self.values), {g: v for g, v in self.values.items()
                                                        if not isinstance(v, Undetermined)})

    def derive(self) -> "FundamentalPrefix":
        """Copy for an extension; the blueprint is shared."""
        return FundamentalPrefix(self.bp, self.R, dict(self.values), [list(t) for t in self.ledger],
                                 self.V, self.P, copy.deepcopy(self.writes))

    def free_slot_points(self, n: int, theta) -> list:
        """gamma theta b_{n-1} for every level-n center gamma in the window."""
        G = self.group
        tb = G.mul(theta, self.bp.b[n - 1])
        return [G.mul(gam, tb) for gam in G.sort(self.bp.D[(self.N, n)])]

    def to_json(self) -> dict:
        G = self.group
        fmt = G.fmt
        return {
            "blueprint": self.bp.to_json(),
            "R": [[fmt(g), self.R[g]] for g in G.sort(self.R)],
            "coloring": self.partial().to_json(),
            "free": [fmt(g) for g in self.free_points()],
            "horizon": [fmt(g) for g in self.horizon_points()],
            "ledger": [[fmt(t) for t in th] for th in self.ledger],
            "V": [[fmt(v) for v in G.sort(vs)] for vs in self.V],
            "P": [[[fmt(v), p[v]] for v in G.sort(p)] for p in self.P],
            "writes": self.writes,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def from_json(cls, obj) -> "FundamentalPrefix":
        if isinstance(obj, str):
            obj = json.loads(obj)
        bp = BlueprintPrefix.from_json(obj["blueprint"])
        G = bp.group
        parse = G.parse
        pc = PartialColoring.from_json(obj["coloring"])
        values = dict(pc.values)
        free = {parse(s) for s in obj["free"]}
        horizon = {parse(s) for s in obj["horizon"]}
        for g in pc.window:
            if g in values:
                continue
            if g in horizon:
                values[g] = Undetermined(level=bp.N, reason=HORIZON)
            elif g in free:
                values[g] = Undetermined(reason=FREE)
            else:
                raise ValueError(f"undefined cell {G.fmt(g)} is neither free nor at the horizon")
        _restore_free_levels(bp, values)
        return cls(bp, {parse(s): int(v) for s, v in obj["R"]}, values,
                   [[parse(t) for t in th] for th in obj["ledger"]],
                   [[parse(v) for v in vs] for vs in obj["V"]],
                   [{parse(v): int(p) for v, p in ps} for ps in obj["P"]],
                   obj.get("writes", []))


def _restore_free_levels(bp, values):
    G = bp.group
    N = bp.N
    for n in range(1, N + 1):
        for lam in bp.Lambda[n]:
            tb = G.mul(lam, bp.b[n - 1])
            for gam in bp.D[(N, n)]:
                g = G.mul(gam, tb)
                v = values.get(g)
                if isinstance(v, Undetermined) and v.reason == FREE:
                    values[g] = Undetermined(level=n, reason=FREE)


def pad_pattern(bp: BlueprintPrefix, R: dict) -> dict:
    """R extended to F_0 by the background value 1 - R(1)."""
    G = bp.group
    e = G.identity
    F0 = set(bp.F[0])
    if not set(R) <= F0:
        raise SpecError("the pattern domain does not fit in F_0")
    if e not in R:
        raise SpecError("the pattern must be defined at the identity")
    bg = 1 - R[e]
    return {f: R.get(f, bg) for f in bp.F[0]}


def build_fundamental(bp: BlueprintPrefix, R, N: int | None = None) -> FundamentalPrefix:
    """Materialize the staged partial coloring on F_N.

    Stage 1 writes the pattern on every level-1 tile's F_0 block, leaves
    Delta_1 Lambda_1 free, marks Delta_1{alpha_1, beta_1} pending and fills the
    rest with 1 - R(1).  Stage k resolves the pending points of stage k-1:
    a center's a-point reads 1 when it is a level-k center and stays pending
    when it is a level-k center times alpha_k; its b-point reads 1 at level-k
    centers, 0 after alpha_k, pending after beta_k and free after Lambda_k.
    Everything else settles to 0.  Points still pending after stage N are
    the horizon.
    """
    G = bp.group
    if isinstance(R, LocallyRecognizable):
        R = R.R
    ok, bad = check_locally_recognizable(G, R)
    if not ok:
        raise SpecError(f"pattern is not locally recognizable (fails at {G.fmt(bad)})")
    e = G.identity
    if sum(1 for v in R.values() if v == R[e]) <= 1:
        raise SpecError("pattern is trivial")
    if N is not None and N != bp.N:
        raise SpecError("the fundamental prefix is built on the whole blueprint prefix")
    N = bp.N
    if N < 1:
        raise SpecError("need at least one blueprint level")
    Rp = pad_pattern(bp, R)
    mul = G.mul
    FN = bp.F[N]
    D = bp.D
    values: dict = {}
    DN1 = G.sort(D[(N, 1)])
    # stage 1
    for gam in DN1:
        for lam in bp.Lambda[1]:
            values[mul(gam, lam)] = Undetermined(level=1, reason=FREE)
    pending = {}
    for gam in DN1:
        for tag, pt in (("a", bp.alpha[1]), ("b", bp.beta[1])):
            g = mul(gam, pt)
            if g not in values:
                pending[g] = (1, tag, gam)
    for gam in DN1:
        for f in bp.F[0]:
            g = mul(gam, f)
            if g not in values and g not in pending:
                values[g] = Rp[f]
    bg = 1 - R[e]
    for g in FN:
        if g not in values and g not in pending:
            values[g] = bg
    # stages 2..N resolve the pending points of the previous stage
    for k in range(2, N + 1):
        Dk = set(D[(N, k)])
        Dk_alpha = {mul(gam, bp.alpha[k]) for gam in Dk}
        Dk_beta = {mul(gam, bp.beta[k]) for gam in Dk}
        lam_of = {}
        for gam in Dk:
            for lam in bp.Lambda[k]:
                lam_of[mul(gam, lam)] = lam
        a_prev, b_prev = bp.a[k - 1], bp.b[k - 1]
        nxt = {}
        for delta in G.sort(D[(N, k - 1)]):
            ga, gb = mul(delta, a_prev), mul(delta, b_prev)
            if delta in Dk:
                values[ga] = 1
                values[gb] = 1
                continue
            if delta in Dk_alpha:
                nxt[ga] = (k, "a", delta)
                values[gb] = 0
            elif delta in Dk_beta:
                values[ga] = 0
                nxt[gb] = (k, "b", delta)
            elif delta in lam_of:
                values[ga] = 0
                values[gb] = Undetermined(level=k, reason=FREE)
            else:
                values[ga] = 0
                values[gb] = 0
        pending = nxt
    for g in pending:
        values[g] = Undetermined(level=N, reason=HORIZON)
    missing = [g for g in FN if g not in values]
    if missing or len(values) != len(FN):
        raise AssertionError("staged values do not cover F_N exactly")
    ledger = [[]] + [list(bp.Lambda[n]) for n in range(1, N + 1)]
    V = [[]]
    P = [{}]
    for n in range(1, N + 1):
        if n == 1:
            Vn = list(bp.F[0])
            Pn = dict(Rp)
        else:
            Vn = V[n - 1] + [bp.a[n - 1], bp.b[n - 1]]
            Pn = dict(P[n - 1])
            Pn[bp.a[n - 1]] = 1
            Pn[bp.b[n - 1]] = 1
        V.append(G.sort(set(Vn)))
        P.append(Pn)
    return FundamentalPrefix(bp, Rp, values, ledger, V, P)


def membership_test(fund: FundamentalPrefix, n: int, x: Coloring, g) -> bool:
    """x(gv) = P_n(v) for every v in V_n."""
    G = fund.group
    return all(x.value(G.mul(g, v)) == fund.P[n][v] for v in fund.V[n])


def determinate_window(fund: FundamentalPrefix, regions, items=None) -> list:
    """Elements g of F_N (or ``items``) with gT inside the determinate part of
    F_N for every T in ``regions``; free points count as determinate since
    every check runs on completions."""
    G = fund.group
    vals = fund.values
    mul = G.mul

    def ok(h):
        v = vals.get(h)
        return v is not None and not (isinstance(v, Undetermined) and v.reason != FREE)

    cand = G.sort(fund.bp.F[-1]) if items is None else items
    regions = [G.sort(set(T)) for T in regions]
    return [g for g in cand if all(ok(mul(g, t)) for T in regions for t in T)]


# -- verification of the fundamental function's properties ----------------------------

def verify_fundamental(fund: FundamentalPrefix) -> ReportBundle:
    G = fund.group
    bp = fund.bp
    N = bp.N
    e = G.identity
    mul = G.mul
    bundle = ReportBundle()
    vals = fund.values
    R = fund.R
    # (i) the pattern sits on every level-1 tile
    bad = None
    for gam in G.sort(bp.D[(N, 1)]):
        for f in bp.F[0]:
            if vals[mul(gam, f)] != R[f]:
                bad = mul(gam, f)
                break
        if bad is not None:
            break
    bundle.add("fm.pattern", verdict(G, bad is None, counterexample=bad))
    # (iii) undefined cells are exactly the free points plus the horizon
    expect_free = set()
    for n in range(1, N + 1):
        for lam in bp.Lambda[n]:
            expect_free.update(fund.free_slot_points(n, lam))
    expect_horizon = {bp.a[N], bp.b[N]}
    undefined = {g for g, v in vals.items() if isinstance(v, Undetermined)}
    orig_free = {g for g in undefined if vals[g].reason == FREE}
    horizon = {g for g in undefined if vals[g].reason == HORIZON}
    # extensions fill ledger slots, so compare with the slots still open
    open_free = set()
    for n in range(1, N + 1):
        for th in fund.ledger[n]:
            open_free.update(fund.free_slot_points(n, th))
    for w in fund.writes:
        if w["op"] == "strong":
            open_free.difference_update(G.parse(q) for q, _ in w["points"])
    diff = G.sort((orig_free ^ open_free) | (horizon ^ expect_horizon))
    bundle.add("fm.free_points", verdict(G, not diff and open_free <= expect_free,
                                         counterexample=diff[0] if diff else None,
                                         free=len(orig_free), horizon=len(horizon)))
    # (iv) background value away from level-1 structure
    level1 = G.set_mul(bp.D[(N, 1)], set(bp.F[0]) | set(bp.D[(1, 0)]))
    bg = 1 - R[e]
    bad = next((g for g in G.sort(bp.F[N]) if g not in level1 and vals[g] != bg), None)
    bundle.add("fm.background", verdict(G, bad is None, counterexample=bad))
    # (vi) every level-n tile carries the same values off its free and pending points
    for n in range(1, N + 1):
        skip = {bp.a[n], bp.b[n]}
        for k in range(1, n + 1):
            for lam in bp.Lambda[k]:
                tb = mul(lam, bp.b[k - 1])
                skip.update(mul(d, tb) for d in bp.D[(n, k)])
        fs = [f for f in G.sort(bp.F[n]) if f not in skip]
        bad = None
        for gam in G.sort(bp.D[(N, n)]):
            for f in fs:
                if vals[mul(gam, f)] != vals[f]:
                    bad = mul(gam, f)
                    break
            if bad is not None:
                break
        bundle.add(f"fm.uniform.{n}", verdict(G, bad is None, counterexample=bad))
    # membership tests, on both constant completions of the free points
    for n in range(1, N + 1):
        W = determinate_window(fund, [fund.V[n]])
        Dn = set(bp.D[(N, n)])
        for fill in (0, 1):
            rep = check_membership_test(fund.completion(fill), Dn, fund.V[n], fund.P[n], W)
            rep.detail["window"] = len(W)
            bundle.add(f"membership.{n}.fill{fill}", rep)
    return bundle


# -- extensions -----------------------------------------------------------------------------

def code_length(block_size: int) -> int:
    """s(n) = ceil(log2(2|B_n|^4 + 1)) bits name a color of a (2|B_n|^4+1)-coloring."""
    return math.ceil(math.log2(2 * block_size ** 4 + 1))


def blocking_graph(G: Group, centers: list, B: list, s) -> dict:
    """gamma ~ psi when gamma^{-1}psi or psi^{-1}gamma lies in BB^{-1} s BB^{-1}."""
    BBi = G.set_mul(B, G.set_inv(B))
    K = G.set_mul(G.set_mul(BBi, [s]), BBi)
    adj = {c: set() for c in centers}
    for i, gam in enumerate(centers):
        gi = G.inv(gam)
        for psi in centers[i + 1:]:
            pi = G.inv(psi)
            if G.mul(gi, psi) in K or G.mul(pi, gam) in K:
                adj[gam].add(psi)
                adj[psi].add(gam)
    return adj


def greedy_coloring(order: list, adj: dict) -> dict:
    """Least color not used by an earlier neighbor, in the given order."""
    mu = {}
    for v in order:
        taken = {mu[u] for u in adj[v] if u in mu}
        c = 0
        while c in taken:
            c += 1
        mu[v] = c
    return mu


@dataclass
class BlockExtension:
    fund: FundamentalPrefix
    shifts: list
    colorings: list  # per handled level: center -> color
    slots: list  # per handled level: ledger slots used
    witness_sets: list  # per handled level: T_n


def extend_block_all(fund: FundamentalPrefix, S: list) -> BlockExtension:
    """Encode a proper coloring of each level's conflict graph into free slots.

    Level n handles shift s_n with B_n = F_n.  Centers conflict when their
    B_nB_n^{-1}-neighborhoods can be matched up by s_n; a greedy proper
    coloring is written least significant bit first into the first s(n)
    ledger slots at every center.
    """
    G = fund.group
    bp = fund.bp
    N = bp.N
    if len(S) > N:
        raise SpecError(f"only {N} levels available for {len(S)} shifts")
    out = fund.derive()
    mus, slots, Ts = [], [], []
    for n, s in enumerate(S, start=1):
        if s == G.identity:
            raise SpecError("cannot block the identity")
        B = bp.F[n]
        bits = code_length(len(B))
        if len(out.ledger[n]) < bits:
            raise SpecError(f"level {n} has {len(out.ledger[n])} free slots, needs {bits}")
        centers = G.sort(bp.D[(N, n)])
        adj = blocking_graph(G, centers, B, s)
        mu = greedy_coloring(centers, adj)
        if max(mu.values(), default=0) >= 2 ** bits:
            raise AssertionError("palette exceeds the code length")
        used = out.ledger[n][:bits]
        tb = [G.mul(th, bp.b[n - 1]) for th in used]
        for gam in centers:
            for i, p in enumerate(tb):
                g = G.mul(gam, p)
                if not (isinstance(out.values.get(g), Undetermined) and out.values[g].reason == FREE):
                    raise AssertionError(f"slot {G.fmt(g)} is not free")
                out.values[g] = (mu[gam] >> i) & 1
        out.ledger[n] = out.ledger[n][bits:]
        BBi = G.set_mul(B, G.set_inv(B))
        T = G.sort(G.set_mul(BBi, set(fund.V[n]) | set(tb)))
        out.writes.append({"op": "block", "level": n, "s": G.fmt(s), "bits": bits,
                           "slots": [G.fmt(t) for t in used], "colors": max(mu.values(), default=0) + 1})
        mus.append(mu)
        slots.append(used)
        Ts.append(T)
    return BlockExtension(out, list(S), mus, slots, Ts)


def check_block_extension(ext: BlockExtension, level: int, items=None) -> ReportBundle:
    """Blocking of s_n with T_n for the all-0 and all-1 completions on the shrunk
    window, plus witness portability at the partial-function level."""
    fund = ext.fund
    G = fund.group
    s = ext.shifts[level - 1]
    T = ext.witness_sets[level - 1]
    sT = [G.mul(s, t) for t in T]
    W = determinate_window(fund, [T, sT], items)
    bundle = ReportBundle()
    if not W:
        bundle.add("window", inconclusive(G, reason="empty shrunk window"))
        return bundle
    for fill in (0, 1):
        rep = check_blocking(fund.completion(fill), s, W, T=T)
        rep.detail["window"] = len(W)
        bundle.add(f"blocking.fill{fill}", rep)
    c = fund.eval

    def portable(g):
        gs = G.mul(g, s)
        for t in T:
            u, v = c(G.mul(g, t)), c(G.mul(gs, t))
            if not isinstance(u, Undetermined) and not isinstance(v, Undetermined) and u != v:
                return True
        return False

    bad = next((g for g in W if not portable(g)), None)
    bundle.add("portable", verdict(G, bad is None, counterexample=bad, witness=T, window=len(W)))
    return bundle


def orthogonal_extension(fund: FundamentalPrefix, tau: str) -> FundamentalPrefix:
    """Write tau(n-1) into the first open ledger slot of level n at every center."""
    G = fund.group
    bp = fund.bp
    if len(tau) > bp.N:
        raise SpecError("tau is longer than the prefix")
    out = fund.derive()
    for n, ch in enumerate(tau, start=1):
        if ch not in "01":
            raise SpecError("tau must be a bit string")
        if not out.ledger[n]:
            raise SpecError(f"level {n} has no free slot left")
        th = out.ledger[n][0]
        for g in out.free_slot_points(n, th):
            if not (isinstance(out.values.get(g), Undetermined) and out.values[g].reason == FREE):
                raise SpecError(f"slot {G.fmt(g)} was already written")
            out.values[g] = int(ch)
        out.ledger[n] = out.ledger[n][1:]
        out.writes.append({"op": "orth", "level": n, "bit": int(ch), "slot": G.fmt(th)})
    return out


def orthogonality_witness(fund: FundamentalPrefix, level: int, theta) -> list:
    """T_n = B_nB_n^{-1}(V_n u {theta b_{n-1}})"""
    G = fund.group
    bp = fund.bp
    B = bp.F[level]
    BBi = G.set_mul(B, G.set_inv(B))
    return G.sort(G.set_mul(BBi, set(fund.V[level]) | {G.mul(theta, bp.b[level - 1])}))


def check_orthogonal_pair(base: FundamentalPrefix, tau: str, sigma: str, fill: int = 0) -> WitnessReport:
    """c_tau against c_sigma at the first level where they differ."""
    G = base.group
    n = next((i + 1 for i, (a, b) in enumerate(zip(tau, sigma)) if a != b), None)
    if n is None:
        raise SpecError("tau and sigma agree; no separating level")
    theta = base.ledger[n][0]
    x = orthogonal_extension(base, tau)
    y = orthogonal_extension(base, sigma)
    T = orthogonality_witness(base, n, theta)
    W = determinate_window(y, [T], determinate_window(x, [T]))
    rep = check_orthogonality(x.completion(fill), y.completion(fill), W, T=T)
    rep.detail["window"] = len(W)
    rep.detail["level"] = n
    return rep


@dataclass
class StrongPlan:
    overlay: dict  # point -> bit
    plants: list  # (n, k_n, p, s_n p)


def strong_extension(fund: FundamentalPrefix, S: list, count: int | None = None) -> StrongPlan:
    """Plant one disagreement x(p) != x(s_n p) for each shift s_n.

    p = theta b_{k_n - 1} for the first open slot theta of level k_n, with
    k_n increasing; a level is fresh when p and s_n p avoid every earlier
    planted point and s_n p is determinate or free.
    """
    G = fund.group
    bp = fund.bp
    count = len(S) if count is None else count
    overlay, plants = {}, []
    k = 0
    touched = set()
    for n in range(count):
        s = S[n]
        if s == G.identity:
            raise SpecError("cannot separate the identity shift")
        while True:
            k += 1
            if k > bp.N:
                raise SpecError(f"prefix exhausted after {len(plants)} plantings")
            if not fund.ledger[k]:
                continue
            p = G.mul(fund.ledger[k][0], bp.b[k - 1])
            q = G.mul(s, p)
            if p in touched or q in touched or q == p:
                continue
            v = fund.values.get(q)
            if v is None or (isinstance(v, Undetermined) and v.reason != FREE):
                continue
            break
        if isinstance(v, Undetermined):
            overlay[q] = 0
            overlay[p] = 1
        else:
            overlay[p] = 1 - v
        touched.update((p, q))
        plants.append((n + 1, k, p, q))
    return StrongPlan(overlay, plants)


def apply_overlay(fund: FundamentalPrefix, overlay: dict, fill: int = 0) -> Coloring:
    base = fund.completion(fill)
    return Coloring(fund.group, lambda g: overlay[g] if g in overlay else base.eval(g),
                    {"ctor": "overlay", "points": len(overlay)}, memo=False)


def apply_strong(fund: FundamentalPrefix, plan: StrongPlan, S: list) -> FundamentalPrefix:
    """Write the planted bits.  A plant uses its slot at the identity center
    only, so the ledger keeps the slot; plant last."""
    G = fund.group
    out = fund.derive()
    for g, v in plan.overlay.items():
        out.values[g] = v
    for n, k, p, q in plan.plants:
        out.writes.append({"op": "strong", "n": n, "level": k, "s": G.fmt(S[n - 1]),
                           "p": G.fmt(p), "q": G.fmt(q),
                           "points": [[G.fmt(g), plan.overlay[g]] for g in (p, q) if g in plan.overlay]})
    return out


def verify_extensions(fund: FundamentalPrefix) -> ReportBundle:
    """Replay the logged extensions: blocking writes are re-checked with their
    witness sets, strong plants by counting disagreements."""
    G = fund.group
    bp = fund.bp
    bundle = ReportBundle()
    for i, w in enumerate(fund.writes):
        if w["op"] == "block":
            n = w["level"]
            s = G.parse(w["s"])
            tb = {G.mul(G.parse(t), bp.b[n - 1]) for t in w["slots"]}
            BBi = G.set_mul(bp.F[n], G.set_inv(bp.F[n]))
            T = G.sort(G.set_mul(BBi, set(fund.V[n]) | tb))
            ext = BlockExtension(fund, [s], [], [], [T])
            for name, rep in check_block_extension(ext, 1):
                bundle.add(f"write{i}.{name}", rep)
        elif w["op"] == "strong":
            p, q = G.parse(w["p"]), G.parse(w["q"])
            u, v = fund.eval(p), fund.eval(q)
            ok = not isinstance(u, Undetermined) and not isinstance(v, Undetermined) and u != v
            bundle.add(f"write{i}.strong", verdict(G, ok, counterexample=p, plant=[w["p"], w["q"]]))
    return bundle
