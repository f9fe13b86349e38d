"""Window-bounded checks of blocking, orthogonality, minimality and friends.

Every check quantifies over a finite window W of the group.  A check either
confirms the property on W with an explicit witness set T, refutes it for a
caller-supplied T with a counterexample, or gives up after exhausting its
search radius.  Colorings are evaluated lazily: only the cells a check actually
looks at are computed, and touching an undetermined cell raises WindowTooSmall.
"""
from __future__ import annotations

import enum
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .coloring import Coloring, Undetermined, WindowTooSmall
from .groups import FiniteTable, Group, Zd


class SpecError(ValueError):
    """Bad arguments to a check (exit code 64 on the command line)."""


class Status(str, enum.Enum):
    CONFIRMED = "ConfirmedOnWindow"
    REFUTED = "Refuted"
    INCONCLUSIVE = "Inconclusive"


EXIT_CODES = {Status.CONFIRMED: 0, Status.REFUTED: 1, Status.INCONCLUSIVE: 2}
EXIT_WINDOW_TOO_SMALL = 3
EXIT_SPEC_ERROR = 64


@dataclass
class WitnessReport:
    status: Status
    group: Group
    witness: list | None = None
    counterexample: object = None
    window_radius: int | None = None
    searched_radius: int | None = None
    detail: dict = field(default_factory=dict)

    @property
    def confirmed(self) -> bool:
        return self.status is Status.CONFIRMED

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def _fmt_counterexample(self):
        ce = self.counterexample
        if ce is None:
            return None
        if isinstance(ce, list):
            return [self.group.fmt(g) for g in ce]
        return self.group.fmt(ce)

    def to_json(self) -> dict:
        G = self.group
        out = {
            "status": self.status.value,
            "witness": None if self.witness is None else [G.fmt(t) for t in self.witness],
            "counterexample": self._fmt_counterexample(),
            "window_radius": self.window_radius,
            "searched_radius": self.searched_radius,
        }
        if self.detail:
            out["detail"] = self.detail
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    def __repr__(self):
        extra = ""
        if self.counterexample is not None:
            extra = f", counterexample={self._fmt_counterexample()}"
        if self.searched_radius is not None:
            extra += f", searched_radius={self.searched_radius}"
        return f"WitnessReport({self.status.value}{extra})"


# -- windows and candidate witness sets ---------------------------------------

def resolve_window(G: Group, W) -> tuple[list, int | None]:
    """A window is either a ball radius or an explicit element collection."""
    if isinstance(W, int):
        if W < 0:
            raise SpecError("window radius must be nonnegative")
        return G.ball(W), W
    return G.sort(set(W)), None


class Candidates:
    """Nested candidate witness sets T_0 ⊆ T_1 ⊆ ... indexed by radius.

    ``ball``: T_r = ball(r).  ``nonnegative`` (Z only): T_r = {0, ..., r}.
    A callable ``layer(r)`` may be passed to define a custom family by its
    layers T_r minus T_{r-1}.
    """

    def __init__(self, G: Group, kind: str | Callable = "ball"):
        self.G = G
        self.kind = kind
        self._layers: list[list] = []
        if kind == "nonnegative" and not (isinstance(G, Zd) and G.d == 1):
            raise SpecError("nonnegative candidates exist only on Z")

    def _make_layer(self, r):
        G = self.G
        if callable(self.kind):
            return list(self.kind(r))
        if self.kind == "nonnegative":
            return [(r,)]
        if self.kind == "ball":
            if isinstance(G, Zd) and G.d == 1:
                return [(0,)] if r == 0 else [(r,), (-r,)]
            if G.order is not None and r > 1:
                return []
            return [g for g in G.ball(r) if G.norm(g) == r]
        raise SpecError(f"unknown candidate family {self.kind!r}")

    def layer(self, r) -> list:
        while len(self._layers) <= r:
            self._layers.append(self._make_layer(len(self._layers)))
        return self._layers[r]

    def upto(self, r) -> list:
        return [t for i in range(r + 1) for t in self.layer(i)]

    def first_radius(self, pred: Callable, r_max: int) -> int | None:
        for r in range(r_max + 1):
            for t in self.layer(r):
                if pred(t):
                    return r
        return None


def _as_candidates(G, candidates) -> Candidates:
    return candidates if isinstance(candidates, Candidates) else Candidates(G, candidates)


def _map(fn: Callable, items: Sequence, threads: int = 1) -> list:
    if threads <= 1 or len(items) < 256:
        return [fn(g) for g in items]
    chunk = max(1, len(items) // (threads * 4))
    parts = [items[i:i + chunk] for i in range(0, len(items), chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        res = pool.map(lambda part: [fn(g) for g in part], parts)
    return [v for part in res for v in part]


def _minimize(T: list, ok: Callable[[list], bool]) -> list:
    """Greedy pass dropping elements of T (latest first) while ok(T) holds."""
    T = list(T)
    for t in reversed(list(T)):
        trial = [u for u in T if u != t]
        if trial and ok(trial):
            T = trial
    return T


def _search(G, items, pred_for, r_max, candidates, threads):
    """Per-item minimal witness radius; returns (radius or None, first failing item)."""
    cand = _as_candidates(G, candidates)
    cand.layer(0)
    radii = _map(lambda g: cand.first_radius(pred_for(g), r_max), items, threads)
    failing = [g for g, r in zip(items, radii) if r is None]
    if failing:
        return None, failing[0], cand
    return max(radii, default=0), None, cand


def _check_given(items, has_witness, threads):
    if threads <= 1:
        for g in items:
            if not has_witness(g):
                return g
        return None
    flags = _map(has_witness, items, threads)
    for g, f in zip(items, flags):
        if not f:
            return g
    return None


# -- blocking -------------------------------------------------------------------

def check_blocking(x: Coloring, s, W, T: Iterable | None = None, exceptional: Iterable | None = None,
                   r_max: int | None = None, candidates="ball", minimize: bool = False,
                   threads: int = 1) -> WitnessReport:
    """forall g in W \\ exceptional, exists t in T: x(gt) != x(gst)."""
    G = x.group
    if s == G.identity:
        raise SpecError("the identity cannot be blocked")
    items, wr = resolve_window(G, W)
    if exceptional:
        exc = set(exceptional)
        items = [g for g in items if g not in exc]
    mul, val = G.mul, x.value

    def pred_for(g):
        gs = mul(g, s)
        return lambda t: val(mul(g, t)) != val(mul(gs, t))

    if T is not None:
        T = list(T)
        bad = _check_given(items, lambda g: any(map(pred_for(g), T)), threads)
        if bad is not None:
            return WitnessReport(Status.REFUTED, G, counterexample=bad, window_radius=wr)
        return WitnessReport(Status.CONFIRMED, G, witness=T, window_radius=wr)
    if r_max is None:
        raise SpecError("either T or r_max must be given")
    R, bad, cand = _search(G, items, pred_for, r_max, candidates, threads)
    if R is None:
        return WitnessReport(Status.INCONCLUSIVE, G, window_radius=wr, searched_radius=r_max,
                             detail={"unwitnessed": G.fmt(bad)})
    T = cand.upto(R)
    if minimize:
        T = _minimize(T, lambda T2: all(any(map(pred_for(g), T2)) for g in items))
    return WitnessReport(Status.CONFIRMED, G, witness=T, window_radius=wr, searched_radius=R)


# -- orthogonality --------------------------------------------------------------

def _signatures(x: Coloring, items, T, threads):
    G = x.group
    mul, val = G.mul, x.value
    return _map(lambda g: tuple(val(mul(g, t)) for t in T), items, threads)


def _first_shared(items, sx, sy):
    ymap = {}
    for g, sig in zip(items, sy):
        ymap.setdefault(sig, g)
    for g, sig in zip(items, sx):
        if sig in ymap:
            return [g, ymap[sig]]
    return None


def check_orthogonality(x: Coloring, y: Coloring, W, T: Iterable | None = None, r_max: int | None = None,
                        candidates="ball", threads: int = 1) -> WitnessReport:
    """forall g0, g1 in W, exists t in T: x(g0 t) != y(g1 t).

    Two translates are separated by T exactly when their T-signatures differ,
    so the pair loop reduces to comparing two signature sets.
    """
    G = x.group
    if y.group != G:
        raise SpecError("colorings live on different groups")
    items, wr = resolve_window(G, W)
    if T is not None:
        T = list(T)
        pair = _first_shared(items, _signatures(x, items, T, threads), _signatures(y, items, T, threads))
        if pair is not None:
            return WitnessReport(Status.REFUTED, G, counterexample=pair, window_radius=wr)
        return WitnessReport(Status.CONFIRMED, G, witness=T, window_radius=wr)
    if r_max is None:
        raise SpecError("either T or r_max must be given")
    cand = _as_candidates(G, candidates)
    for r in range(r_max + 1):
        Tr = cand.upto(r)
        pair = _first_shared(items, _signatures(x, items, Tr, threads), _signatures(y, items, Tr, threads))
        if pair is None:
            return WitnessReport(Status.CONFIRMED, G, witness=Tr, window_radius=wr, searched_radius=r)
    return WitnessReport(Status.INCONCLUSIVE, G, window_radius=wr, searched_radius=r_max)


# -- minimality -----------------------------------------------------------------

def check_minimality(x: Coloring, A: Iterable, W, T: Iterable | None = None, r_max: int | None = None,
                     candidates="ball", threads: int = 1) -> WitnessReport:
    """forall g in W, exists t in T, forall a in A: x(gta) = x(a)."""
    G = x.group
    A = G.sort(set(A))
    pattern = [(a, x.value(a)) for a in A]
    items, wr = resolve_window(G, W)
    mul, val = G.mul, x.value

    def pred_for(g):
        def pred(t):
            gt = mul(g, t)
            return all(val(mul(gt, a)) == v for a, v in pattern)
        return pred

    if T is not None:
        T = list(T)
        bad = _check_given(items, lambda g: any(map(pred_for(g), T)), threads)
        if bad is not None:
            return WitnessReport(Status.REFUTED, G, counterexample=bad, window_radius=wr)
        return WitnessReport(Status.CONFIRMED, G, witness=T, window_radius=wr)
    if r_max is None:
        raise SpecError("either T or r_max must be given")
    R, bad, cand = _search(G, items, pred_for, r_max, candidates, threads)
    if R is None:
        return WitnessReport(Status.INCONCLUSIVE, G, window_radius=wr, searched_radius=r_max,
                             detail={"unwitnessed": G.fmt(bad)})
    return WitnessReport(Status.CONFIRMED, G, witness=cand.upto(R), window_radius=wr, searched_radius=R)


# -- aperiodicity and strong blocking -------------------------------------------

def check_aperiodic(x: Coloring, s, W) -> WitnessReport:
    """Looks for t in W with x(st) != x(t); s is then not a period of x."""
    G = x.group
    items, wr = resolve_window(G, W)
    for t in items:
        if x.value(G.mul(s, t)) != x.value(t):
            return WitnessReport(Status.CONFIRMED, G, witness=[t], window_radius=wr)
    return WitnessReport(Status.INCONCLUSIVE, G, window_radius=wr)


def check_strong_blocking(x: Coloring, s, W) -> int:
    """Number of g in W with x(sg) != x(g)."""
    G = x.group
    items, _ = resolve_window(G, W)
    return sum(1 for g in items if x.value(G.mul(s, g)) != x.value(g))


# -- slenderness ----------------------------------------------------------------

def check_slender(A, W, T: Iterable | None = None, r_max: int | None = None, group: Group | None = None,
                  candidates="ball") -> WitnessReport:
    """forall g in W, exists t in T with gt outside A.

    ``A`` is a membership predicate or a set; ``group`` is required with a
    predicate.  Non-slenderness can never be confirmed on a window.
    """
    if group is None:
        raise SpecError("group is required")
    G = group
    inA = A if callable(A) else (lambda g, S=frozenset(A): g in S)
    items, wr = resolve_window(G, W)
    mul = G.mul

    def pred_for(g):
        return lambda t: not inA(mul(g, t))

    if T is not None:
        T = list(T)
        bad = _check_given(items, lambda g: any(map(pred_for(g), T)), 1)
        if bad is not None:
            return WitnessReport(Status.REFUTED, G, counterexample=bad, window_radius=wr)
        return WitnessReport(Status.CONFIRMED, G, witness=T, window_radius=wr)
    if r_max is None:
        raise SpecError("either T or r_max must be given")
    R, bad, cand = _search(G, items, pred_for, r_max, candidates, 1)
    if R is None:
        return WitnessReport(Status.INCONCLUSIVE, G, window_radius=wr, searched_radius=r_max,
                             detail={"unwitnessed": G.fmt(bad)})
    return WitnessReport(Status.CONFIRMED, G, witness=cand.upto(R), window_radius=wr, searched_radius=R)


# -- membership tests -----------------------------------------------------------

def check_membership_test(x: Coloring, delta, V: Sequence, P, W) -> WitnessReport:
    """forall g in W: (forall v in V, x(gv) = P(v))  <=>  g in delta.

    ``delta`` is a set or a predicate; ``P`` a dict or callable on V.
    """
    G = x.group
    in_delta = delta if callable(delta) else (lambda g, S=frozenset(delta): g in S)
    pv = P if callable(P) else P.__getitem__
    V = list(V)
    items, wr = resolve_window(G, W)
    for g in items:
        match = all(x.value(G.mul(g, v)) == pv(v) for v in V)
        if match != bool(in_delta(g)):
            return WitnessReport(Status.REFUTED, G, counterexample=g, window_radius=wr,
                                 detail={"test_matches": match})
    return WitnessReport(Status.CONFIRMED, G, witness=V, window_radius=wr)


# -- exhaustive census on finite groups -----------------------------------------

@dataclass
class Census:
    group: FiniteTable
    k: int
    points: list
    aperiodic: list
    orbits: list  # orbits of aperiodic points, each a sorted list of points

    @property
    def two_colorings(self) -> list:
        # in a finite group the orbit closure is the orbit, and all points of
        # an orbit share stabilizers up to conjugacy
        return self.aperiodic

    @property
    def orthogonal_pairs(self) -> int:
        return sum(len(a) * len(b) for a, b in itertools.combinations(self.orbits, 2))

    @property
    def max_orthogonal_family(self) -> int:
        return len(self.orbits)

    def orbit_of(self, x) -> list:
        return _orbit(self.group, tuple(x))

    def orthogonal(self, x, y) -> bool:
        return not set(self.orbit_of(x)) & set(self.orbit_of(y))

    def blocks(self, x, s) -> bool:
        """Oracle: x blocks s iff no translate of x is fixed by s."""
        G = self.group
        return all(_shift_point(G, s, y) != y for y in self.orbit_of(x))

    def summary(self) -> dict:
        return {
            "order": self.group.order,
            "alphabet": self.k,
            "points": len(self.points),
            "aperiodic": len(self.aperiodic),
            "two_colorings": len(self.two_colorings),
            "orthogonal_pairs": self.orthogonal_pairs,
            "max_orthogonal_family": self.max_orthogonal_family,
        }


def _shift_point(G: FiniteTable, h, x: tuple) -> tuple:
    hinv = G.inv(h)
    return tuple(x[G.mul(hinv, g)] for g in range(G.order))


def _orbit(G: FiniteTable, x: tuple) -> list:
    return sorted({_shift_point(G, h, x) for h in range(G.order)})


def brute_force_colorings(G: FiniteTable, k: int = 2, max_order: int = 12) -> Census:
    if not isinstance(G, FiniteTable):
        raise SpecError("brute force needs a finite table group")
    if G.order > max_order:
        raise SpecError(f"group of order {G.order} exceeds the exhaustion bound {max_order}")
    if k < 1:
        raise SpecError("alphabet must be nonempty")
    points = list(itertools.product(range(k), repeat=G.order))
    aperiodic = [x for x in points if all(_shift_point(G, h, x) != x for h in range(1, G.order))]
    orbits, seen = [], set()
    for x in aperiodic:
        if x not in seen:
            orb = _orbit(G, x)
            seen.update(orb)
            orbits.append(orb)
    return Census(G, k, points, aperiodic, orbits)


def point_coloring(G: FiniteTable, x: Sequence[int]) -> Coloring:
    x = tuple(x)
    return Coloring(G, lambda g: x[g], {"ctor": "table", "values": list(x)}, memo=False)


# -- bundles of reports ---------------------------------------------------------

class ReportBundle:
    """Named reports from a multi-clause verification, kept in insertion order."""

    def __init__(self):
        self.items: list[tuple[str, WitnessReport]] = []

    def add(self, name: str, report: WitnessReport) -> WitnessReport:
        self.items.append((name, report))
        return report

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, name):
        for k, r in self.items:
            if k == name:
                return r
        raise KeyError(name)

    def names(self) -> list:
        return [k for k, _ in self.items]

    @property
    def all_confirmed(self) -> bool:
        return all(r.confirmed for _, r in self.items)

    def failures(self) -> list:
        return [(k, r) for k, r in self.items if not r.confirmed]

    @property
    def exit_code(self) -> int:
        return max((r.exit_code for _, r in self.items), default=0)

    def to_json(self) -> dict:
        return {k: r.to_json() for k, r in self.items}

    def __repr__(self):
        bad = [k for k, r in self.items if not r.confirmed]
        return f"ReportBundle({len(self.items)} reports, failing={bad})"


def verdict(G: Group, ok: bool, counterexample=None, witness=None, window_radius=None, **detail) -> WitnessReport:
    """Report for a check whose witness is structural rather than a set T."""
    if ok:
        return WitnessReport(Status.CONFIRMED, G, witness=witness, window_radius=window_radius, detail=detail)
    return WitnessReport(Status.REFUTED, G, counterexample=counterexample, window_radius=window_radius,
                         detail=detail)


def inconclusive(G: Group, window_radius=None, **detail) -> WitnessReport:
    return WitnessReport(Status.INCONCLUSIVE, G, window_radius=window_radius, detail=detail)
