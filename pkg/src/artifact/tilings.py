"""Coherent, cofinal, centered sequences of tilings on Z^d, free groups and
residually finite chains, with window verification of the tiling axioms."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .groups import Free, Group, Zd, from_descriptor
from .verifier import ReportBundle, SpecError, inconclusive, resolve_window, verdict


# -- center sets ----------------------------------------------------------------

class LatticeCenters:
    """base + (step Z)^d; membership is decidable everywhere."""

    kind = "lattice"

    def __init__(self, G: Zd, step: int, base=None):
        self.G = G
        self.step = step
        self.base = base if base is not None else G.identity

    def known(self, g) -> bool:
        return True

    def __contains__(self, g) -> bool:
        s = self.step
        return all((a - b) % s == 0 for a, b in zip(g, self.base))

    def candidates(self, items, F) -> list:
        """Centers c with cF meeting the window, via the bounding box."""
        G, s = self.G, self.step
        lo = [min(g[i] for g in items) - max(f[i] for f in F) for i in range(G.d)]
        hi = [max(g[i] for g in items) - min(f[i] for f in F) for i in range(G.d)]
        axes = []
        for i in range(G.d):
            b = self.base[i]
            start = lo[i] + (b - lo[i]) % s
            axes.append(range(start, hi[i] + 1, s))
        W = set(items)
        mul = G.mul
        out = [c for c in itertools.product(*axes) if any(mul(c, f) in W for f in F)]
        return G.sort(out)

    def to_json(self):
        return {"step": self.step, "base": self.G.fmt(self.base)}


class SetCenters:
    """Explicit centers, trusted only inside a known region.

    ``region`` None means the explicit list is complete on the whole group.
    """

    kind = "window"

    def __init__(self, G: Group, elements, region=None):
        self.G = G
        self.elements = frozenset(elements)
        self.region = None if region is None else frozenset(region)

    def known(self, g) -> bool:
        return self.region is None or g in self.region

    def __contains__(self, g) -> bool:
        return g in self.elements

    def candidates(self, items, F) -> list:
        G = self.G
        W = set(items)
        out = [c for c in self.elements if self.known(c) and any(G.mul(c, f) in W for f in F)]
        return G.sort(out)

    def to_json(self):
        G = self.G
        out = {"elements": [G.fmt(g) for g in G.sort(self.elements)]}
        if self.region is not None:
            out["region"] = [G.fmt(g) for g in G.sort(self.region)]
        return out


def centers_from_json(G, kind, obj, tower=None):
    if kind == "tree":
        if tower is None:
            raise ValueError("tree centers need the subtree tower")
        return TreeCenters(tower, int(obj["level"]))
    if kind == "lattice":
        return LatticeCenters(G, int(obj["step"]), G.parse(obj["base"]))
    region = obj.get("region")
    return SetCenters(G, [G.parse(s) for s in obj["elements"]],
                      None if region is None else [G.parse(s) for s in region])


@dataclass
class Level:
    F: list
    delta: object
    decomp: list = field(default_factory=list)  # delta^n_{n-1}: F_n is the disjoint union of d F_{n-1}
    index: int | None = None


@dataclass
class CccPrefix:
    group: Group
    levels: list
    cofinal: list  # per-level cofinality record
    cofinal_kind: str = "radius"  # "radius": ball(r) in F_n; "prefix": first r enumerated elements in F_n
    translators: list = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.levels) - 1

    def to_json(self) -> dict:
        G = self.group
        out = {
            "group": G.descriptor(),
            "levels": [
                {
                    "F": [G.fmt(g) for g in G.sort(lev.F)],
                    "delta_kind": lev.delta.kind,
                    "delta": lev.delta.to_json(),
                    "decomp": [G.fmt(g) for g in lev.decomp],
                    "index": lev.index,
                }
                for lev in self.levels
            ],
            "cofinal_radii": list(self.cofinal),
            "cofinal_kind": self.cofinal_kind,
        }
        if self.translators:
            out["translators"] = [G.fmt(w) for w in self.translators]
        tower = getattr(self, "tower", None)
        if tower is not None:
            out["tower"] = tower.to_json()
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def from_json(cls, obj) -> "CccPrefix":
        if isinstance(obj, str):
            obj = json.loads(obj)
        G = from_descriptor(obj["group"])
        tower = SubtreeTower.from_json(G, obj["tower"]) if "tower" in obj else None
        levels = []
        for lev in obj["levels"]:
            levels.append(Level(
                F=[G.parse(s) for s in lev["F"]],
                delta=centers_from_json(G, lev["delta_kind"], lev["delta"], tower),
                decomp=[G.parse(s) for s in lev.get("decomp", [])],
                index=lev.get("index"),
            ))
        seq = cls(G, levels, list(obj["cofinal_radii"]), obj.get("cofinal_kind", "radius"),
                  [G.parse(s) for s in obj.get("translators", [])])
        if tower is not None:
            seq.tower = tower
        return seq


def prefix_count(G: Group, F) -> int:
    """Number of initial enumerated elements all lying in F."""
    S = set(F)
    n = 0
    while G.element(n) in S:
        n += 1
        if G.order is not None and n == G.order:
            break
    return n


# -- Z^d ----------------------------------------------------------------------------

def zd_ccc(d: int, m: int, N: int, one_sided: bool = False) -> CccPrefix:
    """Cubes of side m^n centered at the lattice (m^n Z)^d.

    ``one_sided`` gives the corner-anchored cubes {0..m^n-1}^d instead; those
    are coherent and centered but cover no ball around the identity beyond
    radius 0, so the cofinality record stays flat.
    """
    if m < 2:
        raise ValueError("base must be at least 2")
    if not one_sided and m % 2 == 0:
        raise ValueError("centered blocks need an odd base")
    G = Zd(d)

    def cube(side, lo):
        return G.sort(itertools.product(range(lo, lo + side), repeat=d))

    levels, radii = [], []
    for n in range(N + 1):
        side = m ** n
        lo = 0 if one_sided else -(side - 1) // 2
        F = cube(side, lo)
        if n == 0:
            decomp = []
        else:
            prev = m ** (n - 1)
            steps = range(0, m) if one_sided else range(-(m - 1) // 2, (m - 1) // 2 + 1)
            decomp = G.sort(tuple(prev * c for c in v) for v in itertools.product(steps, repeat=d))
        levels.append(Level(F, LatticeCenters(G, side), decomp, m ** d if n else None))
        radii.append(0 if one_sided else (side - 1) // 2)
    return CccPrefix(G, levels, radii, "radius")


# -- free groups ----------------------------------------------------------------------

def is_subtree(F: Free, S) -> bool:
    S = set(S)
    return F.identity in S and all(w[:-1] in S for w in S if w)


def free_tile_extend(F: Free, S, z):
    """Absorb z into the subtree S by a disjoint translate wS.

    z = y x with y in S and x a signed letter; k is the largest power with
    x^{-k} in S, and w = z x^k.
    """
    S = set(S)
    if not is_subtree(F, S):
        raise ValueError("S is not a rooted subtree")
    if not z or z in S:
        raise ValueError("z must be a nonidentity element outside S")
    if z[:-1] not in S:
        raise ValueError("the parent of z is not in S")
    x = z[-1]
    k = 0
    while (-x,) * (k + 1) in S:
        k += 1
    w = F.mul(z, (x,) * k)
    wS = {F.mul(w, s) for s in S}
    if wS & S:
        raise AssertionError("translate overlaps the subtree")
    return w, S | wS


class SubtreeTower:
    """The doubling sequence S_{i+1} = S_i u w_i S_i, stored implicitly.

    w_i S_i hangs off S_i across the single tree edge leading to the absorbed
    element z_i, so it is exactly the part of S_{i+1} consisting of words with
    prefix z_i.  Membership and level-n centers therefore follow one path down
    the steps.
    """

    def __init__(self, F: Free, seed):
        self.F = F
        self.seed = frozenset(seed)
        if not is_subtree(F, self.seed):
            raise ValueError("seed is not a rooted subtree")
        self.ws: list = []
        self.zs: list = []
        self._inv: list = []
        self._pos = 0
        self._levels = {0: set(self.seed)}

    @property
    def M(self) -> int:
        return len(self.ws)

    def reduce(self, g, down_to: int = 0, top: int | None = None):
        """Strip translators from g; returns (center, remainder) with g = center * remainder."""
        F = self.F
        c = F.identity
        i = self.M if top is None else top
        while i > down_to:
            z = self.zs[i - 1]
            if g[:len(z)] == z:
                g = F.mul(self._inv[i - 1], g)
                c = F.mul(c, self.ws[i - 1])
            i -= 1
        return c, g

    def contains(self, g, top: int | None = None) -> bool:
        return self.reduce(g, 0, top)[1] in self.seed

    def center(self, n: int, g):
        """Level-n center of the tile holding g, or None when g lies outside S_M."""
        c, rest = self.reduce(g, n)
        return c if rest in self.subtree(n) else None

    def step(self):
        F = self.F
        while self.contains(F.element(self._pos)):
            self._pos += 1
        z = F.element(self._pos)
        x = z[-1]
        k = 0
        while self.contains((-x,) * (k + 1)):
            k += 1
        w = F.mul(z, (x,) * k)
        self.ws.append(w)
        self.zs.append(z)
        self._inv.append(F.inv(w))

    def subtree(self, n: int) -> set:
        S = self._levels.get(n)
        if S is None:
            prev = self.subtree(n - 1)
            w = self.ws[n - 1]
            S = prev | {self.F.mul(w, s) for s in prev}
            self._levels[n] = S
        return S

    def to_json(self) -> dict:
        F = self.F
        return {"seed": [F.fmt(g) for g in F.sort(self.seed)],
                "translators": [F.fmt(w) for w in self.ws],
                "absorbed": [F.fmt(z) for z in self.zs]}

    @classmethod
    def from_json(cls, F: Free, obj) -> "SubtreeTower":
        t = cls(F, [F.parse(s) for s in obj["seed"]])
        for w, z in zip(obj["translators"], obj["absorbed"]):
            t.ws.append(F.parse(w))
            t.zs.append(F.parse(z))
            t._inv.append(F.inv(t.ws[-1]))
        return t


class TreeCenters:
    """Level-n centers of a subtree tower; decidable inside the top subtree."""

    kind = "tree"

    def __init__(self, tower: SubtreeTower, n: int):
        self.tower = tower
        self.n = n

    def known(self, g) -> bool:
        return self.tower.contains(g)

    def __contains__(self, g) -> bool:
        return self.tower.center(self.n, g) == g

    def candidates(self, items, F) -> list:
        G = self.tower.F
        Finv = G.set_inv(F)
        cand = {G.mul(g, fi) for g in items for fi in Finv}
        return G.sort(c for c in cand if self.known(c) and c in self)

    def to_json(self):
        return {"level": self.n}


def free_ccc(k: int, N: int, seed_radius: int = 0, window_radius: int = 4, max_steps: int = 100000) -> CccPrefix:
    """Doubling subtrees absorbing the least missing element at each step.

    Levels 0..N are recorded as S_0..S_N.  Doubling continues until the top
    subtree S_M contains ball(window_radius); inside S_M the level-n centers
    are the products w_{M-1}^e ... w_n^e with exponents in {0, 1}.
    """
    F = Free(k)
    tower = SubtreeTower(F, F.ball(seed_radius))
    need = F.ball(window_radius)
    while tower.M < N or not all(tower.contains(g) for g in need):
        if tower.M >= max_steps:
            raise ValueError("step budget exhausted before the window was absorbed")
        tower.step()
    levels = []
    for n in range(N + 1):
        levels.append(Level(F.sort(tower.subtree(n)), TreeCenters(tower, n),
                            [F.identity, tower.ws[n - 1]] if n else [], 2 if n else None))
    cof = [prefix_count(F, lev.F) for lev in levels]
    seq = CccPrefix(F, levels, cof, "prefix", translators=tower.ws[:N])
    seq.tower = tower
    return seq


# -- residually finite chains on Z^d ----------------------------------------------------

def rf_ccc(m: int, N: int, d: int = 1) -> CccPrefix:
    """Tilings with Delta_n = m^n Z^d and tiles F_n = D^n_{n-1} ... D^1_0.

    Each D^{k+1}_k is a transversal of K_{k+1} in K_k containing the identity.
    From the second level on, one representative is steered so that the least
    enumerated element outside K_{k+2}F_{k+1} lands in F_{k+2}; the remaining
    cosets take their least enumerated element of K_k.
    """
    if m < 2:
        raise ValueError("chain base must be at least 2")
    G = Zd(d)

    def in_K(g, n):
        s = m ** n
        return all(c % s == 0 for c in g)

    def same_coset(g, h, n):
        s = m ** n
        return all((a - b) % s == 0 for a, b in zip(g, h))

    # the nonidentity enumeration must satisfy g_i not in K_{i+1}
    for i in range(1, 4 * N + 8):
        g = G.element(i)
        if in_K(g, i):
            raise ValueError(f"enumerated element {G.fmt(g)} lies too deep in the chain")

    def complete(k, chosen):
        """Fill a transversal of K_{k+1} in K_k starting from ``chosen``."""
        reps = list(chosen)
        need = m ** d
        n = 1
        while len(reps) < need:
            g = G.element(n)
            n += 1
            if in_K(g, k) and not any(same_coset(g, r, k + 1) for r in reps):
                reps.append(g)
        return reps

    levels = [Level([G.identity], LatticeCenters(G, 1), [], None)]
    F = [G.identity]
    for k in range(N):
        if k == 0:
            chosen = [G.identity, G.element(1)]
        else:
            Fset = F
            n = 1
            while True:
                g = G.element(n)
                if not any(same_coset(g, f, k + 1) for f in Fset):
                    break
                n += 1
            gamma = next(f for f in Fset if same_coset(g, f, k))
            chosen = [G.identity, G.mul(g, G.inv(gamma))]
        reps = complete(k, chosen if m ** d > 1 else [G.identity])
        F = G.sort(G.set_mul(reps, F))
        levels.append(Level(F, LatticeCenters(G, m ** (k + 1)), G.sort(reps), m ** d))
    cof = [prefix_count(G, lev.F) for lev in levels]
    return CccPrefix(G, levels, cof, "prefix")


# -- verification ---------------------------------------------------------------------

def _paint(G, lev: Level, items):
    """Owner map of the level's tiles over the centers meeting the window.

    Centers are painted in rank order; returns (owner, first center whose
    tile overlaps an earlier one, centers).
    """
    owner = {}
    overlap = None
    centers = lev.delta.candidates(items, lev.F)
    mul = G.mul
    for c in centers:
        for f in lev.F:
            cell = mul(c, f)
            if cell in owner:
                if overlap is None:
                    overlap = c
                continue
            owner[cell] = c
    return owner, overlap, centers


def verify_ccc(seq: CccPrefix, W) -> ReportBundle:
    """Disjointness, cover, coherence, centering, decomposition and cofinality.

    Cover holds at g when some decidable center's tile contains g.  A point
    with no covering tile refutes cover only if every candidate center in
    gF^{-1} is decidable; otherwise it leaves the report inconclusive.
    """
    G = seq.group
    items, wr = resolve_window(G, W)
    if not items:
        raise SpecError("empty window")
    bundle = ReportBundle()
    owners = []
    for n, lev in enumerate(seq.levels):
        owner, overlap, centers = _paint(G, lev, items)
        owners.append((owner, centers))
        bundle.add(f"level{n}.disjoint", verdict(G, overlap is None, counterexample=overlap,
                                                  window_radius=wr, centers=len(centers)))
        known = lev.delta.known
        Finv = G.set_inv(lev.F)
        holes = [g for g in items if g not in owner]
        decided = [g for g in holes if all(known(G.mul(g, fi)) for fi in Finv)]
        if decided:
            rep = verdict(G, False, counterexample=decided[0], window_radius=wr)
        elif holes:
            rep = inconclusive(G, window_radius=wr, undecided=G.fmt(holes[0]))
        else:
            rep = verdict(G, True, window_radius=wr)
        bundle.add(f"level{n}.cover", rep)
        bundle.add(f"level{n}.centered", verdict(G, known(G.identity) and G.identity in lev.delta,
                                                 counterexample=G.identity, window_radius=wr))
        if n:
            prev = seq.levels[n - 1].F
            cells = [G.mul(dl, f) for dl in lev.decomp for f in prev]
            ok = len(cells) == len(set(cells)) and set(cells) == set(lev.F)
            if lev.index is not None:
                ok = ok and len(lev.decomp) == lev.index
            bundle.add(f"level{n}.decomposition", verdict(G, ok, counterexample=G.identity, window_radius=wr,
                                                          pieces=len(lev.decomp)))
    # every tile of a lower level lies in a single tile of each higher level
    for n in range(1, len(seq.levels)):
        for k in range(n):
            owner_n = owners[n][0]
            bad = None
            lev_k = seq.levels[k]
            for psi in owners[k][1]:
                seen = {owner_n[cell] for cell in (G.mul(psi, f) for f in lev_k.F) if cell in owner_n}
                if len(seen) > 1:
                    bad = psi
                    break
            bundle.add(f"coherent.{k}<{n}", verdict(G, bad is None, counterexample=bad, window_radius=wr))
    bundle.add("cofinal", _check_cofinal(seq))
    return bundle


def _check_cofinal(seq: CccPrefix):
    G = seq.group
    rec = list(seq.cofinal)
    if len(rec) != len(seq.levels):
        return inconclusive(G, reason="record length mismatch")
    for n, lev in enumerate(seq.levels):
        if seq.cofinal_kind == "radius":
            ok = set(G.ball(rec[n])) <= set(lev.F)
        else:
            ok = prefix_count(G, lev.F) >= rec[n]
        if not ok:
            return verdict(G, False, counterexample=G.identity, failing_level=n, record=rec)
    inc = all(a < b for a, b in zip(rec, rec[1:]))
    return verdict(G, inc, counterexample=G.identity, record=rec)
