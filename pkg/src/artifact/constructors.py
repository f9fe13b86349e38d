"""Explicit colorings: substitution family on Z, Morse-Thue, induced and product
colorings, word-length colorings on free groups, residual parity colorings."""
from __future__ import annotations

from typing import Sequence

from .coloring import Coloring, Undetermined, conjugate, constant, parity_z, spread3
from .groups import FiniteTable, Free, Group, GroupError, Product, Zd, from_descriptor

_FLIP = bytes.maketrans(b"\x00\x01", b"\x01\x00")

# block layouts of the two substitutions: 0 marks p, 1 marks its conjugate
PHI_BLOCKS = {
    0: (0, 0, 1, 0, 0, 1, 0),
    1: (1, 0, 1, 0, 1, 0, 1),
}


class Pattern:
    """Binary word on the centered interval [-k, k]."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        if isinstance(bits, str):
            bits = bytes(int(c) for c in bits)
        bits = bytes(bits)
        if len(bits) % 2 == 0:
            raise ValueError("a centered pattern has odd length")
        if any(b > 1 for b in bits):
            raise ValueError("pattern values must be bits")
        self.bits = bits

    @property
    def radius(self) -> int:
        return (len(self.bits) - 1) // 2

    def __len__(self):
        return len(self.bits)

    def __getitem__(self, k: int) -> int:
        r = self.radius
        if not -r <= k <= r:
            raise IndexError(k)
        return self.bits[k + r]

    def domain(self) -> range:
        return range(-self.radius, self.radius + 1)

    def conjugate(self) -> "Pattern":
        return Pattern(self.bits.translate(_FLIP))

    def word(self) -> str:
        return "".join("01"[b] for b in self.bits)

    def refines(self, q: "Pattern") -> bool:
        """Whether q is a union of |self|-aligned blocks of self or its conjugate.

        Both are centered, so the blocks of q sit at offsets that are
        multiples of |self| from the center block.
        """
        n, m = len(self), len(q)
        if m % n:
            return False
        bar = self.conjugate().bits
        return all(q.bits[i:i + n] in (self.bits, bar) for i in range(0, m, n))

    def __eq__(self, other):
        return isinstance(other, Pattern) and self.bits == other.bits

    def __hash__(self):
        return hash(self.bits)

    def __repr__(self):
        w = self.word()
        return f"Pattern({w if len(w) <= 60 else w[:57] + '...'})"


def phi(p: Pattern, i: int) -> Pattern:
    """Seven-block substitution; the central block is always p itself."""
    bar = p.bits.translate(_FLIP)
    return Pattern(b"".join(bar if f else p.bits for f in PHI_BLOCKS[i]))


# -- the substitution family on Z ---------------------------------------------

_CACHE_LEVEL = 5  # level-5 words have 21^5 ~ 4.1M cells


class SubstitutionSystem:
    """The system p_u along one branch alpha.

    Level n is three blocks of length 7|p_{n-1}|: two copies of
    phi(p_{n-1}, alpha(n-1)) followed by a third copy, conjugated when needed
    so that the cell just right of the middle block differs from the cell n
    places to its left.  That forced disagreement at distance n is what makes
    shifts by n visible.  Level lengths are 21^n.
    """

    def __init__(self, alpha: str, periodic: bool = False):
        if not alpha or any(c not in "01" for c in alpha):
            raise ValueError("alpha must be a nonempty bit string")
        self.alpha = alpha
        self.periodic = periodic
        self._flags: dict[int, int] = {}
        self._words: dict[int, bytes] = {0: b"\x00"}

    def bit(self, n: int) -> int:
        """Symbol used to pass from level n-1 to level n (n >= 1)."""
        if self.periodic:
            return int(self.alpha[(n - 1) % len(self.alpha)])
        if n > len(self.alpha):
            raise IndexError(f"level {n} exceeds the branch length {len(self.alpha)}")
        return int(self.alpha[n - 1])

    @staticmethod
    def length(n: int) -> int:
        return 21 ** n

    @staticmethod
    def radius(n: int) -> int:
        return (21 ** n - 1) // 2

    def _phi_value(self, n: int, rel: int) -> int:
        """phi(p_{n-1}, alpha(n-1)) at centered position rel."""
        Lp = 21 ** (n - 1)
        half = (7 * Lp - 1) // 2
        off = rel + half
        j, sub = divmod(off, Lp)
        return self.value(n - 1, sub - (Lp - 1) // 2) ^ PHI_BLOCKS[self.bit(n)][j]

    def flag(self, n: int) -> int:
        """1 when the right block of level n is conjugated."""
        f = self._flags.get(n)
        if f is None:
            Lp = 21 ** (n - 1)
            M = 7 * Lp
            K = (M - 1) // 2
            first = self.value(n - 1, -((Lp - 1) // 2)) ^ PHI_BLOCKS[self.bit(n)][0]
            f = 1 if first == self._phi_value(n, K + 1 - n) else 0
            self._flags[n] = f
        return f

    def word(self, n: int) -> bytes:
        w = self._words.get(n)
        if w is None:
            if n > _CACHE_LEVEL:
                raise ValueError(f"level {n} is too long to materialize")
            prev = self.word(n - 1)
            bar = prev.translate(_FLIP)
            ph = b"".join(bar if f else prev for f in PHI_BLOCKS[self.bit(n)])
            right = ph.translate(_FLIP) if self.flag(n) else ph
            w = ph + ph + right
            self._words[n] = w
        return w

    def value(self, n: int, k: int) -> int:
        if n <= _CACHE_LEVEL and (n in self._words or n <= 3):
            return self.word(n)[k + self.radius(n)]
        if n == 0:
            return 0
        M = 7 * 21 ** (n - 1)
        K = (M - 1) // 2
        if k > K:
            return self._phi_value(n, k - M) ^ self.flag(n)
        if k < -K:
            return self._phi_value(n, k + M)
        return self._phi_value(n, k)

    def pattern(self, n: int) -> Pattern:
        return Pattern(self.word(n))

    def level_for(self, k: int) -> int:
        n = 0
        while abs(k) > self.radius(n):
            n += 1
        return n


def substitution_family_z(alpha: str, N: int, extend: str | None = None):
    """Returns (p_{alpha|N}, coloring).

    Without ``extend`` the coloring is p_{alpha|N} on its domain and
    Undetermined elsewhere.  With ``extend="periodic"`` alpha is repeated
    forever and the coloring is the full limit point on Z.
    """
    if extend not in (None, "periodic"):
        raise ValueError(f"unknown extension mode {extend!r}")
    periodic = extend == "periodic"
    if not periodic and N > len(alpha):
        raise ValueError("level exceeds the branch length")
    system = SubstitutionSystem(alpha, periodic=periodic)
    G = Zd(1)
    ident = {"ctor": "substitution_z", "alpha": alpha, "level": N}
    if periodic:
        ident["extend"] = "periodic"
        # nested levels agree, so one materialized word answers every cell it covers
        top = system.word(_CACHE_LEVEL)
        R = (len(top) - 1) // 2

        def fn(g):
            k = g[0]
            if -R <= k <= R:
                return top[k + R]
            return system.value(max(N, system.level_for(k)), k)
    else:
        R = system.radius(N)
        top = system.word(N) if N <= _CACHE_LEVEL else None

        def fn(g):
            k = g[0]
            if -R <= k <= R:
                return top[k + R] if top is not None else system.value(N, k)
            return Undetermined(level=N, reason="outside pattern")

    pattern = system.pattern(N) if N <= _CACHE_LEVEL else None
    x = Coloring(G, fn, ident, memo=False)
    x.system = system
    return pattern, x


# -- Morse-Thue -----------------------------------------------------------------

def morse_thue_bit(n: int) -> int:
    return bin(abs(n)).count("1") & 1


def morse_thue_z() -> Coloring:
    """Two-sided Morse-Thue: binary digit-sum parity of |n|."""
    return Coloring(Zd(1), lambda g: morse_thue_bit(g[0]), {"ctor": "morse_thue"}, memo=False)


# -- induced colorings from a finite-index subgroup ----------------------------

def _mod_vec(g, m):
    return tuple(c % m for c in g)


def kappa(G: Group, m: int | Sequence, reps: Sequence, xs: Sequence[Coloring]) -> Coloring:
    """Glue colorings of a finite-index subgroup H along a left transversal.

    On Z^d, H = mZ^d is passed as the integer m and each x_i is a coloring of
    Z^d read through h -> h/m.  On a finite table group, H is passed as its
    element list and each x_i is evaluated directly on elements of H.
    ``xs`` shorter than ``reps`` is padded by repeating its last entry.
    """
    reps = list(reps)
    xs = list(xs)
    if not 1 < len(xs) <= len(reps):
        raise ValueError("need between 2 and [G:H] colorings")
    xs = xs + [xs[-1]] * (len(reps) - len(xs))
    if reps[0] != G.identity:
        raise ValueError("the first representative must be the identity")
    if isinstance(G, Zd):
        if not isinstance(m, int) or m < 2:
            raise ValueError("sublattice index base must be an integer >= 2")
        classes = {}
        for i, a in enumerate(reps):
            c = _mod_vec(a, m)
            if c in classes:
                raise ValueError(f"representatives {G.fmt(reps[classes[c]])} and {G.fmt(a)} share a coset")
            classes[c] = i
        if len(classes) != m ** G.d:
            raise ValueError("representatives miss a coset")

        def fn(g):
            i = classes[_mod_vec(g, m)]
            h = tuple((c - a) // m for c, a in zip(g, reps[i]))
            return xs[i].eval(h)

        ident = {"ctor": "kappa", "m": m, "reps": [G.fmt(a) for a in reps]}
    elif isinstance(G, FiniteTable):
        H = set(m)
        if G.identity not in H or any(G.mul(a, b) not in H for a in H for b in H):
            raise ValueError("H is not a subgroup")
        lookup = {}
        for i, a in enumerate(reps):
            for h in H:
                g = G.mul(a, h)
                if g in lookup:
                    raise ValueError("representatives overlap")
                lookup[g] = (i, h)
        if len(lookup) != G.order:
            raise ValueError("representatives miss a coset")

        def fn(g):
            i, h = lookup[g]
            return xs[i].eval(h)

        ident = {"ctor": "kappa", "H": sorted(H), "reps": list(reps)}
    else:
        raise ValueError("kappa supports Z^d sublattices and finite table groups")
    return Coloring(G, fn, ident, memo=False)


# -- products and quotient extensions ------------------------------------------

def product(x: Coloring, y: Coloring, z: Coloring | None = None) -> Coloring:
    """(xy)(g,h) = x(g)y(h); with z, x(g)y(h) + z(g)(1-y(h))."""
    P = Product(x.group, y.group)
    if z is not None and z.group != x.group:
        raise ValueError("z must live on the same group as x")

    def fn(gh):
        g, h = gh
        yh = y.eval(h)
        if isinstance(yh, Undetermined):
            return yh
        if yh == 1:
            return x.eval(g)
        return z.eval(g) if z is not None else 0

    ident = {"ctor": "product", "x": x.ident, "y": y.ident}
    if z is not None:
        ident["z"] = z.ident
    return Coloring(P, fn, ident, memo=False)


def quotient_extension(G: Zd, m: int, z: dict, ys: Sequence[Coloring]) -> Coloring:
    """x(g) = y_{z(g mod m)}((g - g mod m)/m) for H = mZ^d.

    ``z`` maps coset representatives (coordinates in [0, m)) to indices into
    ``ys``; cosets it does not cover evaluate to Undetermined.
    """
    if not isinstance(G, Zd):
        raise ValueError("quotient extension is implemented for Z^d")
    ys = list(ys)
    zz = {}
    for c, i in z.items():
        c = tuple(c) if not isinstance(c, int) else (c,)
        if len(c) != G.d or any(not 0 <= v < m for v in c):
            raise ValueError(f"{c!r} is not a reduced coset representative")
        if not 0 <= i < len(ys):
            raise ValueError(f"color {i} has no coloring")
        zz[c] = i

    def fn(g):
        sigma = _mod_vec(g, m)
        i = zz.get(sigma)
        if i is None:
            return Undetermined(reason="coset outside z")
        return ys[i].eval(tuple((a - b) // m for a, b in zip(g, sigma)))

    return Coloring(G, fn, {"ctor": "quotient", "m": m}, memo=False)


# -- free groups ------------------------------------------------------------------

def free_wordlength(x: Coloring, k: int = 2) -> Coloring:
    """x*(w) = x(|w|)"""
    F = Free(k)
    return Coloring(F, lambda w: x.eval((len(w),)), {"ctor": "free_wordlength", "k": k, "of": x.ident}, memo=False)


# -- residually finite parity -----------------------------------------------------

def valuation(g: Sequence[int], m: int) -> int | None:
    """Largest n with g in m^n Z^d; None for the identity."""
    best = None
    for c in g:
        if c == 0:
            continue
        v = 0
        while c % m == 0:
            c //= m
            v += 1
        best = v if best is None else min(best, v)
    return best


def rf_parity(m: int = 2, d: int = 1) -> Coloring:
    """x(g) = n mod 2 for g in K_n - K_{n+1}, K_n = m^n Z^d; x(0) = 0."""
    G = Zd(d)

    def fn(g):
        v = valuation(g, m)
        return 0 if v is None else v & 1

    return Coloring(G, fn, {"ctor": "rf_parity", "m": m, "d": d}, memo=False)


def rf_parity_witness(s, m: int = 2) -> list:
    """Blocking witness T = T0 T1 for rf_parity on Z.

    With s in K_n - K_{n+1}, T0 lists coset representatives of K_{n+1} and T1
    representatives of K_{n+3} in K_{n+1}; the sum set is [0, m^{n+3}).
    """
    n = valuation(s, m)
    if n is None:
        raise ValueError("identity has no blocking witness")
    T0 = range(m ** (n + 1))
    T1 = [j * m ** (n + 1) for j in range(m ** 2)]
    return sorted({(a + b,) for a in T0 for b in T1})


# -- finite groups ------------------------------------------------------------------

def finite_group_coloring(G: FiniteTable) -> Coloring:
    """0 at the identity, 1 elsewhere."""
    return Coloring(G, lambda g: 0 if g == G.identity else 1, {"ctor": "finite_group"}, memo=False)


def indicator(G: Group, elements) -> Coloring:
    S = frozenset(elements)
    return Coloring(G, lambda g: 1 if g in S else 0, {"ctor": "indicator", "size": len(S)}, memo=False)


# -- JSON constructor specs ---------------------------------------------------------

def from_spec(spec: dict) -> Coloring:
    """Build a coloring from a constructor spec such as
    {"ctor": "substitution_z", "alpha": "0101", "level": 3}."""
    if not isinstance(spec, dict) or "ctor" not in spec:
        raise ValueError("constructor spec needs a 'ctor' field")
    ctor = spec["ctor"]
    group = from_descriptor(spec["group"]) if "group" in spec else None
    if ctor == "constant":
        return constant(group or Zd(1), int(spec.get("value", 0)))
    if ctor == "parity":
        return parity_z(group or Zd(1))
    if ctor == "morse_thue":
        return morse_thue_z()
    if ctor == "substitution_z":
        alpha = str(spec["alpha"])
        level = int(spec.get("level", len(alpha)))
        return substitution_family_z(alpha, level, spec.get("extend"))[1]
    if ctor == "rf_parity":
        return rf_parity(int(spec.get("m", 2)), int(spec.get("d", 1)))
    if ctor == "free_wordlength":
        return free_wordlength(from_spec(spec.get("of", {"ctor": "morse_thue"})), int(spec.get("k", 2)))
    if ctor == "conjugate":
        return conjugate(from_spec(spec["of"]))
    if ctor == "spread3":
        return spread3(from_spec(spec["of"]))
    if ctor == "finite_group":
        if not isinstance(group, FiniteTable):
            raise ValueError("finite_group needs a FiniteTable group")
        return finite_group_coloring(group)
    if ctor == "kappa":
        G = group or Zd(1)
        reps = [G.parse(r) for r in spec["reps"]]
        return kappa(G, int(spec["m"]), reps, [from_spec(s) for s in spec["xs"]])
    if ctor == "product":
        z = from_spec(spec["z"]) if "z" in spec else None
        return product(from_spec(spec["x"]), from_spec(spec["y"]), z)
    if ctor == "quotient":
        G = group or Zd(1)
        z = {tuple(G.parse(k)): int(v) for k, v in spec["z"].items()}
        return quotient_extension(G, int(spec["m"]), z, [from_spec(s) for s in spec["ys"]])
    raise ValueError(f"unknown constructor {ctor!r}")
