"""Concrete countable groups with canonical normal forms.

Elements are plain hashable Python values so they can live in sets and dicts:

* ``Zd``: a tuple of ``d`` ints
* ``Free``: a tuple of nonzero ints, ``i`` for the i-th generator and ``-i`` for
  its inverse, always freely reduced
* ``FiniteTable``: an int index into the multiplication table
* ``Product``: a pair ``(left, right)``

Every group carries a fixed enumeration ``g_0 = 1, g_1, ...``; ``rank`` is its
inverse and is the canonical total order used by all greedy constructions.
"""
from __future__ import annotations

import functools
import itertools
import json
from typing import Iterable, Iterator, Sequence


class GroupError(ValueError):
    pass


def _int_code(z: int) -> int:
    # 0, 1, -1, 2, -2, ... -> 0, 1, 2, 3, 4, ...
    return 2 * z - 1 if z > 0 else -2 * z


def _int_from_code(c: int) -> int:
    return (c + 1) // 2 if c % 2 else -(c // 2)


class Group:
    kind = "abstract"
    identity: object = None
    order: int | None = None  # None for infinite groups

    # arithmetic
    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def prod(self, *elts):
        out = self.identity
        for e in elts:
            out = self.mul(out, e)
        return out

    def conj(self, a, b):
        """a b a^-1"""
        return self.mul(self.mul(a, b), self.inv(a))

    # enumeration
    def rank(self, g) -> int:
        raise NotImplementedError

    def element(self, n: int):
        raise NotImplementedError

    def enumerate(self, count: int | None = None) -> Iterator:
        n = 0
        while (count is None or n < count) and (self.order is None or n < self.order):
            yield self.element(n)
            n += 1

    def sort(self, elts: Iterable) -> list:
        return sorted(elts, key=self.rank)

    # metric
    def norm(self, g) -> int:
        """Word length with respect to the fixed generating set."""
        raise NotImplementedError

    def ball(self, r: int) -> list:
        raise NotImplementedError

    def generators(self) -> list:
        raise NotImplementedError

    def validate(self, g) -> None:
        raise NotImplementedError

    def is_element(self, g) -> bool:
        try:
            self.validate(g)
        except GroupError:
            return False
        return True

    # text encoding
    def fmt(self, g) -> str:
        raise NotImplementedError

    def parse(self, s: str):
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError

    # set helpers
    def set_mul(self, xs: Iterable, ys: Iterable) -> set:
        ys = list(ys)
        mul = self.mul
        return {mul(x, y) for x in xs for y in ys}

    def set_inv(self, xs: Iterable) -> set:
        return {self.inv(x) for x in xs}

    def left_translate(self, g, xs: Iterable) -> set:
        mul = self.mul
        return {mul(g, x) for x in xs}

    def __eq__(self, other):
        return isinstance(other, Group) and self.descriptor() == other.descriptor()

    def __hash__(self):
        return hash(json.dumps(self.descriptor(), sort_keys=True))

    def __repr__(self):
        return f"{type(self).__name__}({json.dumps(self.descriptor()['params'])})"


class Zd(Group):
    kind = "Zd"

    def __init__(self, d: int = 1):
        if d < 1:
            raise GroupError("dimension must be positive")
        self.d = d
        self.identity = (0,) * d
        self.order = None

    def validate(self, g):
        if not isinstance(g, tuple) or len(g) != self.d or not all(isinstance(c, int) for c in g):
            raise GroupError(f"{g!r} is not an element of Z^{self.d}")

    def mul(self, a, b):
        if self.d == 1:
            return (a[0] + b[0],)
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def norm(self, g):
        return max(abs(c) for c in g)

    def ball(self, r):
        rng = range(-r, r + 1)
        return self.sort(itertools.product(rng, repeat=self.d))

    def generators(self):
        return self.ball(1)

    # Within an l-infinity shell, vectors are ordered lexicographically with
    # coordinates compared in the integer order 0, 1, -1, 2, -2, ...
    def rank(self, g):
        r = self.norm(g)
        if r == 0:
            return 0
        d = self.d
        if d == 1:
            return _int_code(g[0])
        below = (2 * r - 1) ** d
        pos = 0
        prefix_hits = False
        for i, c in enumerate(g):
            rest = d - i - 1
            for code in range(_int_code(c)):
                v = _int_from_code(code)
                if abs(v) > r:
                    continue
                hit = prefix_hits or abs(v) == r
                pos += (2 * r + 1) ** rest - (0 if hit else (2 * r - 1) ** rest)
            prefix_hits = prefix_hits or abs(c) == r
        return below + pos

    @functools.lru_cache(maxsize=64)
    def _shell(self, r):
        if r == 0:
            return [self.identity]
        key = lambda v: tuple(_int_code(c) for c in v)
        rng = range(-r, r + 1)
        return sorted((v for v in itertools.product(rng, repeat=self.d) if max(map(abs, v)) == r), key=key)

    def element(self, n):
        if n < 0:
            raise GroupError("negative index")
        if self.d == 1:
            return (_int_from_code(n),)
        r = 0
        while (2 * r + 1) ** self.d <= n:
            r += 1
        below = (2 * r - 1) ** self.d if r else 0
        return self._shell(r)[n - below]

    def fmt(self, g):
        return "(" + ",".join(str(c) for c in g) + ")"

    def parse(self, s):
        s = s.strip()
        if s.startswith("(") and s.endswith(")"):
            body = s[1:-1]
        elif self.d == 1:
            body = s
        else:
            raise GroupError(f"cannot parse {s!r} as an element of Z^{self.d}")
        try:
            g = tuple(int(p) for p in body.split(","))
        except ValueError:
            raise GroupError(f"cannot parse {s!r} as an element of Z^{self.d}") from None
        self.validate(g)
        return g

    def descriptor(self):
        return {"kind": "Zd", "params": {"d": self.d}}


# letters for free generators; "e" is reserved for the identity
_FREE_ALPHABET = "abcdfghijklmnopqrstuvwxyz"


class Free(Group):
    kind = "Free"

    def __init__(self, k: int = 2):
        if not 1 <= k <= len(_FREE_ALPHABET):
            raise GroupError(f"free rank must be in 1..{len(_FREE_ALPHABET)}")
        self.k = k
        self.identity = ()
        self.order = None
        # letter order a < A < b < B < ...
        self._letters = [s * i for i in range(1, k + 1) for s in (1, -1)]
        self._code = {x: j for j, x in enumerate(self._letters)}

    def validate(self, g):
        if not isinstance(g, tuple):
            raise GroupError(f"{g!r} is not a word")
        prev = 0
        for x in g:
            if not isinstance(x, int) or x == 0 or abs(x) > self.k:
                raise GroupError(f"{g!r} uses a letter outside the alphabet")
            if x == -prev:
                raise GroupError(f"{g!r} is not reduced")
            prev = x

    def mul(self, a, b):
        i = 0
        la, lb = len(a), len(b)
        while i < la and i < lb and a[la - 1 - i] == -b[i]:
            i += 1
        if i == 0:
            return a + b
        return a[: la - i] + b[i:]

    def inv(self, a):
        return tuple(-x for x in reversed(a))

    def norm(self, g):
        return len(g)

    def word_length(self, g):
        return len(g)

    def generators(self):
        return [()] + [(x,) for x in self._letters]

    def _count_upto(self, length):
        # number of reduced words of length < length
        if length <= 0:
            return 0
        k2 = 2 * self.k
        total = 1
        for l in range(1, length):
            total += k2 * (k2 - 1) ** (l - 1)
        return total

    def rank(self, g):
        L = len(g)
        base = self._count_upto(L)
        k2 = 2 * self.k
        pos = 0
        prev = 0
        for i, x in enumerate(g):
            rest = L - i - 1
            smaller = self._code[x]
            if prev and self._code[-prev] < self._code[x]:
                smaller -= 1
            pos += smaller * (k2 - 1) ** rest
            prev = x
        return base + pos

    def element(self, n):
        if n < 0:
            raise GroupError("negative index")
        k2 = 2 * self.k
        L = 0
        while self._count_upto(L + 1) <= n:
            L += 1
        pos = n - self._count_upto(L)
        word = []
        prev = 0
        for i in range(L):
            rest = L - i - 1
            block = (k2 - 1) ** rest
            j = pos // block
            pos -= j * block
            allowed = [x for x in self._letters if x != -prev]
            x = allowed[j]
            word.append(x)
            prev = x
        return tuple(word)

    def ball(self, r):
        out = [()]
        frontier = [()]
        for _ in range(r):
            nxt = []
            for w in frontier:
                last = w[-1] if w else 0
                for x in self._letters:
                    if x != -last:
                        nxt.append(w + (x,))
            out.extend(nxt)
            frontier = nxt
        return self.sort(out)

    def sphere(self, r):
        return [w for w in self.ball(r) if len(w) == r]

    def letter(self, x):
        ch = _FREE_ALPHABET[abs(x) - 1]
        return ch if x > 0 else ch.upper()

    def fmt(self, g):
        if not g:
            return "e"
        return "".join(self.letter(x) for x in g)

    def parse(self, s):
        s = s.strip()
        if s in ("e", "", "ε"):
            return ()
        word = ()
        for ch in s:
            idx = _FREE_ALPHABET.find(ch.lower())
            if idx < 0 or idx >= self.k:
                raise GroupError(f"letter {ch!r} is not a generator of F_{self.k}")
            x = idx + 1 if ch.islower() else -(idx + 1)
            word = self.mul(word, (x,))
        return word

    def descriptor(self):
        return {"kind": "Free", "params": {"k": self.k}}


class FiniteTable(Group):
    """Finite group from a Cayley table; index 0 must be the identity."""

    kind = "FiniteTable"

    def __init__(self, table: Sequence[Sequence[int]]):
        n = len(table)
        if n == 0:
            raise GroupError("empty table")
        self.table = tuple(tuple(int(v) for v in row) for row in table)
        if any(len(row) != n for row in self.table):
            raise GroupError("table is not square")
        if any(not 0 <= v < n for row in self.table for v in row):
            raise GroupError("table entry out of range")
        t = self.table
        if any(t[0][i] != i or t[i][0] != i for i in range(n)):
            raise GroupError("index 0 is not a two-sided identity")
        for a in range(n):
            for b in range(n):
                ab = t[a][b]
                for c in range(n):
                    if t[ab][c] != t[a][t[b][c]]:
                        raise GroupError(f"not associative at ({a},{b},{c})")
        self._inv = []
        for a in range(n):
            inv = [b for b in range(n) if t[a][b] == 0]
            if len(inv) != 1 or t[inv[0]][a] != 0:
                raise GroupError(f"element {a} has no unique inverse")
            self._inv.append(inv[0])
        self.identity = 0
        self.order = n

    @classmethod
    def cyclic(cls, n: int) -> "FiniteTable":
        return cls([[(i + j) % n for j in range(n)] for i in range(n)])

    def validate(self, g):
        if not isinstance(g, int) or not 0 <= g < self.order:
            raise GroupError(f"{g!r} is not an element of a group of order {self.order}")

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self._inv[a]

    def rank(self, g):
        return g

    def element(self, n):
        if not 0 <= n < self.order:
            raise GroupError(f"index {n} out of range for a group of order {self.order}")
        return n

    def norm(self, g):
        return 0 if g == 0 else 1

    def ball(self, r):
        return [0] if r == 0 else list(range(self.order))

    def generators(self):
        return list(range(self.order))

    def fmt(self, g):
        return f"#{g}"

    def parse(self, s):
        s = s.strip()
        if not s.startswith("#"):
            raise GroupError(f"finite elements are written #k, got {s!r}")
        try:
            g = int(s[1:])
        except ValueError:
            raise GroupError(f"cannot parse {s!r}") from None
        self.validate(g)
        return g

    def descriptor(self):
        return {"kind": "FiniteTable", "params": {"table": [list(r) for r in self.table]}}


def _pairs_before(s: int, p: int | None, q: int | None) -> int:
    """Number of index pairs (i, j), i < p, j < q, with i + j < s."""
    if p is None and q is None:
        return s * (s + 1) // 2
    if p is None:
        p, q = q, p
    # p finite now
    total = 0
    for i in range(min(p, s)):
        total += (s - i) if q is None else min(q, s - i)
    return total


class Product(Group):
    kind = "Product"

    def __init__(self, left: Group, right: Group):
        self.left = left
        self.right = right
        self.identity = (left.identity, right.identity)
        self.order = None if left.order is None or right.order is None else left.order * right.order

    def validate(self, g):
        if not isinstance(g, tuple) or len(g) != 2:
            raise GroupError(f"{g!r} is not a pair")
        self.left.validate(g[0])
        self.right.validate(g[1])

    def mul(self, a, b):
        return (self.left.mul(a[0], b[0]), self.right.mul(a[1], b[1]))

    def inv(self, a):
        return (self.left.inv(a[0]), self.right.inv(a[1]))

    def norm(self, g):
        return self.left.norm(g[0]) + self.right.norm(g[1])

    def generators(self):
        gens = [(s, self.right.identity) for s in self.left.generators()]
        gens += [(self.left.identity, s) for s in self.right.generators() if s != self.right.identity]
        return gens

    def ball(self, r):
        out = []
        for i in range(r + 1):
            lb = [a for a in self.left.ball(i) if self.left.norm(a) == i]
            rb = self.right.ball(r - i)
            out.extend((a, b) for a in lb for b in rb)
        return self.sort(out)

    # diagonal pairing: pairs (i, j) of component ranks by i + j, then by i
    def rank(self, g):
        i, j = self.left.rank(g[0]), self.right.rank(g[1])
        s = i + j
        q = self.right.order
        first = 0 if q is None else max(0, s - q + 1)
        return _pairs_before(s, self.left.order, q) + (i - first)

    def element(self, n):
        if n < 0 or (self.order is not None and n >= self.order):
            raise GroupError(f"index {n} out of range")
        p, q = self.left.order, self.right.order
        lo, hi = 0, 1
        while _pairs_before(hi + 1, p, q) <= n:
            hi *= 2
        # smallest s with pairs_before(s + 1) > n
        while lo < hi:
            mid = (lo + hi) // 2
            if _pairs_before(mid + 1, p, q) > n:
                hi = mid
            else:
                lo = mid + 1
        s = lo
        first = 0 if q is None else max(0, s - q + 1)
        i = first + (n - _pairs_before(s, p, q))
        return (self.left.element(i), self.right.element(s - i))

    def fmt(self, g):
        return f"<{self.left.fmt(g[0])}|{self.right.fmt(g[1])}>"

    def parse(self, s):
        s = s.strip()
        if not (s.startswith("<") and s.endswith(">")):
            raise GroupError(f"product elements are written <l|r>, got {s!r}")
        body = s[1:-1]
        depth = 0
        for i, ch in enumerate(body):
            if ch == "<":
                depth += 1
            elif ch == ">":
                depth -= 1
            elif ch == "|" and depth == 0:
                return (self.left.parse(body[:i]), self.right.parse(body[i + 1:]))
        raise GroupError(f"no top-level separator in {s!r}")

    def descriptor(self):
        return {"kind": "Product", "params": {"left": self.left.descriptor(), "right": self.right.descriptor()}}


def from_descriptor(desc) -> Group:
    if isinstance(desc, str):
        desc = json.loads(desc)
    try:
        kind = desc["kind"]
        params = desc.get("params", {})
    except (KeyError, TypeError, AttributeError):
        raise GroupError(f"malformed group descriptor {desc!r}") from None
    if kind == "Zd":
        return Zd(int(params.get("d", 1)))
    if kind == "Free":
        return Free(int(params.get("k", 2)))
    if kind == "FiniteTable":
        if "cyclic" in params:
            return FiniteTable.cyclic(int(params["cyclic"]))
        return FiniteTable(params["table"])
    if kind == "Product":
        return Product(from_descriptor(params["left"]), from_descriptor(params["right"]))
    raise GroupError(f"unknown group kind {kind!r}")


def word_length(G: Group, w) -> int:
    if not isinstance(G, Free):
        raise GroupError("word length is only defined here for free groups")
    return len(w)


def enumerate_prefix(G: Group, n: int) -> list:
    return list(G.enumerate(n))


def ball_sorted_layers(G: Group, r: int) -> list[list]:
    """ball(r) split into spheres, each in enumeration order."""
    layers: list[list] = [[] for _ in range(r + 1)]
    for g in G.ball(r):
        layers[G.norm(g)].append(g)
    return layers


Z = Zd(1)


def z(n: int) -> tuple:
    """Shorthand for the integer n as an element of Z."""
    return (n,)
