"""Total lazy colorings, finite partial colorings, and the shift action."""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .groups import Group, Zd, from_descriptor


@dataclass(frozen=True)
class Undetermined:
    """Third evaluation status: the value lies beyond what a prefix fixes."""

    level: int | None = None
    reason: str = "horizon"

    def __bool__(self):
        raise TypeError("Undetermined has no truth value; check for it explicitly")


def is_undetermined(v) -> bool:
    return isinstance(v, Undetermined)


class WindowTooSmall(RuntimeError):
    """A check needed a value the coloring cannot supply."""

    def __init__(self, element, status: Undetermined | None = None, text: str | None = None):
        self.element = element
        self.status = status
        super().__init__(text or f"undetermined value at {element!r} ({status})")


class Coloring:
    """A point of 2^G given by an evaluator.

    ``ident`` names the constructor and its parameters; it is informational and
    goes into JSON dumps.  The memo is guarded by a lock so evaluation may be
    shared across threads.
    """

    def __init__(self, group: Group, fn: Callable, ident: dict | str | None = None, memo: bool = True):
        self.group = group
        self._fn = fn
        self.ident = ident if ident is not None else "anonymous"
        self._memo: dict | None = {} if memo else None
        self._lock = threading.Lock()

    def eval(self, g):
        memo = self._memo
        if memo is None:
            return self._fn(g)
        with self._lock:
            if g in memo:
                return memo[g]
        v = self._fn(g)
        with self._lock:
            memo[g] = v
        return v

    __call__ = eval

    def value(self, g) -> int:
        """Like eval but raises WindowTooSmall instead of returning Undetermined."""
        v = self.eval(g)
        if isinstance(v, Undetermined):
            raise WindowTooSmall(g, v)
        return v

    def without_memo(self) -> "Coloring":
        return Coloring(self.group, self._fn, self.ident, memo=False)

    def __repr__(self):
        return f"Coloring({self.ident})"


def constant(G: Group, bit: int) -> Coloring:
    return Coloring(G, lambda g: bit, {"ctor": "constant", "value": bit}, memo=False)


def parity_z(G: Group | None = None) -> Coloring:
    """x(n) = n mod 2 on Z, or parity of the first coordinate on Z^d."""
    G = G or Zd(1)
    return Coloring(G, lambda g: g[0] % 2, {"ctor": "parity"}, memo=False)


def from_function(G: Group, fn: Callable, name: str = "function") -> Coloring:
    return Coloring(G, fn, {"ctor": name})


def shift(g, x: Coloring) -> Coloring:
    """(g.x)(h) = x(g^-1 h)"""
    G = x.group
    ginv = G.inv(g)
    if g == G.identity:
        return x
    return Coloring(G, lambda h: x.eval(G.mul(ginv, h)), {"ctor": "shift", "by": G.fmt(g), "of": x.ident})


def conjugate(x: Coloring) -> Coloring:
    def fn(h):
        v = x.eval(h)
        return v if isinstance(v, Undetermined) else 1 - v

    return Coloring(x.group, fn, {"ctor": "conjugate", "of": x.ident}, memo=False)


def spread3(x: Coloring) -> Coloring:
    """x'(3n) = x(n) and x'(m) = 0 when 3 does not divide m."""
    G = x.group
    if not (isinstance(G, Zd) and G.d == 1):
        raise ValueError("spread3 is defined on Z only")

    def fn(g):
        n = g[0]
        return x.eval((n // 3,)) if n % 3 == 0 else 0

    return Coloring(G, fn, {"ctor": "spread3", "of": x.ident}, memo=False)


@dataclass
class PartialColoring:
    """A finite window with values on a subset of it; the rest is undefined."""

    group: Group
    window: list
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        seen = set()
        win = []
        for g in self.window:
            if g not in seen:
                seen.add(g)
                win.append(g)
        self.window = win
        self._window_set = seen
        for g, v in self.values.items():
            if g not in seen:
                raise ValueError(f"value at {g!r} lies outside the window")
            if v not in (0, 1):
                raise ValueError(f"value {v!r} at {g!r} is not a bit")

    def __contains__(self, g):
        return g in self._window_set

    def is_defined(self, g) -> bool:
        return g in self.values

    def undefined(self) -> list:
        return [g for g in self.window if g not in self.values]

    def get(self, g):
        if g in self.values:
            return self.values[g]
        return Undetermined(reason="undefined" if g in self._window_set else "outside window")

    def as_coloring(self) -> Coloring:
        return Coloring(self.group, self.get, {"ctor": "partial", "size": len(self.window)}, memo=False)

    def completion(self, fill: int | Callable = 0) -> Coloring:
        """Total coloring on the window: undefined cells get ``fill``."""
        vals = self.values
        win = self._window_set

        def fn(g):
            if g in vals:
                return vals[g]
            if g in win:
                return fill(g) if callable(fill) else fill
            return Undetermined(reason="outside window")

        return Coloring(self.group, fn, {"ctor": "completion", "fill": fill if not callable(fill) else "custom"}, memo=False)

    def to_json(self) -> dict:
        G = self.group
        win = G.sort(self.window)
        return {
            "group": G.descriptor(),
            "window": [G.fmt(g) for g in win],
            "values": [[G.fmt(g), self.values[g]] for g in win if g in self.values],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def from_json(cls, obj) -> "PartialColoring":
        if isinstance(obj, str):
            obj = json.loads(obj)
        G = from_descriptor(obj["group"])
        window = [G.parse(s) for s in obj["window"]]
        values = {}
        for s, v in obj.get("values", []):
            values[G.parse(s)] = int(v)
        return cls(G, window, values)


def window(x: Coloring, W: Iterable) -> PartialColoring:
    """Restrict x to W; undetermined cells become undefined."""
    W = list(W)
    vals = {}
    for g in W:
        v = x.eval(g)
        if not isinstance(v, Undetermined):
            vals[g] = v
    return PartialColoring(x.group, W, vals)
