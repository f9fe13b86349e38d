import json

import pytest

from artifact.coloring import (Coloring, PartialColoring, Undetermined, WindowTooSmall, constant, conjugate,
                               from_function, parity_z, shift, spread3, window)
from artifact.groups import Free, Zd


def test_shift_moves_values_right():
    G = Zd(1)
    x = from_function(G, lambda g: int(g[0] == 0))
    y = shift((3,), x)
    assert y.value((3,)) == 1
    assert y.value((0,)) == 0


def test_shift_on_free_group_uses_left_action():
    F = Free(2)
    x = from_function(F, lambda w: int(F.fmt(w) == "a"))
    y = shift(F.parse("b"), x)
    assert y.value(F.parse("ba")) == 1
    assert y.value(F.parse("ab")) == 0


def test_conjugate_and_parity():
    x = parity_z()
    assert [x.value((i,)) for i in range(-2, 3)] == [0, 1, 0, 1, 0]
    assert [conjugate(x).value((i,)) for i in range(3)] == [1, 0, 1]


def test_spread3():
    x = spread3(constant(Zd(1), 1))
    assert [x.value((i,)) for i in range(-3, 4)] == [1, 0, 0, 1, 0, 0, 1]


def test_undetermined_has_no_truth_value():
    with pytest.raises(TypeError):
        bool(Undetermined(level=2))


def test_value_raises_on_undetermined():
    x = Coloring(Zd(1), lambda g: Undetermined(level=1) if g[0] > 5 else 0)
    assert x.value((5,)) == 0
    with pytest.raises(WindowTooSmall):
        x.value((6,))


def test_partial_coloring_json_round_trip():
    G = Zd(2)
    W = G.ball(1)
    pc = PartialColoring(G, W, {(0, 0): 1, (1, 0): 0})
    obj = json.loads(pc.dumps())
    assert obj["window"][0] == "(0,0)"
    assert obj["values"] == [["(0,0)", 1], ["(1,0)", 0]]
    back = PartialColoring.from_json(obj)
    assert back.values == pc.values and set(back.window) == set(W)
    assert back.dumps() == pc.dumps()


def test_partial_coloring_rejects_values_outside_window():
    with pytest.raises(ValueError):
        PartialColoring(Zd(1), [(0,)], {(1,): 0})


def test_completion_fills_undefined_only():
    G = Zd(1)
    pc = PartialColoring(G, G.ball(1), {(0,): 0})
    c = pc.completion(1)
    assert [c.value((i,)) for i in (-1, 0, 1)] == [1, 0, 1]
    assert isinstance(c.eval((2,)), Undetermined)


def test_window_drops_undetermined_cells():
    G = Zd(1)
    x = Coloring(G, lambda g: Undetermined() if g[0] == 1 else 1)
    pc = window(x, G.ball(1))
    assert pc.undefined() == [(1,)]
