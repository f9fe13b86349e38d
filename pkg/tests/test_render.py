import pytest

from artifact.blueprint import build_blueprint, build_growth_sequence
from artifact.coloring import PartialColoring, Undetermined, constant, parity_z, window
from artifact.constructors import free_wordlength, morse_thue_z
from artifact.fundamental import build_fundamental
from artifact.groups import Free, Zd
from artifact.render import RenderError, dot_text, pgm_text


def rect(x0, x1, y0, y1):
    return [(x, y) for y in range(y0, y1 + 1) for x in range(x0, x1 + 1)]


def test_pgm_all_zero():
    G = Zd(2)
    text = pgm_text(window(constant(G, 0), rect(0, 2, 0, 2)))
    assert text == "P2\n3 3\n2\n0 0 0\n0 0 0\n0 0 0\n"


def test_pgm_vertical_stripes():
    G = Zd(2)
    text = pgm_text(window(parity_z(G), rect(0, 2, 0, 1)))
    assert text.splitlines()[3:] == ["0 2 0", "0 2 0"]


def test_pgm_rows_follow_y_downward():
    G = Zd(2)
    pc = PartialColoring(G, rect(0, 1, 0, 1), {(0, 0): 1, (1, 0): 0, (0, 1): 0})
    assert pgm_text(pc).splitlines()[3:] == ["2 0", "0 1"]


def test_pgm_rejects_non_rectangle():
    G = Zd(2)
    with pytest.raises(RenderError):
        pgm_text(PartialColoring(G, [(0, 0), (1, 1)], {}))
    with pytest.raises(RenderError):
        pgm_text(PartialColoring(Zd(1), [(0,)], {}))


def test_pgm_marks_exactly_the_fundamental_free_points():
    G = Zd(2)
    gs = build_growth_sequence(G, 2, [(0, 0), (1, 0), (2, 0)])
    fund = build_fundamental(build_blueprint(G, gs), {(0, 0): 1, (1, 0): 1, (2, 0): 0})
    FN = set(fund.bp.F[-1])
    box = [g for g in rect(-8, 8, -8, 8)]
    assert set(box) <= FN
    vals = {g: fund.values[g] for g in box if not isinstance(fund.values[g], Undetermined)}
    pc = PartialColoring(G, box, vals)
    rows = pgm_text(pc).splitlines()[3:]
    ones = {(x - 8, y - 8) for y, row in enumerate(rows) for x, v in enumerate(row.split()) if v == "1"}
    expected = {g for g in box if isinstance(fund.values[g], Undetermined)}
    assert ones == expected
    assert expected & set(fund.free_points())


def test_dot_radius_one():
    F = Free(2)
    pc = window(free_wordlength(morse_thue_z(), 2), F.ball(1))
    text = dot_text(pc, 1)
    assert text.count("[label=") == 9
    assert 'n0 [label="e=0"];' in text
    assert text.count("->") == 4 and all(line.startswith("  n0 ->") for line in text.splitlines() if "->" in line)


def test_dot_undefined_nodes_are_dashed():
    F = Free(2)
    pc = PartialColoring(F, F.ball(1), {(): 1})
    text = dot_text(pc, 1)
    assert text.count("style=dashed") == 4
    assert '"a=?"' in text


def test_dot_word_length_coloring_constant_on_spheres():
    F = Free(2)
    pc = window(free_wordlength(morse_thue_z(), 2), F.ball(2))
    text = dot_text(pc, 2)
    labels = [l.split('"')[1] for l in text.splitlines() if "label=" in l and "->" not in l]
    assert len(labels) == len(F.ball(2))
    by_len = {}
    for lab in labels:
        w, v = lab.split("=")
        by_len.setdefault(0 if w == "e" else len(w), set()).add(v)
    assert all(len(vs) == 1 for vs in by_len.values())


def test_dot_needs_free_group():
    with pytest.raises(RenderError):
        dot_text(PartialColoring(Zd(1), [(0,)], {}), 1)
