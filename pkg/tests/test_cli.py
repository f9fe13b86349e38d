import json

import pytest

from artifact.cli import main



@pytest.fixture
def sub_window(tmp_path):
    out = tmp_path / "sub.json"
    params = {"ctor": "substitution_z", "alpha": "000", "level": 3, "window_radius": 200}
    assert main(["color-build", "--params", json.dumps(params), "--out", str(out)]) == 0
    return out


def test_group_command(tmp_path, capsys):
    assert main(["group", "--group", '{"kind":"Free","params":{"k":2}}', "--window-radius", "1"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["ball"] == ["e", "a", "A", "b", "B"]


def test_color_build_writes_partial_coloring(sub_window):
    obj = json.loads(sub_window.read_text())
    assert obj["group"] == {"kind": "Zd", "params": {"d": 1}}
    assert len(obj["window"]) == 401 and len(obj["values"]) == 401


def test_color_verify_blocking(sub_window, tmp_path):
    out = tmp_path / "rep.json"
    code = main(["color-verify", str(sub_window), "--params", '{"prop":"blocking","s":"1","r_max":12}',
                 "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["status"] == "ConfirmedOnWindow"


def test_color_verify_identity_shift_is_spec_error(sub_window):
    assert main(["color-verify", str(sub_window), "--params", '{"prop":"blocking","s":"0","r_max":12}']) == 64


def test_color_verify_window_too_small(sub_window):
    code = main(["color-verify", str(sub_window), "--params", '{"prop":"blocking","s":"1","r_max":12}',
                 "--window-radius", "200"])
    assert code == 3


def test_color_verify_refuted_and_inconclusive(tmp_path):
    out = tmp_path / "par.json"
    assert main(["color-build", "--params", '{"ctor":"parity"}', "--window-radius", "20", "--out", str(out)]) == 0
    assert main(["color-verify", str(out), "--params", '{"prop":"blocking","s":"2","T":["0","1"]}']) == 1
    assert main(["color-verify", str(out), "--params", '{"prop":"blocking","s":"2","r_max":3}']) == 2


def test_spec_file_and_flag_precedence(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"ctor": "parity", "window_radius": 50}))
    out = tmp_path / "p.json"
    assert main(["color-build", "--spec", str(spec), "--window-radius", "2", "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())["window"]) == 5


def test_bad_arguments_exit_64(tmp_path):
    assert main(["nonsense"]) == 64
    assert main(["color-build", "--params", '{"ctor":"nope"}']) == 64
    assert main(["color-verify", str(tmp_path / "missing.json"), "--params", '{"prop":"blocking","s":"1"}']) == 64


def test_cell_cap(monkeypatch):
    monkeypatch.setenv("SUBSHIFT_FORGE_MAX_CELLS", "100")
    assert main(["color-build", "--params", '{"ctor":"parity"}', "--window-radius", "60"]) == 64


def test_tile_build_and_verify(tmp_path):
    out = tmp_path / "t.json"
    assert main(["tile-build", "--params", '{"kind":"rf","m":2,"N":4}', "--out", str(out)]) == 0
    rep = tmp_path / "r.json"
    assert main(["tile-verify", str(out), "--window-radius", "32", "--out", str(rep)]) == 0
    assert all(v["status"] == "ConfirmedOnWindow" for v in json.loads(rep.read_text()).values())


def test_fm_pipeline(tmp_path):
    bp = tmp_path / "bp.json"
    fm = tmp_path / "fm.json"
    fmb = tmp_path / "fmb.json"
    assert main(["blueprint-build", "--params", '{"N":2,"seed":["0","1","2"],"targets":"none"}',
                 "--out", str(bp)]) == 0
    assert main(["blueprint-verify", str(bp), "--exact-rho-bound", "20"]) == 0
    assert main(["fm-build", str(bp), "--params", '{"R":[["0",1],["1",1],["2",0]]}', "--out", str(fm)]) == 0
    assert main(["fm-extend", str(fm), "--params", '{"op":"orth","tau":"10"}', "--out", str(fmb)]) == 0
    assert main(["fm-verify", str(fmb)]) == 0
    assert main(["fm-extend", str(fm), "--params", '{"op":"block","S":["0"]}']) == 64


def test_render_commands(tmp_path, capsys):
    pc = tmp_path / "p2.json"
    assert main(["color-build", "--group", '{"kind":"Zd","params":{"d":2}}', "--params", '{"ctor":"parity"}',
                 "--window-radius", "1", "--out", str(pc)]) == 0
    capsys.readouterr()
    assert main(["render", str(pc), "--format", "pgm"]) == 0
    assert capsys.readouterr().out == "P2\n3 3\n2\n2 0 2\n2 0 2\n2 0 2\n"
    assert main(["render", str(pc), "--format", "dot"]) == 64


def test_artifacts_are_byte_stable(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["tile-build", "--params", '{"kind":"free","k":2,"N":4}', "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
