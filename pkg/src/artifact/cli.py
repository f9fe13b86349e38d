"""Command-line front end: build, verify and render.

Every command reads an optional JSON parameter file (--spec) and positional
input artifacts, and writes one JSON (or PGM/DOT) artifact.  Flags override
spec fields, which override defaults.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from . import blueprint as bpm
from . import fundamental as fm
from . import tilings
from .coloring import PartialColoring, WindowTooSmall, window
from .constructors import from_spec
from .groups import GroupError, Zd, from_descriptor
from .render import RenderError, dot_text, pgm_text
from .verifier import (EXIT_SPEC_ERROR, EXIT_WINDOW_TOO_SMALL, SpecError,
                       check_aperiodic, check_blocking, check_minimality, check_orthogonality, check_slender,
                       check_strong_blocking, verdict)

DEFAULT_MAX_CELLS = 2_000_000


class CliError(Exception):
    pass


def max_cells() -> int:
    raw = os.environ.get("SUBSHIFT_FORGE_MAX_CELLS")
    if raw is None:
        return DEFAULT_MAX_CELLS
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"SUBSHIFT_FORGE_MAX_CELLS must be an integer, got {raw!r}") from None


def capped_ball(G, r: int) -> list:
    cap = max_cells()
    if isinstance(G, Zd) and (2 * r + 1) ** G.d > cap:
        raise CliError(f"window of radius {r} exceeds the cell cap {cap}")
    ball = G.ball(r)
    if len(ball) > cap:
        raise CliError(f"window of radius {r} exceeds the cell cap {cap}")
    return ball


def write_atomic(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=False) + "\n"


def load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise CliError(f"cannot read {path}: {err}") from None


def param(args, spec: dict, name: str, default=None):
    flag = getattr(args, name, None)
    if flag is not None:
        return flag
    return spec.get(name, default)


def need_inputs(args, n: int) -> list:
    if len(args.inputs) < n:
        raise CliError(f"{args.command} needs {n} input file(s)")
    return [load_json(p) for p in args.inputs[:n]]


# -- commands ---------------------------------------------------------------------------

def cmd_group(args, spec):
    desc = param(args, spec, "group")
    if desc is None:
        raise CliError("group descriptor required")
    G = from_descriptor(desc)
    r = int(param(args, spec, "window_radius", 1))
    ball = capped_ball(G, r)
    return dump({"group": G.descriptor(), "radius": r, "size": len(ball), "ball": [G.fmt(g) for g in ball]}), 0


def cmd_color_build(args, spec):
    ctor = dict(spec)
    if args.group is not None:
        ctor["group"] = args.group
    r = ctor.pop("window_radius", None)
    r = int(args.window_radius if args.window_radius is not None else (r if r is not None else 10))
    x = from_spec(ctor)
    return window(x, capped_ball(x.group, r)).dumps() + "\n", 0


def _elements(G, spec, key, default=None):
    raw = spec.get(key, default)
    if raw is None:
        return None
    return [G.parse(str(t)) for t in raw]


def _margin_window(pc: PartialColoring, reach: int) -> list:
    """Window elements whose radius-``reach`` neighborhood stays in the window."""
    G = pc.group
    inside = set(pc.window)
    nb = G.ball(reach)
    return [g for g in pc.window if all(G.mul(g, t) in inside for t in nb)]


def cmd_color_verify(args, spec):
    (obj,) = need_inputs(args, 1)
    pc = PartialColoring.from_json(obj)
    G = pc.group
    x = pc.as_coloring()
    prop = spec.get("prop")
    T = _elements(G, spec, "T")
    r_max = spec.get("r_max")
    cand = spec.get("candidates", "ball")
    threads = int(param(args, spec, "threads", 1))
    wr = param(args, spec, "window_radius")
    s = G.parse(str(spec["s"])) if "s" in spec else None
    if prop in ("blocking", "aperiodic", "strong_blocking") and s is None:
        raise CliError(f"{prop} needs a shift s")
    if s is not None and s == G.identity:
        raise SpecError("the identity shift cannot be blocked")
    if wr is not None:
        W = int(wr)
    else:
        reach = max((G.norm(t) for t in T), default=0) if T else int(r_max or 0)
        reach += G.norm(s) if s is not None else 0
        W = _margin_window(pc, reach)
    if prop == "blocking":
        rep = check_blocking(x, s, W, T=T, exceptional=_elements(G, spec, "exceptional"), r_max=r_max,
                             candidates=cand, minimize=bool(spec.get("minimize")), threads=threads)
    elif prop == "orthogonality":
        if len(args.inputs) < 2:
            raise CliError("orthogonality needs two colorings")
        y = PartialColoring.from_json(load_json(args.inputs[1])).as_coloring()
        rep = check_orthogonality(x, y, W, T=T, r_max=r_max, candidates=cand, threads=threads)
    elif prop == "minimality":
        A = _elements(G, spec, "A")
        if not A:
            raise CliError("minimality needs a pattern domain A")
        rep = check_minimality(x, A, W, T=T, r_max=r_max, candidates=cand, threads=threads)
    elif prop == "aperiodic":
        rep = check_aperiodic(x, s, W)
    elif prop == "strong_blocking":
        count = check_strong_blocking(x, s, W)
        rep = verdict(G, count >= 1, disagreements=count)
    elif prop == "slender":
        members = {g for g, v in pc.values.items() if v == 1}
        rep = check_slender(members, W, T=T, r_max=r_max, group=G, candidates=cand)
    else:
        raise CliError(f"unknown property {prop!r}")
    return rep.dumps() + "\n", rep.exit_code


def cmd_tile_build(args, spec):
    kind = spec.get("kind")
    N = int(spec.get("N", 3))
    if kind == "zd":
        seq = tilings.zd_ccc(int(spec.get("d", 1)), int(spec.get("m", 3)), N, one_sided=bool(spec.get("one_sided")))
    elif kind == "free":
        wr = int(param(args, spec, "window_radius", 4))
        seq = tilings.free_ccc(int(spec.get("k", 2)), N, seed_radius=int(spec.get("seed_radius", 0)), window_radius=wr)
    elif kind == "rf":
        seq = tilings.rf_ccc(int(spec.get("m", 2)), N, d=int(spec.get("d", 1)))
    else:
        raise CliError(f"unknown tiling kind {kind!r}")
    return seq.dumps() + "\n", 0


def cmd_tile_verify(args, spec):
    (obj,) = need_inputs(args, 1)
    seq = tilings.CccPrefix.from_json(obj)
    r = int(param(args, spec, "window_radius", 8))
    capped_ball(seq.group, r)
    bundle = tilings.verify_ccc(seq, r)
    return dump(bundle.to_json()), bundle.exit_code


def _targets(spec, N):
    t = spec.get("targets", "gen_col")
    if t in (None, "none"):
        return None
    if t == "gen_col":
        # level 1 must leave room for a blocking code of its tile size
        return [bpm.gen_col_size_target]
    raise CliError(f"unknown growth targets {t!r}")


def cmd_blueprint_build(args, spec):
    desc = param(args, spec, "group", {"kind": "Zd", "params": {"d": 1}})
    G = from_descriptor(desc)
    N = int(spec.get("N", 3))
    seed = _elements(G, spec, "seed") or [G.identity]
    gs = bpm.build_growth_sequence(G, N, seed, _targets(spec, N), max_radius=int(spec.get("max_radius", 100000)))
    bp = bpm.build_blueprint(G, gs)
    return bp.dumps() + "\n", 0


def cmd_blueprint_verify(args, spec):
    (obj,) = need_inputs(args, 1)
    bp = bpm.BlueprintPrefix.from_json(obj)
    bundle = bpm.verify_blueprint(bp, dense_radius=param(args, spec, "window_radius"))
    bound = param(args, spec, "exact_rho_bound")
    if bound is not None and bp.gs is not None:
        G = bp.group
        for n in range(1, bp.gs.N + 1):
            H, prev = bp.gs.H[n], bp.gs.H[n - 1]
            if len(H) <= int(bound):
                value, D = bpm.rho(G, H, prev, mode="exact", bound=int(bound))
                bundle.add(f"rho.exact.{n}", verdict(G, value >= bp.gs.targets[n], witness=D, rho=value))
    return dump(bundle.to_json()), bundle.exit_code


def _load_blueprint(obj):
    return bpm.BlueprintPrefix.from_json(obj["blueprint"] if "blueprint" in obj and "F" not in obj else obj)


def cmd_fm_build(args, spec):
    (obj,) = need_inputs(args, 1)
    bp = _load_blueprint(obj)
    G = bp.group
    if "R" in spec:
        R = {G.parse(str(k)): int(v) for k, v in spec["R"]}
    elif "Q" in spec:
        R = bpm.extend_locally_recognizable(G, {G.parse(str(k)): int(v) for k, v in spec["Q"]}).R
    else:
        raise CliError("fm-build needs a pattern R (or Q to extend)")
    fund = fm.build_fundamental(bp, R)
    return fund.dumps() + "\n", 0


def cmd_fm_extend(args, spec):
    (obj,) = need_inputs(args, 1)
    fund = fm.FundamentalPrefix.from_json(obj)
    G = fund.group
    op = spec.get("op")
    if op == "block":
        out = fm.extend_block_all(fund, _elements(G, spec, "S", [])).fund
    elif op == "orth":
        out = fm.orthogonal_extension(fund, str(spec.get("tau", "")))
    elif op == "strong":
        S = _elements(G, spec, "S", [])
        out = fm.apply_strong(fund, fm.strong_extension(fund, S), S)
    else:
        raise CliError(f"unknown extension {op!r}")
    return out.dumps() + "\n", 0


def cmd_fm_verify(args, spec):
    (obj,) = need_inputs(args, 1)
    fund = fm.FundamentalPrefix.from_json(obj)
    bundle = fm.verify_fundamental(fund)
    for name, rep in fm.verify_extensions(fund):
        bundle.add(name, rep)
    return dump(bundle.to_json()), bundle.exit_code


def cmd_render(args, spec):
    (obj,) = need_inputs(args, 1)
    if "coloring" in obj and "window" not in obj:
        obj = obj["coloring"]
    pc = PartialColoring.from_json(obj)
    fmt = param(args, spec, "format", "pgm")
    if fmt == "pgm":
        return pgm_text(pc), 0
    if fmt == "dot":
        return dot_text(pc, int(param(args, spec, "window_radius", 2))), 0
    if fmt == "json":
        return pc.dumps() + "\n", 0
    raise CliError(f"unknown format {fmt!r}")


COMMANDS = {
    "group": cmd_group,
    "color-build": cmd_color_build,
    "color-verify": cmd_color_verify,
    "tile-build": cmd_tile_build,
    "tile-verify": cmd_tile_verify,
    "blueprint-build": cmd_blueprint_build,
    "blueprint-verify": cmd_blueprint_verify,
    "fm-build": cmd_fm_build,
    "fm-extend": cmd_fm_extend,
    "fm-verify": cmd_fm_verify,
    "render": cmd_render,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subshift-forge", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("inputs", nargs="*", help="input artifacts (JSON)")
    p.add_argument("--group", type=json.loads, help="group descriptor as JSON")
    p.add_argument("--spec", help="JSON parameter file")
    p.add_argument("--params", type=json.loads, help="inline JSON parameters, merged over --spec")
    p.add_argument("--window-radius", dest="window_radius", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "pgm", "dot"])
    p.add_argument("--exact-rho-bound", dest="exact_rho_bound", type=int)
    p.add_argument("--threads", type=int)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SPEC_ERROR if exc.code else 0
    try:
        spec = load_json(args.spec) if args.spec else {}
        if not isinstance(spec, dict):
            raise CliError("spec must be a JSON object")
        spec.update(args.params or {})
        text, code = COMMANDS[args.command](args, spec)
    except (CliError, SpecError, GroupError, RenderError, KeyError, ValueError, TypeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SPEC_ERROR
    except WindowTooSmall as err:
        print(f"window too small: {err}", file=sys.stderr)
        return EXIT_WINDOW_TOO_SMALL
    write_atomic(args.out, text)
    return code


if __name__ == "__main__":
    sys.exit(main())
