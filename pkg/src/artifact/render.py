"""Plain-text image and graph output for partial colorings."""
from __future__ import annotations

from .coloring import PartialColoring
from .groups import Free, Zd


class RenderError(ValueError):
    pass


def pgm_text(w: PartialColoring) -> str:
    """P2 image with maxval 2: 0 -> 0, 1 -> 2, undefined -> 1.

    Columns run along the first coordinate, rows along the second with y
    increasing downward from the window's top-left corner.
    """
    G = w.group
    if not (isinstance(G, Zd) and G.d == 2):
        raise RenderError("PGM output needs a Z^2 window")
    if not w.window:
        raise RenderError("empty window")
    xs = [g[0] for g in w.window]
    ys = [g[1] for g in w.window]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    width, height = x1 - x0 + 1, y1 - y0 + 1
    if width * height != len(w.window):
        raise RenderError("window is not a rectangle")
    rows = []
    for y in range(y0, y1 + 1):
        row = []
        for x in range(x0, x1 + 1):
            v = w.values.get((x, y))
            row.append("1" if v is None else ("2" if v else "0"))
        rows.append(" ".join(row))
    return f"P2\n{width} {height}\n2\n" + "\n".join(rows) + "\n"


def dot_text(w: PartialColoring, radius: int) -> str:
    """Cayley-graph ball of a free group; nodes labeled word=value, edges
    from each word to its one-letter extensions, undefined nodes dashed."""
    G = w.group
    if not isinstance(G, Free):
        raise RenderError("DOT output needs a free group")
    nodes = G.ball(radius)
    ids = {g: f"n{i}" for i, g in enumerate(nodes)}
    lines = ["digraph cayley {"]
    for g in nodes:
        v = w.values.get(g)
        label = f"{G.fmt(g)}={'?' if v is None else v}"
        style = ", style=dashed" if v is None else ""
        lines.append(f'  {ids[g]} [label="{label}"{style}];')
    for g in nodes:
        if g:
            parent = g[:-1]
            lines.append(f"  {ids[parent]} -> {ids[g]} [label=\"{G.fmt(g[-1:])}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"
