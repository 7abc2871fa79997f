"""Minimal SVG output: plain paths, computed viewBox, no dependencies.

Path data carries raw curve coordinates (17 significant digits); the y-flip
for display happens in a transform group, so consumers can read points back
from the ``d`` attributes and check them against curve equations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class SvgCurve:
    points: np.ndarray          # (n, 2)
    closed: bool = False
    color: Optional[str] = None
    width_frac: float = 0.004   # stroke width relative to the larger span
    dashed: bool = False


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _path_d(pts: np.ndarray, closed: bool) -> str:
    parts = [f"M {_fmt(pts[0, 0])} {_fmt(pts[0, 1])}"]
    parts += [f"L {_fmt(x)} {_fmt(y)}" for x, y in pts[1:]]
    if closed:
        parts.append("Z")
    return " ".join(parts)


def svg_document(curves: list[SvgCurve], margin: float = 0.05) -> str:
    """Standalone SVG with a viewBox covering all curves plus a margin."""
    allpts = np.vstack([c.points for c in curves])
    xmin, ymin = allpts.min(axis=0)
    xmax, ymax = allpts.max(axis=0)
    w, h = xmax - xmin, ymax - ymin
    w = w if w > 0 else 1.0
    h = h if h > 0 else 1.0
    mx, my = margin * w, margin * h
    # the group below applies scale(1,-1): the viewBox covers (x, -y)
    vb = (xmin - mx, -(ymax + my), w + 2 * mx, h + 2 * my)
    stroke_scale = max(w, h)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{_fmt(vb[0])} {_fmt(vb[1])} {_fmt(vb[2])} {_fmt(vb[3])}">',
        '<g transform="scale(1,-1)" fill="none">',
    ]
    for i, c in enumerate(curves):
        color = c.color or _PALETTE[i % len(_PALETTE)]
        extra = ' stroke-dasharray="0.12 0.08"' if c.dashed else ""
        lines.append(
            f'<path d="{_path_d(np.asarray(c.points, dtype=float), c.closed)}" '
            f'stroke="{color}" stroke-width="{_fmt(c.width_frac * stroke_scale)}"'
            f'{extra} />')
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_svg(path, curves: list[SvgCurve]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg_document(curves))


def read_path_points(svg_text: str) -> list[np.ndarray]:
    """Extract the raw point arrays back out of the path elements."""
    import re

    out = []
    for m in re.finditer(r'<path d="([^"]+)"', svg_text):
        tokens = m.group(1).replace("M", "").replace("L", " ").replace("Z", "")
        vals = [float(t) for t in tokens.split()]
        out.append(np.array(vals).reshape(-1, 2))
    return out
