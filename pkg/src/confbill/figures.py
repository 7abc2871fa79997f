"""Reproduction of the conic-image galleries as SVG files.

Three galleries: offset ellipses/hyperbolae under z -> z^2 and under
z -> z^3 (eight panels each, semi-axes 3 and 2 with the catalogued center
offsets), and confocal ellipses/hyperbolae with their circle/line preimages
under the Birkhoff map.  Also provides the self-intersection counter used to
verify the qualitative structure of the cubic-map images.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import conformal as cf
from .geometry import conic_wall, line_wall
from .svg import SvgCurve, write_svg

A_DEFAULT = 3.0
B_DEFAULT = 2.0

# (kind, c1, c2) per panel, labels a..h
FIG1_PANELS = [
    ("ellipse", 2.0, 0.0), ("ellipse", 0.0, 1.0),
    ("ellipse", 2.0, 1.0), ("ellipse", 3.0, 4.0),
    ("hyperbola", 2.0, 0.0), ("hyperbola", 0.0, 1.0),
    ("hyperbola", 2.0, 1.0), ("hyperbola", 3.0, 4.0),
]
FIG3_PANELS = [
    ("ellipse", 0.0, 0.0), ("ellipse", 1.5, 0.0),
    ("ellipse", 0.0, 1.0), ("ellipse", 1.0, 1.0),
    ("hyperbola", 0.0, 0.0), ("hyperbola", 0.0, 1.0),
    ("hyperbola", 1.0, 0.0), ("hyperbola", 1.0, 1.0),
]
BIRKHOFF_ELLIPSES = [0.6, 1.0, 1.5]        # b parameter, foci at +-1
BIRKHOFF_HYPERBOLAE = [-0.2, -0.5, -0.8]   # b^2 parameter in (-1, 0)

HYPERBOLA_U = 2.2
N_SAMPLES = 1600


@dataclass
class Panel:
    label: str
    kind: str
    c1: float
    c2: float
    k: int
    source: list[np.ndarray]
    image: list[np.ndarray]
    closed: bool


def _source_polylines(kind: str, a: float, b: float, c1: float, c2: float
                      ) -> tuple[list[np.ndarray], bool]:
    if kind == "ellipse":
        u = np.linspace(0.0, 2.0 * math.pi, N_SAMPLES + 1)[:-1]
        pts = np.stack([a * np.cos(u) + c1, b * np.sin(u) + c2], axis=-1)
        return [pts], True
    u = np.linspace(-HYPERBOLA_U, HYPERBOLA_U, N_SAMPLES)
    b1 = np.stack([a * np.cosh(u) + c1, b * np.sinh(u) + c2], axis=-1)
    b2 = np.stack([-a * np.cosh(u) + c1, b * np.sinh(u) + c2], axis=-1)
    return [b1, b2], False


def power_panel(label: str, kind: str, c1: float, c2: float, k: int,
                a: float = A_DEFAULT, b: float = B_DEFAULT) -> Panel:
    source, closed = _source_polylines(kind, a, b, c1, c2)
    mapping = cf.PowerMap(k)
    image = [cf.forward(mapping, pts) for pts in source]
    return Panel(label, kind, c1, c2, k, source, image, closed)


def birkhoff_panel(label: str, kind: str, param: float) -> Panel:
    mapping = cf.BirkhoffMap()
    if kind == "ellipse":
        bpar = param
        ae = math.sqrt(bpar * bpar + 1.0)
        u = np.linspace(0.0, 2.0 * math.pi, N_SAMPLES + 1)[:-1]
        image = [np.stack([ae * np.cos(u), bpar * np.sin(u)], axis=-1)]
        r1, r2 = cf.birkhoff_preimage_circles(bpar)
        source = [np.stack([r * np.cos(u), r * np.sin(u)], axis=-1)
                  for r in (r1, r2)]
        return Panel(label, kind, param, 0.0, 0, source, image, True)
    # hyperbola: param = b^2 in (-1, 0); preimage is the asymptote line pair
    b2 = param
    ah = math.sqrt(b2 + 1.0)
    bh = math.sqrt(-b2)
    u = np.linspace(-HYPERBOLA_U, HYPERBOLA_U, N_SAMPLES)
    img1 = np.stack([ah * np.cosh(u), bh * np.sinh(u)], axis=-1)
    img2 = np.stack([-ah * np.cosh(u), bh * np.sinh(u)], axis=-1)
    t = np.linspace(-3.0, 3.0, N_SAMPLES)
    source = [np.stack([ah * t, bh * t], axis=-1),
              np.stack([ah * t, -bh * t], axis=-1)]
    return Panel(label, kind, param, 0.0, 0, source, [img1, img2], False)


def gallery(which: str, a: float = A_DEFAULT, b: float = B_DEFAULT
            ) -> list[Panel]:
    labels = "abcdefgh"
    if which == "fig1":
        return [power_panel(labels[i], kind, c1, c2, 2, a, b)
                for i, (kind, c1, c2) in enumerate(FIG1_PANELS)]
    if which == "fig3":
        return [power_panel(labels[i], kind, c1, c2, 3, a, b)
                for i, (kind, c1, c2) in enumerate(FIG3_PANELS)]
    if which == "birkhoff":
        panels = [birkhoff_panel(labels[i], "ellipse", p)
                  for i, p in enumerate(BIRKHOFF_ELLIPSES)]
        panels += [birkhoff_panel(labels[len(panels) + i], "hyperbola", p)
                   for i, p in enumerate(BIRKHOFF_HYPERBOLAE)]
        return panels
    raise ValueError(f"unknown gallery {which!r} (fig1|fig3|birkhoff)")


def write_gallery(which: str, out_dir: str, a: float = A_DEFAULT,
                  b: float = B_DEFAULT) -> list[str]:
    """Emit one SVG per panel; for the cubic gallery also a count file."""
    os.makedirs(out_dir, exist_ok=True)
    panels = gallery(which, a, b)
    written = []
    for p in panels:
        curves = [SvgCurve(pts, closed=p.closed, color="#888888", dashed=True)
                  for pts in p.source]
        curves += [SvgCurve(pts, closed=p.closed, color="#1f77b4")
                   for pts in p.image]
        path = os.path.join(out_dir, f"{which}_{p.label}.svg")
        write_svg(path, curves)
        written.append(path)
    if which == "fig3":
        path = os.path.join(out_dir, "fig3_intersections.txt")
        with open(path, "w", encoding="utf-8") as fh:
            for p in panels:
                n = count_self_intersections(
                    p.image, closed=[p.closed] * len(p.image))
                fh.write(f"{p.label} {p.kind} c1={p.c1:g} c2={p.c2:g} "
                         f"intersections={n}\n")
        written.append(path)
    return written


# --------------------------------------------------------------------------
# self-intersection counting
# --------------------------------------------------------------------------

def _segments(pts: np.ndarray, closed: bool):
    if closed:
        return pts, np.vstack([pts[1:], pts[:1]])
    return pts[:-1], pts[1:]


def count_self_intersections(polylines, closed, cluster: float = 1e-3) -> int:
    """Distinct crossing points of a family of polylines.

    Counts proper crossings between non-adjacent segments (same polyline)
    and between segments of different polylines, then clusters coincident
    points at ``cluster`` times the bounding-box diagonal.
    """
    polylines = [np.asarray(p, dtype=float) for p in polylines]
    if isinstance(closed, bool):
        closed = [closed] * len(polylines)
    P, Q, poly_id, seg_id, n_segs = [], [], [], [], {}
    for pid, (pts, cl) in enumerate(zip(polylines, closed)):
        a, b = _segments(pts, cl)
        P.append(a)
        Q.append(b)
        poly_id.append(np.full(len(a), pid))
        seg_id.append(np.arange(len(a)))
        n_segs[pid] = len(a)
    P = np.vstack(P)
    Q = np.vstack(Q)
    poly_id = np.concatenate(poly_id)
    seg_id = np.concatenate(seg_id)
    D = Q - P
    allpts = np.vstack(polylines)
    diag = float(np.hypot(*(allpts.max(axis=0) - allpts.min(axis=0))))
    n = len(P)

    hits = []
    block = 2048
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        for i in range(i0, i1):
            js = np.arange(i + 1, n)
            if len(js) == 0:
                continue
            same = poly_id[js] == poly_id[i]
            adjacent = same & (np.abs(seg_id[js] - seg_id[i]) <= 1)
            if closed[poly_id[i]]:
                m = n_segs[poly_id[i]]
                adjacent |= same & (np.abs(seg_id[js] - seg_id[i]) == m - 1)
            js = js[~adjacent]
            if len(js) == 0:
                continue
            d1 = D[i]
            p2 = P[js]
            d2 = D[js]
            den = d1[0] * d2[:, 1] - d1[1] * d2[:, 0]
            ok = np.abs(den) > 1e-15
            rel = p2 - P[i]
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.where(ok, (rel[:, 0] * d2[:, 1] - rel[:, 1] * d2[:, 0])
                             / np.where(ok, den, 1.0), -1.0)
                s = np.where(ok, (rel[:, 0] * d1[1] - rel[:, 1] * d1[0])
                             / np.where(ok, den, 1.0), -1.0)
            mask = ok & (t >= 0.0) & (t < 1.0) & (s >= 0.0) & (s < 1.0)
            for t_hit in t[mask]:
                hits.append(P[i] + t_hit * d1)
    # cluster coincident intersection points
    out: list[np.ndarray] = []
    tol = cluster * diag
    for h in hits:
        if not any(np.hypot(*(h - o)) < tol for o in out):
            out.append(h)
    return len(out)
