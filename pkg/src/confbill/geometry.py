"""Planar conic sections and implicit reflection walls.

Conics are carried in two forms: the six-coefficient implicit form
``A x1^2 + B x1 x2 + C x2^2 + D x1 + E x2 + F = 0`` (:class:`ConicCoeffs`)
and a classified geometric form (:class:`ConicClass`).  Reflection walls are
unions of :class:`WallComponent` objects, each an implicit curve with an
analytic gradient, an optional parametrization (used for arc-length-uniform
sampling), and a reflection mask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

# Relative eigenvalue threshold below which the quadratic part is treated as
# rank-deficient during classification.
DEGENERACY_EPS = 1e-12

PROJECT_TOL = 1e-13
PROJECT_MAX_ITER = 50


class ConicError(ValueError):
    """Base class for conic construction/classification failures."""


class DegenerateConicError(ConicError):
    """All six coefficients vanish, or the locus is a single point."""


class EmptyConicError(ConicError):
    """The real locus of the conic is empty."""


class ProjectionError(RuntimeError):
    """Newton projection onto a wall failed to converge."""


# --------------------------------------------------------------------------
# coefficient form
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConicCoeffs:
    """Implicit conic ``A x1^2 + B x1 x2 + C x2^2 + D x1 + E x2 + F = 0``."""

    A: float
    B: float
    C: float
    D: float
    E: float
    F: float

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.A, self.B, self.C, self.D, self.E, self.F)

    def normalized(self) -> "ConicCoeffs":
        """Scale so the largest-magnitude coefficient becomes +-1."""
        m = max(abs(v) for v in self.as_tuple())
        if m == 0.0:
            raise DegenerateConicError("all conic coefficients are zero")
        return ConicCoeffs(*(v / m for v in self.as_tuple()))

    def value(self, q) -> np.ndarray | float:
        q = np.asarray(q, dtype=float)
        x, y = q[..., 0], q[..., 1]
        return (self.A * x * x + self.B * x * y + self.C * y * y
                + self.D * x + self.E * y + self.F)

    def gradient(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        x, y = q[..., 0], q[..., 1]
        gx = 2.0 * self.A * x + self.B * y + self.D
        gy = self.B * x + 2.0 * self.C * y + self.E
        return np.stack([gx, gy], axis=-1)

    def scaled(self, lam: float) -> "ConicCoeffs":
        return ConicCoeffs(*(lam * v for v in self.as_tuple()))


def conic_transform(c: ConicCoeffs, rotation: float = 0.0,
                    translation=(0.0, 0.0)) -> ConicCoeffs:
    """Coefficients of the conic rotated by ``rotation`` and then translated.

    A point x lies on the new conic iff R^T (x - t) lies on the old one.
    """
    ct, st = math.cos(rotation), math.sin(rotation)
    R = np.array([[ct, -st], [st, ct]])
    t = np.asarray(translation, dtype=float)
    M = np.array([[c.A, c.B / 2.0], [c.B / 2.0, c.C]])
    b = np.array([c.D, c.E])
    M2 = R @ M @ R.T
    Rb = R @ b
    b2 = -2.0 * M2 @ t + Rb
    F2 = c.F + t @ M2 @ t - Rb @ t
    return ConicCoeffs(M2[0, 0], 2.0 * M2[0, 1], M2[1, 1], b2[0], b2[1], F2)


def centered_conic(kind: str, a: float, b: float) -> ConicCoeffs:
    """Axis-aligned conic centered at the origin (normalized implicit form)."""
    if a <= 0 or b <= 0:
        raise ConicError(f"semi-axes must be positive, got a={a}, b={b}")
    if kind == "ellipse" or kind == "circle":
        return ConicCoeffs(1.0 / a**2, 0.0, 1.0 / b**2, 0.0, 0.0, -1.0)
    if kind == "hyperbola":
        return ConicCoeffs(1.0 / a**2, 0.0, -1.0 / b**2, 0.0, 0.0, -1.0)
    raise ConicError(f"unsupported centered conic kind: {kind!r}")


def focused_conic(kind: str, a: float, b: float = 0.0, *,
                  opening: int = -1) -> ConicCoeffs:
    """Conic with one focus at the origin and major axis along x1.

    For ``ellipse``/``hyperbola``, ``a`` and ``b`` are the conic's own
    semi-axes; the center is placed at (+c, 0) so the left focus sits at the
    origin.  For ``parabola``, ``a`` is the offset parameter c of the
    generating line: the curve is ``q1 = -q2^2/(4 c^2) + c^2`` (vertex at
    ``c^2``, focal length ``c^2``), mirrored to open along +x1 when
    ``opening=+1``.  ``circle`` gives a circle of radius ``a`` centered at
    the origin.
    """
    if kind == "ellipse":
        if not a > b > 0:
            raise ConicError("focused ellipse needs a > b > 0")
        cf = math.sqrt(a * a - b * b)
        return conic_transform(centered_conic("ellipse", a, b),
                               translation=(cf, 0.0))
    if kind == "hyperbola":
        if a <= 0 or b <= 0:
            raise ConicError("focused hyperbola needs a, b > 0")
        cf = math.sqrt(a * a + b * b)
        return conic_transform(centered_conic("hyperbola", a, b),
                               translation=(cf, 0.0))
    if kind == "parabola":
        if a == 0:
            raise ConicError("parabola offset parameter must be nonzero")
        c2 = a * a
        # opening=-1:  q1 + q2^2/(4c^2) - c^2 = 0
        s = -float(opening)
        return ConicCoeffs(0.0, 0.0, s / (4.0 * c2), 1.0, 0.0, -s * c2)
    if kind == "circle":
        if a <= 0:
            raise ConicError("circle radius must be positive")
        return centered_conic("circle", a, a)
    raise ConicError(f"unsupported focused conic kind: {kind!r}")


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConicClass:
    """Classified conic: kind, center, axes, eccentricity and foci.

    ``axis`` is the unit direction of the major (transverse, symmetry) axis
    where that makes sense.  ``focal_length`` is set for parabolas only.
    """

    kind: str
    center: Optional[np.ndarray]
    semi_axes: Optional[tuple[float, float]]
    eccentricity: float
    foci: tuple[np.ndarray, ...]
    axis: Optional[np.ndarray] = None
    focal_length: Optional[float] = None


def _eig2(A: float, B2: float, C: float) -> tuple[float, float, np.ndarray, np.ndarray]:
    """Eigen-decomposition of the symmetric matrix [[A, B2], [B2, C]]."""
    tr = A + C
    det = A * C - B2 * B2
    disc = math.sqrt(max((A - C) ** 2 + 4.0 * B2 * B2, 0.0))
    l1 = 0.5 * (tr + disc)
    l2 = 0.5 * (tr - disc)
    if abs(B2) > 1e-300:
        v1 = np.array([B2, l1 - A])
        v2 = np.array([B2, l2 - A])
    else:
        if A >= C:
            v1, v2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        else:
            v1, v2 = np.array([0.0, 1.0]), np.array([1.0, 0.0])
    v1 = v1 / np.hypot(*v1)
    v2 = v2 / np.hypot(*v2)
    return l1, l2, v1, v2


def classify(c: ConicCoeffs) -> ConicClass:
    """Classify a conic from its six coefficients.

    Classification is scale-invariant: coefficient vectors equal up to a
    nonzero factor yield the same result.  An empty real locus raises
    :class:`EmptyConicError`.
    """
    c = c.normalized()
    A, B, C, D, E, F = c.as_tuple()
    quad_scale = max(abs(A), abs(B), abs(C))

    if quad_scale == 0.0:
        if abs(D) == 0.0 and abs(E) == 0.0:
            raise DegenerateConicError("no quadratic or linear part")
        n = np.array([D, E])
        return ConicClass("line", None, None, math.inf, (),
                          axis=np.array([-E, D]) / np.hypot(D, E))

    l1, l2, v1, v2 = _eig2(A, B / 2.0, C)
    lmax = max(abs(l1), abs(l2))
    n_zero = sum(1 for l in (l1, l2) if abs(l) <= DEGENERACY_EPS * lmax)

    if n_zero == 0:
        # central conic: 2 M x + (D, E) = 0
        M = np.array([[A, B / 2.0], [B / 2.0, C]])
        center = np.linalg.solve(2.0 * M, -np.array([D, E]))
        Fc = float(c.value(center))
        if l1 * l2 > 0:
            sgn = 1.0 if l1 > 0 else -1.0
            if abs(Fc) <= 1e-14 * lmax:
                raise DegenerateConicError("conic degenerates to a point")
            if sgn * Fc > 0:
                raise EmptyConicError("empty real locus")
            s1 = math.sqrt(-Fc / l1)
            s2 = math.sqrt(-Fc / l2)
            if abs(l1 - l2) <= DEGENERACY_EPS * lmax:
                return ConicClass("circle", center, (s1, s1), 0.0, (),
                                  axis=np.array([1.0, 0.0]))
            # larger semi-axis along the eigenvector of the smaller |lambda|
            if s1 >= s2:
                a_, b_, axis = s1, s2, v1
            else:
                a_, b_, axis = s2, s1, v2
            cf = math.sqrt(a_ * a_ - b_ * b_)
            foci = (center + cf * axis, center - cf * axis)
            return ConicClass("ellipse", center, (a_, b_), cf / a_, foci, axis=axis)
        # opposite signs: hyperbola or crossing line pair
        if abs(Fc) <= 1e-14 * lmax:
            return ConicClass("line-pair", center, None, math.inf, ())
        if l1 * Fc < 0:
            lt, vt, lo = l1, v1, l2
        else:
            lt, vt, lo = l2, v2, l1
        a_ = math.sqrt(-Fc / lt)
        b_ = math.sqrt(Fc / lo)
        cf = math.sqrt(a_ * a_ + b_ * b_)
        foci = (center + cf * vt, center - cf * vt)
        return ConicClass("hyperbola", center, (a_, b_), cf / a_, foci, axis=vt)

    if n_zero == 2:
        raise DegenerateConicError("quadratic part is numerically zero")

    # parabolic case: one eigenvalue vanishes
    if abs(l1) > abs(l2):
        lam, u, v = l1, v1, v2
    else:
        lam, u, v = l2, v2, v1
    b_lin = np.array([D, E])
    du = float(b_lin @ u)
    dv = float(b_lin @ v)
    if abs(dv) <= 1e-13 * max(abs(lam), abs(du), 1.0):
        # lam s^2 + du s + F = 0: one or two parallel lines
        return ConicClass("line-pair" if du * du - 4 * lam * F > 0 else "line",
                          None, None, math.inf, (), axis=v)
    s0 = -du / (2.0 * lam)
    t0 = -(F - du * du / (4.0 * lam)) / dv
    vertex = s0 * u + t0 * v
    kappa = -dv / lam            # S^2 = kappa T in vertex coordinates
    p_f = abs(kappa) / 4.0
    open_dir = math.copysign(1.0, kappa) * v
    focus = vertex + p_f * open_dir
    return ConicClass("parabola", None, None, 1.0, (focus,),
                      axis=open_dir, focal_length=p_f)


# --------------------------------------------------------------------------
# walls
# --------------------------------------------------------------------------

@dataclass
class WallComponent:
    """One component of a reflection wall: an implicit curve F = 0.

    ``value`` and ``gradient`` must accept points of shape (2,) or (N, 2).
    ``reflect`` is either a bool or a predicate on the hit point; crossings
    of non-reflecting components are pass-throughs.  ``param``/``u_range``
    give an optional parametrization used for sampling; ``branch`` labels
    covering-map branches where relevant.
    """

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    reflect: bool | Callable[[np.ndarray], bool] = True
    param: Optional[Callable[[np.ndarray], np.ndarray]] = None
    u_range: Optional[tuple[float, float]] = None
    closed: bool = False
    feature_scale: float = 1.0
    branch: Optional[int] = None
    conic: Optional[ConicCoeffs] = None
    conic_info: Optional[dict] = None
    _arclen_table: Optional[tuple[np.ndarray, np.ndarray]] = field(
        default=None, repr=False, compare=False)

    def eval_and_gradient(self, q) -> tuple[np.ndarray | float, np.ndarray]:
        return self.value(q), self.gradient(q)

    def is_reflecting(self, q) -> bool:
        if callable(self.reflect):
            return bool(self.reflect(np.asarray(q, dtype=float)))
        return bool(self.reflect)

    # -- sampling ----------------------------------------------------------

    def _ensure_arclength(self, n_grid: int = 4096) -> tuple[np.ndarray, np.ndarray]:
        if self.param is None or self.u_range is None:
            raise ValueError(f"wall component {self.name!r} has no parametrization")
        if self._arclen_table is None:
            u0, u1 = self.u_range
            us = np.linspace(u0, u1, n_grid)
            pts = self.param(us)
            seg = np.hypot(*np.diff(pts, axis=0).T)
            cum = np.concatenate([[0.0], np.cumsum(seg)])
            self._arclen_table = (us, cum)
        return self._arclen_table

    def total_length(self) -> float:
        _, cum = self._ensure_arclength()
        return float(cum[-1])

    def points_at_arclength(self, s: np.ndarray, project: bool = True) -> np.ndarray:
        """Points at prescribed arc lengths (measured from u_range[0])."""
        us, cum = self._ensure_arclength()
        u = np.interp(np.asarray(s, dtype=float), cum, us)
        pts = self.param(np.atleast_1d(u))
        if project:
            pts = np.array([project_to_wall(self, p) for p in pts])
        return pts


def eval_and_gradient(component: WallComponent, q):
    """Implicit value and (unnormalized) normal of a wall component at q."""
    return component.eval_and_gradient(q)


def project_to_wall(component: WallComponent, q, tol: float = PROJECT_TOL,
                    max_iter: int = PROJECT_MAX_ITER) -> np.ndarray:
    """Newton projection of q onto {F = 0} along the gradient direction."""
    x = np.asarray(q, dtype=float).copy()
    for _ in range(max_iter):
        f = float(component.value(x))
        if abs(f) <= tol:
            return x
        g = np.asarray(component.gradient(x), dtype=float)
        g2 = float(g @ g)
        if g2 == 0.0:
            raise ProjectionError("zero gradient during projection")
        x = x - (f / g2) * g
    if abs(float(component.value(x))) <= 10 * tol:
        return x
    raise ProjectionError(f"projection did not converge at {q!r}")


@dataclass
class Wall:
    """A reflection wall: a union of components."""

    components: tuple[WallComponent, ...]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)


def as_components(walls) -> tuple[WallComponent, ...]:
    if walls is None:
        return ()
    if isinstance(walls, Wall):
        return walls.components
    if isinstance(walls, WallComponent):
        return (walls,)
    return tuple(walls)


# -- constructors -----------------------------------------------------------

def implicit_wall(name: str, value, gradient, *, reflect=True,
                  feature_scale: float = 1.0, **kw) -> WallComponent:
    return WallComponent(name, value, gradient, reflect=reflect,
                         feature_scale=feature_scale, **kw)


def _rot(angle: float) -> np.ndarray:
    ct, st = math.cos(angle), math.sin(angle)
    return np.array([[ct, -st], [st, ct]])


def conic_wall(kind: str, a: float, b: float = 0.0, center=(0.0, 0.0),
               rotation: float = 0.0, *, name: Optional[str] = None,
               reflect=True, opening: int = -1,
               u_span: float = 3.0) -> list[WallComponent]:
    """Wall components for a conic given geometrically.

    Uses the normalized implicit form (e.g. ``x^2/a^2 + y^2/b^2 - 1``) so
    gradients have a predictable scale.  A hyperbola yields two branch
    components; all other kinds yield one.
    """
    center = np.asarray(center, dtype=float)
    R = _rot(rotation)
    name = name or kind

    def body_frame(q):
        q = np.asarray(q, dtype=float)
        return (q - center) @ R        # == R.T @ (q - center) rowwise

    if kind in ("ellipse", "circle"):
        if kind == "circle":
            b = a
        coeffs = conic_transform(centered_conic("ellipse", a, b), rotation, center)

        def value(q):
            xy = body_frame(q)
            return xy[..., 0] ** 2 / a**2 + xy[..., 1] ** 2 / b**2 - 1.0

        def gradient(q):
            xy = body_frame(q)
            g = np.stack([2.0 * xy[..., 0] / a**2, 2.0 * xy[..., 1] / b**2], axis=-1)
            return g @ R.T

        def param(u):
            u = np.atleast_1d(u)
            xy = np.stack([a * np.cos(u), b * np.sin(u)], axis=-1)
            return xy @ R.T + center

        return [WallComponent(name, value, gradient, reflect=reflect,
                              param=param, u_range=(0.0, 2.0 * math.pi),
                              closed=True, feature_scale=max(a, b),
                              conic=coeffs,
                              conic_info=dict(kind=kind, a=a, b=b,
                                              center=tuple(center),
                                              rotation=rotation))]

    if kind == "hyperbola":
        coeffs = conic_transform(centered_conic("hyperbola", a, b), rotation, center)

        def value(q):
            xy = body_frame(q)
            return xy[..., 0] ** 2 / a**2 - xy[..., 1] ** 2 / b**2 - 1.0

        def gradient(q):
            xy = body_frame(q)
            g = np.stack([2.0 * xy[..., 0] / a**2, -2.0 * xy[..., 1] / b**2], axis=-1)
            return g @ R.T

        comps = []
        for sgn, tag in ((1.0, 0), (-1.0, 1)):
            def param(u, sgn=sgn):
                u = np.atleast_1d(u)
                xy = np.stack([sgn * a * np.cosh(u), b * np.sinh(u)], axis=-1)
                return xy @ R.T + center

            side = "+x" if sgn > 0 else "-x"

            def branch_mask(q, sgn=sgn, rf=reflect):
                xy = body_frame(q)
                if not bool(xy[..., 0] * sgn > 0):
                    return False
                return bool(rf(q)) if callable(rf) else bool(rf)

            comps.append(WallComponent(
                f"{name}[{side}]", value, gradient, reflect=branch_mask,
                param=param, u_range=(-u_span, u_span), closed=False,
                feature_scale=max(a, b), branch=tag, conic=coeffs,
                conic_info=dict(kind=kind, a=a, b=b, center=tuple(center),
                                rotation=rotation, branch=side)))
        return comps

    if kind == "parabola":
        # focused form q1 = -opening*(q2^2/(4 a^2) - a^2), rotated/translated
        c2 = a * a
        s = -float(opening)

        def value(q):
            xy = body_frame(q)
            return s * (xy[..., 1] ** 2 / (4.0 * c2) - c2) + xy[..., 0]

        def gradient(q):
            xy = body_frame(q)
            g = np.stack([np.ones_like(xy[..., 0]),
                          s * xy[..., 1] / (2.0 * c2)], axis=-1)
            return g @ R.T

        def param(u):
            u = np.atleast_1d(u)
            xy = np.stack([-s * (u * u / (4.0 * c2) - c2), u], axis=-1)
            return xy @ R.T + center

        span = u_span * 2.0 * c2
        coeffs = conic_transform(focused_conic("parabola", a, opening=opening),
                                 rotation, center)
        return [WallComponent(name, value, gradient, reflect=reflect,
                              param=param, u_range=(-span, span), closed=False,
                              feature_scale=max(c2, 1.0), conic=coeffs,
                              conic_info=dict(kind=kind, a=a, center=tuple(center),
                                              rotation=rotation, opening=opening))]

    raise ConicError(f"unsupported wall conic kind: {kind!r}")


def line_wall(point, direction, *, name: str = "line", reflect=True,
              u_span: float = 20.0) -> WallComponent:
    """Line through ``point`` with direction ``direction`` as a wall."""
    p0 = np.asarray(point, dtype=float)
    d = np.asarray(direction, dtype=float)
    d = d / np.hypot(*d)
    n = np.array([-d[1], d[0]])

    def value(q):
        q = np.asarray(q, dtype=float)
        return (q[..., 0] - p0[0]) * n[0] + (q[..., 1] - p0[1]) * n[1]

    def gradient(q):
        q = np.asarray(q, dtype=float)
        return np.broadcast_to(n, q.shape).copy()

    def param(u):
        u = np.atleast_1d(u)
        return p0 + np.outer(u, d)

    return WallComponent(name, value, gradient, reflect=reflect, param=param,
                         u_range=(-u_span, u_span), closed=False,
                         feature_scale=max(1.0, float(np.hypot(*p0))),
                         conic=ConicCoeffs(0, 0, 0, n[0], n[1], -float(n @ p0)),
                         conic_info=dict(kind="line", point=tuple(p0),
                                         direction=tuple(d),
                                         normal=tuple(n),
                                         offset=float(n @ p0)))


def vertical_line_wall(c: float, **kw) -> WallComponent:
    """The line x1 = c."""
    return line_wall((c, 0.0), (0.0, 1.0), name=kw.pop("name", f"line x1={c}"), **kw)


def wall_from_coeffs(c: ConicCoeffs, *, name: str = "conic",
                     reflect=True) -> list[WallComponent]:
    """Wall components from raw implicit coefficients (classified first)."""
    k = classify(c)
    if k.kind in ("ellipse", "circle"):
        a_, b_ = k.semi_axes
        rot = math.atan2(k.axis[1], k.axis[0]) if k.axis is not None else 0.0
        return conic_wall(k.kind, a_, b_ if k.kind == "ellipse" else a_,
                          center=k.center, rotation=rot, name=name,
                          reflect=reflect)
    if k.kind == "hyperbola":
        a_, b_ = k.semi_axes
        rot = math.atan2(k.axis[1], k.axis[0])
        return conic_wall("hyperbola", a_, b_, center=k.center, rotation=rot,
                          name=name, reflect=reflect)
    if k.kind == "parabola":
        # recover the generating offset: focal length = c^2; the wall frame
        # is anchored at the focus with body -x along the opening direction
        cpar = math.sqrt(k.focal_length)
        rot = math.atan2(-k.axis[1], -k.axis[0])
        return conic_wall("parabola", cpar, center=k.foci[0], rotation=rot,
                          name=name, reflect=reflect)
    if k.kind == "line":
        d = k.axis
        # a point on D x + E y + F = 0
        nn = np.array([c.D, c.E])
        p0 = -c.F * nn / (nn @ nn)
        return [line_wall(p0, d, name=name, reflect=reflect)]
    raise ConicError(f"cannot build a wall from conic kind {k.kind!r}")
