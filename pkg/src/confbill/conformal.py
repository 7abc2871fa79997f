"""Conformal maps between billiard systems: power maps and the Birkhoff map.

Provides forward maps, cotangent lifts (normalized so the lift of z -> z^k is
p = w / conj(z)^(k-1)), inverse branches, time-reparametrization factors,
duality pairings between fields on matched energy levels, and image/preimage
computation for reflection walls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import fields as F
from .billiard import Arc, ReflectionEvent, Trajectory
from .geometry import ConicCoeffs, WallComponent, conic_wall, line_wall


class BranchPointError(ValueError):
    """Lift or inverse requested at a branch point of the map."""


class UnsupportedPairingError(ValueError):
    """make_duality does not know this (map, field) combination."""


class PairingInvariantError(RuntimeError):
    """A constructed pairing failed its defining Hamiltonian identity."""


# --------------------------------------------------------------------------
# map variants
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerMap:
    """z -> z^k, k >= 2; k-to-1 on the punctured plane."""

    k: int

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("power map needs k >= 2")


@dataclass(frozen=True)
class BirkhoffMap:
    """z -> (z + 1/z)/2; 2-to-1 off the branch points z = +-1."""


@dataclass(frozen=True)
class IdentityMap:
    """Trivial map (plumbing for degenerate pairings and comparisons)."""


ConformalMap = Union[PowerMap, BirkhoffMap, IdentityMap]


def _c(v) -> np.ndarray | complex:
    v = np.asarray(v, dtype=float)
    return v[..., 0] + 1j * v[..., 1]


def _r(z) -> np.ndarray:
    z = np.asarray(z)
    return np.stack([z.real, z.imag], axis=-1)


def forward(mapping: ConformalMap, z) -> np.ndarray:
    """Image point(s) of z under the map."""
    zc = _c(z)
    if isinstance(mapping, PowerMap):
        return _r(zc ** mapping.k)
    if isinstance(mapping, BirkhoffMap):
        if np.any(np.abs(zc) == 0.0):
            raise BranchPointError("Birkhoff map undefined at the origin")
        return _r(0.5 * (zc + 1.0 / zc))
    if isinstance(mapping, IdentityMap):
        return np.asarray(z, dtype=float).copy()
    raise TypeError(f"unknown map {mapping!r}")


def derivative(mapping: ConformalMap, z):
    """Complex derivative of the map at z."""
    zc = _c(z)
    if isinstance(mapping, PowerMap):
        return mapping.k * zc ** (mapping.k - 1)
    if isinstance(mapping, BirkhoffMap):
        return 0.5 * (1.0 - zc ** -2)
    if isinstance(mapping, IdentityMap):
        return np.ones_like(zc)
    raise TypeError(f"unknown map {mapping!r}")


def symplectic_constant(mapping: ConformalMap) -> float:
    """Constant c with (lift)* omega = c * omega (normalized power lift)."""
    return float(mapping.k) if isinstance(mapping, PowerMap) else 1.0


def lift(mapping: ConformalMap, z, w) -> tuple[np.ndarray, np.ndarray]:
    """Cotangent lift (z, w) -> (q, p) with the package normalization.

    Power map: q = z^k, p = w / conj(z)^(k-1) (the k-less normalization, a
    constant time change away from the exact lift).  Birkhoff: the exact
    lift p = 2 w / (1 - conj(z)^-2).
    """
    zc, wc = _c(z), _c(w)
    if isinstance(mapping, PowerMap):
        if np.any(np.abs(zc) == 0.0):
            raise BranchPointError("power-map lift undefined at z = 0")
        q = zc ** mapping.k
        p = wc / np.conj(zc) ** (mapping.k - 1)
        return _r(q), _r(p)
    if isinstance(mapping, BirkhoffMap):
        if np.any(np.abs(zc) == 0.0) or np.any(np.abs(zc - 1.0) == 0.0) \
                or np.any(np.abs(zc + 1.0) == 0.0):
            raise BranchPointError("Birkhoff lift undefined at z in {0, 1, -1}")
        q = 0.5 * (zc + 1.0 / zc)
        p = 2.0 * wc / (1.0 - np.conj(zc) ** -2)
        return _r(q), _r(p)
    if isinstance(mapping, IdentityMap):
        return np.asarray(z, dtype=float).copy(), np.asarray(w, dtype=float).copy()
    raise TypeError(f"unknown map {mapping!r}")


def unlift_momentum(mapping: ConformalMap, z, p) -> np.ndarray:
    """Source momentum w at source point z matching target momentum p."""
    zc, pc = _c(z), _c(p)
    if isinstance(mapping, PowerMap):
        return _r(pc * np.conj(zc) ** (mapping.k - 1))
    if isinstance(mapping, BirkhoffMap):
        return _r(pc * (1.0 - np.conj(zc) ** -2) / 2.0)
    if isinstance(mapping, IdentityMap):
        return np.asarray(p, dtype=float).copy()
    raise TypeError(f"unknown map {mapping!r}")


def inverse_branches(mapping: ConformalMap, q) -> list[tuple[np.ndarray, int]]:
    """All preimages of a single point q, with branch tags.

    Power map: the k complex roots, tags 0..k-1 ordered by argument offset.
    Birkhoff: the two roots of z^2 - 2 q z + 1 = 0 (their product is 1),
    tags 0 (|z| >= 1) and 1; a double root at q = +-1 raises.
    """
    qc = complex(_c(np.asarray(q, dtype=float)))
    if isinstance(mapping, PowerMap):
        k = mapping.k
        if qc == 0:
            return [(np.zeros(2), 0)]
        r = abs(qc) ** (1.0 / k)
        th = math.atan2(qc.imag, qc.real) / k
        out = []
        for j in range(k):
            zc = r * np.exp(1j * (th + 2.0 * math.pi * j / k))
            out.append((np.array([zc.real, zc.imag]), j))
        return out
    if isinstance(mapping, BirkhoffMap):
        s = np.sqrt(complex(qc * qc - 1.0))
        z1, z2 = qc + s, qc - s
        if abs(z1 - z2) == 0.0:
            raise BranchPointError(f"double root of the Birkhoff map at q={qc}")
        if abs(z1) < abs(z2):
            z1, z2 = z2, z1
        return [(np.array([z1.real, z1.imag]), 0),
                (np.array([z2.real, z2.imag]), 1)]
    if isinstance(mapping, IdentityMap):
        return [(np.asarray(q, dtype=float).copy(), 0)]
    raise TypeError(f"unknown map {mapping!r}")


def principal_inverse(mapping: ConformalMap, q) -> np.ndarray:
    return inverse_branches(mapping, q)[0][0]


def sqrt2_paper_branches(q) -> list[np.ndarray]:
    """The two explicit closed-form k=2 inverse branches.

    Valid off the positive real axis; used as a cross-check of the stable
    complex-square-root evaluation.
    """
    q = np.asarray(q, dtype=float)
    root = math.sqrt(-2.0 * q[0] + 2.0 * math.hypot(q[0], q[1]))
    if root == 0.0:
        raise ZeroDivisionError("branch formula degenerates on the +x axis")
    z1 = q[1] / root
    z2 = root / 2.0
    return [np.array([z1, z2]), np.array([-z1, -z2])]


def track_inverse(mapping: ConformalMap, q_path, z0) -> np.ndarray:
    """Continuity-tracked preimage of a path of points, starting near z0."""
    q_path = np.atleast_2d(np.asarray(q_path, dtype=float))
    out = np.empty_like(q_path)
    prev = np.asarray(z0, dtype=float)
    for i, q in enumerate(q_path):
        branches = inverse_branches(mapping, q)
        zs = np.array([b[0] for b in branches])
        j = int(np.argmin(np.hypot(zs[:, 0] - prev[0], zs[:, 1] - prev[1])))
        prev = zs[j]
        out[i] = prev
    return out


def reparam_factor(mapping: ConformalMap, z):
    """Time-change factor g(z) > 0 of the pairing on matched energy levels.

    Power: g = |z|^(2k-2).  Birkhoff: g = |z-1|^2 |z+1|^2 / (4 |z|^4).
    """
    zc = _c(z)
    if isinstance(mapping, PowerMap):
        return np.abs(zc) ** (2 * mapping.k - 2)
    if isinstance(mapping, BirkhoffMap):
        return (np.abs(zc - 1.0) ** 2 * np.abs(zc + 1.0) ** 2
                / (4.0 * np.abs(zc) ** 4))
    if isinstance(mapping, IdentityMap):
        return np.ones_like(zc, dtype=float) if np.ndim(zc) else 1.0
    raise TypeError(f"unknown map {mapping!r}")


# --------------------------------------------------------------------------
# duality pairings
# --------------------------------------------------------------------------

@dataclass
class DualityPairing:
    """Iso-energetic correspondence between two systems under a map.

    Defining identity, exact at every phase point (not just on-level):
    ``g(z) * (H_target(lift(z, w)) - target_energy)
    = H_source(z, w) - source_energy``.
    """

    mapping: ConformalMap
    source_field: F.ForceField
    source_energy: float
    target_field: F.ForceField
    target_energy: float

    def g(self, z):
        return reparam_factor(self.mapping, z)

    def push_state(self, z, w) -> tuple[np.ndarray, np.ndarray]:
        return lift(self.mapping, z, w)

    def pull_state(self, q, p, branch: Optional[int] = None
                   ) -> tuple[np.ndarray, np.ndarray]:
        branches = inverse_branches(self.mapping, q)
        if branch is None:
            z = branches[0][0]
        else:
            z = next(b[0] for b in branches if b[1] == branch)
        return z, unlift_momentum(self.mapping, z, p)

    def residual(self, z, w) -> float:
        """Defect of the defining identity at one source phase point."""
        q, p = lift(self.mapping, z, w)
        ht = F.hamiltonian(self.target_field, np.concatenate([q, p]))
        hs = F.hamiltonian(self.source_field, np.concatenate([z, w]))
        return float(self.g(z) * (ht - self.target_energy)
                     - (hs - self.source_energy))

    def verify(self, n: int = 100, seed: int = 0, tol: float = 1e-12) -> float:
        """Max scaled residual of the identity at n random phase points."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        count = 0
        while count < n:
            z = rng.uniform(-2.0, 2.0, 2)
            w = rng.uniform(-2.0, 2.0, 2)
            if math.hypot(*z) < 0.3 or math.hypot(z[0] - 1, z[1]) < 0.2 \
                    or math.hypot(z[0] + 1, z[1]) < 0.2:
                continue
            try:
                q, _ = lift(self.mapping, z, w)
                F.potential(self.target_field, q)
                F.potential(self.source_field, z)
            except (F.SingularPointError, BranchPointError):
                continue
            scale = max(1.0, abs(F.hamiltonian(self.source_field,
                                               np.concatenate([z, w]))))
            worst = max(worst, abs(self.residual(z, w)) / scale)
            count += 1
        if worst > tol:
            raise PairingInvariantError(
                f"pairing identity violated: max residual {worst:.3e}")
        return worst


def make_duality(mapping: ConformalMap, target_field: F.ForceField,
                 target_energy: float, *, check: bool = True) -> DualityPairing:
    """Construct the source system paired with ``target_field`` at
    ``target_energy`` under ``mapping``.

    Supported combinations:

    * ``PowerMap(k)`` with ``RadialPower(s, 2/k - 2)`` targets (the general
      power-law duality; k = 2 covers Hooke <-> Kepler),
    * ``PowerMap(2)`` with Kepler / Stark / FrozenHill / SeparableStark /
      Free targets (separable transforms),
    * ``BirkhoffMap`` with TwoCenter targets,
    * ``IdentityMap`` with any field.
    """
    f = -float(target_energy)

    if isinstance(mapping, IdentityMap):
        pairing = DualityPairing(mapping, target_field, target_energy,
                                 target_field, target_energy)
    elif isinstance(mapping, PowerMap):
        k = mapping.k
        if isinstance(target_field, F.RadialPower) and \
                abs(target_field.alpha - (2.0 / k - 2.0)) < 1e-12:
            s = target_field.s
            src = F.Hooke(f) if k == 2 else F.RadialPower(f, 2.0 * k - 2.0)
            if f == 0.0:
                src = F.Free()
            pairing = DualityPairing(mapping, src, -s, target_field,
                                     target_energy)
        elif k == 2 and isinstance(target_field, F.Kepler):
            src = F.Hooke(f) if f != 0.0 else F.Free()
            pairing = DualityPairing(mapping, src, target_field.mu,
                                     target_field, target_energy)
        elif k == 2 and isinstance(target_field, F.Free):
            pairing = DualityPairing(mapping, F.Hooke(f) if f != 0.0 else F.Free(),
                                     0.0, target_field, target_energy)
        elif k == 2 and isinstance(target_field,
                                   (F.Stark, F.FrozenHill, F.SeparableStark)):
            src, e_src = F.z_separable_transform(target_field, f)
            pairing = DualityPairing(mapping, src, e_src, target_field,
                                     target_energy)
        else:
            raise UnsupportedPairingError(
                f"power map k={k} does not pair with {target_field!r}")
    elif isinstance(mapping, BirkhoffMap):
        if not isinstance(target_field, F.TwoCenter):
            raise UnsupportedPairingError(
                f"Birkhoff map pairs with TwoCenter only, got {target_field!r}")
        src = F.KHat(target_field.m1, target_field.m2, f)
        pairing = DualityPairing(mapping, src, 0.0, target_field, target_energy)
    else:
        raise UnsupportedPairingError(f"unknown map {mapping!r}")

    if check:
        pairing.verify(n=16, seed=7, tol=1e-10)
    return pairing


# --------------------------------------------------------------------------
# walls under the map
# --------------------------------------------------------------------------

@dataclass
class ImageWall:
    """Image of a wall component: sampled polyline plus closed form if known."""

    samples: np.ndarray                 # (n, 2) image points
    source_samples: np.ndarray          # (n, 2) source points
    closed: bool
    closed_form: Optional[WallComponent] = None
    conic: Optional[ConicCoeffs] = None


def _catalogued_image(mapping: ConformalMap,
                      comp: WallComponent) -> Optional[list[WallComponent]]:
    """Closed-form image for the catalogued map/conic combinations."""
    info = comp.conic_info
    if info is None:
        return None
    kind = info.get("kind")
    centered = (np.hypot(*info.get("center", (1.0, 1.0))) == 0.0
                and info.get("rotation", 1.0) == 0.0)
    if isinstance(mapping, PowerMap) and mapping.k == 2 and centered:
        a, b = info.get("a"), info.get("b")
        if kind == "circle":
            return conic_wall("circle", a * a, name=f"{comp.name}^2")
        if kind == "ellipse":
            return conic_wall("ellipse", (a * a + b * b) / 2.0, a * b,
                              center=((a * a - b * b) / 2.0, 0.0),
                              name=f"{comp.name}^2")
        if kind == "hyperbola" and a != b:
            return conic_wall("hyperbola", abs(a * a - b * b) / 2.0, a * b,
                              center=((a * a + b * b) / 2.0, 0.0),
                              name=f"{comp.name}^2")
        if kind == "hyperbola" and a == b:
            return [line_wall((a * a, 0.0), (0.0, 1.0),
                              name=f"{comp.name}^2")]
    if isinstance(mapping, PowerMap) and mapping.k == 2 and kind == "line":
        # a line at distance c > 0 from the origin maps to the parabola
        # focused at the origin with axis along the doubled normal angle
        nx, ny = info["normal"]
        c = info["offset"]
        if c != 0.0:
            if c < 0:
                nx, ny, c = -nx, -ny, -c
            alpha = math.atan2(ny, nx)
            return conic_wall("parabola", c, rotation=2.0 * alpha,
                              name=f"{comp.name}^2")
    if isinstance(mapping, BirkhoffMap) and kind == "line" \
            and info.get("offset") == 0.0:
        dx, dy = info["direction"]
        ca, sa = abs(dx), abs(dy)
        if ca > 1e-15 and sa > 1e-15:
            # origin line at angle alpha -> the confocal hyperbola
            # q1^2/cos^2(alpha) - q2^2/sin^2(alpha) = 1 (both branches)
            return conic_wall("hyperbola", ca, sa, name=f"B({comp.name})")
    if isinstance(mapping, BirkhoffMap) and kind == "circle" and centered:
        rho = info.get("a")
        if rho != 1.0:
            ae = 0.5 * (rho + 1.0 / rho)
            be = 0.5 * abs(rho - 1.0 / rho)
            return conic_wall("ellipse", ae, be, name=f"B({comp.name})")
    return None


def map_wall(mapping: ConformalMap, comp: WallComponent,
             n_samples: int = 2048) -> ImageWall:
    """Image of a parametrized wall component under the map.

    Always returns a sampled polyline; attaches the catalogued closed-form
    conic when the (map, source conic) pair is one of the explicit cases.
    """
    if comp.param is None or comp.u_range is None:
        raise ValueError(f"component {comp.name!r} has no parametrization")
    us = np.linspace(comp.u_range[0], comp.u_range[1],
                     n_samples + (0 if comp.closed else 1))
    if comp.closed:
        us = us[:-1] if len(us) > 1 else us
    zs = comp.param(us)
    qs = forward(mapping, zs)
    closed_comps = _catalogued_image(mapping, comp)
    first = closed_comps[0] if closed_comps else None
    return ImageWall(qs, zs, comp.closed, first,
                     first.conic if first is not None else None)


def _pull_value_gradient(mapping: ConformalMap, comp: WallComponent):
    def value(z):
        return comp.value(forward(mapping, z))

    def gradient(z):
        q = forward(mapping, z)
        g = np.asarray(comp.gradient(q), dtype=float)
        gc = _c(g)
        dc = np.conj(derivative(mapping, z))
        return _r(dc * gc)

    return value, gradient


def _branched_param(mapping: ConformalMap, comp: WallComponent, anchor,
                    tours: int):
    """Continuity-tracked preimage parametrization starting from anchor."""
    u0, u1 = comp.u_range
    span = u1 - u0
    grid_u = np.linspace(u0, u0 + tours * span, 1024 * tours)
    fold = u0 + np.mod(grid_u - u0, span) if comp.closed else grid_u
    grid_z = track_inverse(mapping, comp.param(fold), anchor)

    def param_fn(u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        uf = u0 + np.mod(u - u0, span) if comp.closed else u
        target = comp.param(uf)
        ref = np.stack([np.interp(u, grid_u, grid_z[:, 0]),
                        np.interp(u, grid_u, grid_z[:, 1])], axis=-1)
        out = np.empty_like(target)
        for i, (qq, rr) in enumerate(zip(target, ref)):
            brs = inverse_branches(mapping, qq)
            zs = np.array([b[0] for b in brs])
            j = int(np.argmin(np.hypot(zs[:, 0] - rr[0], zs[:, 1] - rr[1])))
            out[i] = zs[j]
        return out

    return param_fn, (u0, u0 + tours * span), grid_z


def pull_wall(mapping: ConformalMap, comp: WallComponent,
              name: Optional[str] = None) -> list[WallComponent]:
    """Exact preimage wall: F_pull = F o forward with chain-rule gradient.

    Returns one component per preimage loop/arc.  A closed target loop whose
    lift swaps branches (it encircles a branch point) yields one component
    whose parametrization runs through several tours of the target
    parameter; otherwise each inverse branch seeds its own component.
    """
    name = name or f"pull({comp.name})"
    value, gradient = _pull_value_gradient(mapping, comp)

    if comp.param is None or comp.u_range is None:
        return [WallComponent(name, value, gradient, reflect=comp.reflect,
                              feature_scale=comp.feature_scale,
                              branch=comp.branch)]

    u0, _ = comp.u_range
    q_start = comp.param(np.array([u0]))[0]
    anchors = inverse_branches(mapping, q_start)
    remaining = {tag: z for z, tag in anchors}
    out = []
    while remaining:
        tag, z_a = next(iter(remaining.items()))
        tours = 1
        grid_z = None
        if comp.closed:
            # extend tours until the tracked lift returns to its anchor
            max_tours = len(anchors)
            for tours in range(1, max_tours + 1):
                param_fn, u_range, grid_z = _branched_param(
                    mapping, comp, z_a, tours)
                if np.hypot(*(grid_z[-1] - z_a)) < 1e-6 * (1 + np.hypot(*z_a)):
                    break
        param_fn, u_range, grid_z = _branched_param(mapping, comp, z_a, tours)
        # anchors consumed by this loop: tracked points at multiples of span
        u0c, u1c = comp.u_range
        span = u1c - u0c
        zj_all = param_fn(np.array([u0c + j * span for j in range(tours)]))
        for zj in zj_all:
            for t2, z2 in list(remaining.items()):
                if np.hypot(*(z2 - zj)) < 1e-8 * (1 + np.hypot(*zj)):
                    del remaining[t2]
        if tag in remaining:
            del remaining[tag]
        scale = float(np.max(np.hypot(grid_z[:, 0], grid_z[:, 1])))
        out.append(WallComponent(
            f"{name}[{tag}]" if len(anchors) > 1 else name, value, gradient,
            reflect=comp.reflect, param=param_fn, u_range=u_range,
            closed=comp.closed, feature_scale=max(scale, 1e-6),
            branch=tag))
    return out


def birkhoff_preimage_circles(b: float) -> tuple[float, float]:
    """Radii of the two centered circles mapping onto the confocal ellipse
    q1^2/(b^2+1) + q2^2/b^2 = 1 (roots of x^2 - 2(2b^2+1)x + 1 in |z|^2)."""
    if b <= 0:
        raise ValueError("ellipse parameter must be positive")
    s = 2.0 * b * b + 1.0
    x1 = s + math.sqrt(s * s - 1.0)
    x2 = s - math.sqrt(s * s - 1.0)
    return math.sqrt(x1), math.sqrt(x2)


def confocal_ellipse_coeffs(b: float) -> ConicCoeffs:
    """Confocal family member q1^2/(b^2+1) + q2^2/b^2 = 1 (foci at +-1)."""
    return ConicCoeffs(1.0 / (b * b + 1.0), 0.0, 1.0 / (b * b), 0.0, 0.0, -1.0)


def confocal_hyperbola_coeffs(b2: float) -> ConicCoeffs:
    """Same family with b^2 = b2 in (-1, 0): a confocal hyperbola."""
    if not -1.0 < b2 < 0.0:
        raise ValueError("hyperbola parameter b^2 must lie in (-1, 0)")
    return ConicCoeffs(1.0 / (b2 + 1.0), 0.0, 1.0 / b2, 0.0, 0.0, -1.0)


# --------------------------------------------------------------------------
# trajectory transport
# --------------------------------------------------------------------------

def push_trajectory(pairing: DualityPairing, traj: Trajectory) -> Trajectory:
    """Map a source trajectory to the target plane, samplewise.

    Times are carried over unchanged from the source: the duality
    reparametrizes time, so they are a path parameter, not target time.
    """
    mapping = pairing.mapping
    arcs = []
    for arc in traj.arcs:
        q, p = lift(mapping, arc.states[:, :2], arc.states[:, 2:])
        arcs.append(Arc(arc.times.copy(), np.hstack([q, p])))
    events = []
    for e in traj.events:
        q = forward(mapping, e.q)
        _, p_in = lift(mapping, e.q, e.p_in)
        _, p_out = lift(mapping, e.q, e.p_out)
        events.append(ReflectionEvent(e.t, q, p_in, p_out, e.component,
                                      e.branch))
    return Trajectory(arcs, events, traj.outcome)
