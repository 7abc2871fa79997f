"""First integrals of the billiard systems and their invariance checkers.

Every catalogued integral is a :class:`FirstIntegral`: a named, vectorized
evaluator on phase states, tagged with the plane it lives in and an energy
restriction when its conservation only holds on one level.  Checkers verify
flow conservation along integrated trajectories, invariance under sampled
wall reflections, and the wall-factorization structure of reflection
differences; all sampling is seeded and reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import conformal as cf
from .billiard import reflect, simulate
from .fields import ForceField, hamiltonian, potential
from .geometry import WallComponent, as_components, project_to_wall

GRAZE_SKIP = 1e-8     # reflection samples closer to tangency are discarded


def _split(y):
    y = np.asarray(y, dtype=float)
    return y[..., 0], y[..., 1], y[..., 2], y[..., 3]


@dataclass
class FirstIntegral:
    """A named scalar function of phase states.

    ``fn`` accepts shape (4,) or (N, 4) state arrays.  ``plane`` records
    which side of a duality the evaluator lives in ('source-z' or
    'target-q'); ``energy``/``energy_field`` restrict validity to one energy
    hypersurface when set.  ``event_only`` marks quantities that are
    invariants of the reflection sequence but not of the flow (they are
    evaluated at reflection events with outgoing momenta).
    """

    name: str
    params: dict
    fn: Callable[[np.ndarray], np.ndarray]
    plane: str = "target-q"
    energy: Optional[float] = None
    energy_field: Optional[ForceField] = None
    event_only: bool = False

    def __call__(self, y):
        return self.fn(np.asarray(y, dtype=float))


# --------------------------------------------------------------------------
# catalogue
# --------------------------------------------------------------------------

def angular_momentum(y) -> np.ndarray | float:
    """q1 p2 - q2 p1 (about the origin)."""
    x1, x2, p1, p2 = _split(y)
    return x1 * p2 - x2 * p1


def hooke_G(f: float, a: float, e: float) -> FirstIntegral:
    """Centered-conic invariant of the oscillator billiard.

    ``a`` and ``e`` are the semi-major axis and eccentricity of the wall
    conic; the combination a^2 e^2 equals a^2 - b^2 for an ellipse and
    a^2 + b^2 for a hyperbola.  Valid at every energy.
    """
    a2e2 = a * a * e * e

    def fn(y):
        z1, z2, w1, w2 = _split(y)
        L = z1 * w2 - z2 * w1
        return (a2e2 * (2.0 * f * z1 * z1 + w1 * w1) + L * L) / (1.0 + a2e2)

    return FirstIntegral("hooke_G", dict(f=f, a=a, e=e, a2e2=a2e2), fn,
                         plane="source-z")


def hooke_G_from_conic(f: float, kind: str, a: float, b: float) -> FirstIntegral:
    """hooke_G parametrized by the wall conic's semi-axes."""
    if kind == "ellipse":
        a2e2 = a * a - b * b
    elif kind == "hyperbola":
        a2e2 = a * a + b * b
    else:
        raise ValueError(f"no centered-conic invariant for kind {kind!r}")
    e = math.sqrt(a2e2) / a
    return hooke_G(f, a, e)


def confocal_G(f: float, c: float) -> FirstIntegral:
    """Common invariant of the confocal centered family with focal distance c."""
    c2 = c * c

    def fn(y):
        z1, z2, w1, w2 = _split(y)
        L = z1 * w2 - z2 * w1
        return (c2 * (2.0 * f * z1 * z1 + w1 * w1) + L * L) / (1.0 + c2)

    return FirstIntegral("confocal_G", dict(f=f, c=c), fn, plane="source-z")


def hooke_line_integral(f: float) -> FirstIntegral:
    """w1^2 + 2 f z1^2: invariant at lines parallel to either axis."""

    def fn(y):
        z1, _, w1, _ = _split(y)
        return w1 * w1 + 2.0 * f * z1 * z1

    return FirstIntegral("hooke_line", dict(f=f), fn, plane="source-z")


def gallavotti_jauslin_A(mu: float, a_tilde: float) -> FirstIntegral:
    """Kepler billiard invariant for focused conics with center-focus
    distance ``a_tilde``: L^2 - 2 a_tilde (L p2 - mu q1 / |q|).

    The second bracket is mu times the first component of the
    Laplace-Runge-Lenz vector, so the quantity is conserved along the Kepler
    flow at every energy.
    """

    def fn(y):
        q1, q2, p1, p2 = _split(y)
        L = q1 * p2 - q2 * p1
        r = np.hypot(q1, q2)
        return L * L - 2.0 * a_tilde * (L * p2 - mu * q1 / r)

    return FirstIntegral("gallavotti_jauslin_A", dict(mu=mu, a_tilde=a_tilde),
                         fn)


def gj_general(mu: float, l1: float, l2: float) -> FirstIntegral:
    """Two-parameter Gallavotti-Jauslin family.

    L^2 + l1 (L p1 + mu q2/|q|) + l2 (L p2 - mu q1/|q|); reduces to
    gallavotti_jauslin_A at l1 = 0, l2 = -2 a_tilde.
    """

    def fn(y):
        q1, q2, p1, p2 = _split(y)
        L = q1 * p2 - q2 * p1
        r = np.hypot(q1, q2)
        return (L * L + l1 * (L * p1 + mu * q2 / r)
                + l2 * (L * p2 - mu * q1 / r))

    return FirstIntegral("gj_general", dict(mu=mu, l1=l1, l2=l2), fn)


def kepler_parabola_integral(mu: float, axis=(1.0, 0.0)) -> FirstIntegral:
    """Focused-parabola invariant of Kepler billiards: the component of the
    Laplace-Runge-Lenz vector along the parabola axis (times mu).

    This is the normalized a_tilde -> infinity limit of the focused-conic
    family: a parabola is the limiting focused conic, and the L^2 term of
    gallavotti_jauslin_A drops out in that limit.
    """
    d = np.asarray(axis, dtype=float)
    d = d / np.hypot(*d)

    def fn(y):
        q1, q2, p1, p2 = _split(y)
        L = q1 * p2 - q2 * p1
        r = np.hypot(q1, q2)
        return L * (p2 * d[0] - p1 * d[1]) - mu * (q1 * d[0] + q2 * d[1]) / r

    return FirstIntegral("kepler_parabola", dict(mu=mu, axis=tuple(d)), fn)


def joachimsthal(kind: str, a: float, b: float) -> FirstIntegral:
    """Event-indexed free-billiard invariant -1/2 <v, grad f(x)> at the
    reflection points of the centered conic f = x1^2/a^2 +- x2^2/b^2 = 1.

    Equal at consecutive reflection points when evaluated with outgoing
    velocities (the chord argument); not a function constant along the flow.
    """
    s = 1.0 if kind == "ellipse" else -1.0

    def fn(y):
        x1, x2, v1, v2 = _split(y)
        return -(x1 * v1 / (a * a) + s * x2 * v2 / (b * b))

    return FirstIntegral("joachimsthal", dict(kind=kind, a=a, b=b), fn,
                         event_only=True)


def joachimsthal_flow(a: float, b: float, c1: float = 0.0,
                      c2: float = 0.0) -> FirstIntegral:
    """Squared Joachimsthal quantity interpolated along the free flow.

    [ (b^2-(q2-c2)^2) p1^2 + 2 (q1-c1)(q2-c2) p1 p2 + (a^2-(q1-c1)^2) p2^2 ]
    / (a^2 b^2): constant along straight lines, and equal on the wall of the
    ellipse centered at (c1, c2) to the square of the classical Joachimsthal
    quantity.
    """

    def fn(y):
        q1, q2, p1, p2 = _split(y)
        u, v = q1 - c1, q2 - c2
        return ((b * b - v * v) * p1 * p1 + 2.0 * u * v * p1 * p2
                + (a * a - u * u) * p2 * p2) / (a * a * b * b)

    return FirstIntegral("joachimsthal_flow", dict(a=a, b=b, c1=c1, c2=c2), fn)


def parabola_gamma(focus=(0.0, 0.0), axis=(1.0, 0.0)) -> FirstIntegral:
    """Free-billiard parabola invariant: (angular momentum about the focus)
    times the sine of the angle between the velocity and the symmetry axis.
    """
    fq = np.asarray(focus, dtype=float)
    d = np.asarray(axis, dtype=float)
    d = d / np.hypot(*d)

    def fn(y):
        q1, q2, p1, p2 = _split(y)
        C = (q1 - fq[0]) * p2 - (q2 - fq[1]) * p1
        sin_th = (d[0] * p2 - d[1] * p1) / np.hypot(p1, p2)
        return C * sin_th

    return FirstIntegral("parabola_gamma", dict(focus=tuple(fq),
                                                axis=tuple(d)), fn)


def stark_separated(field: ForceField, f: float, plane: str = "source-z",
                    ) -> FirstIntegral:
    """Separated part H1(z1, w1) = w1^2/2 + f z1^2 + g1(z1) of a Stark-type
    system transformed by the square map on the energy level -f.

    ``plane='source-z'`` evaluates in the transform plane (conserved along
    the transformed flow at every energy, invariant at lines parallel to the
    axes).  ``plane='target-q'`` evaluates the same quantity on physical
    states through the inverse square root (branch independent); there it is
    conserved along the physical flow only on the -f level, and invariant at
    focused parabolas with the q1 axis at any energy.
    """
    from .fields import z_plane_parts

    mu, g1, _ = z_plane_parts(field)
    # g1 is even: its value depends on z1 only through z1^2
    even_coeffs = g1[0::2]

    def eval_sq(z1sq, w1sq):
        acc = np.zeros_like(z1sq)
        for c in even_coeffs[::-1]:
            acc = acc * z1sq + c
        return 0.5 * w1sq + f * z1sq + acc

    if plane == "source-z":
        def fn(y):
            z1, _, w1, _ = _split(y)
            return eval_sq(z1 * z1, w1 * w1)
        energy = None
        efield = None
    elif plane == "target-q":
        def fn(y):
            q1, q2, p1, p2 = _split(y)
            r = np.hypot(q1, q2)
            z1sq = 0.5 * (q1 + r)
            w1sq = 0.5 * (p1 * p1 * q1 - p2 * p2 * q1 + 2.0 * p1 * p2 * q2
                          + (p1 * p1 + p2 * p2) * r)
            return eval_sq(z1sq, w1sq)
        energy = -f
        efield = field
    else:
        raise ValueError(f"unknown plane {plane!r}")

    return FirstIntegral("stark_H1", dict(field=type(field).__name__, f=f,
                                          mu=mu, g1=g1), fn, plane=plane,
                         energy=energy, energy_field=efield)


def two_center_radial(m1: float, m2: float, f: float,
                      plane: str = "source-z") -> FirstIntegral:
    """Radial separation constant of the Birkhoff-transformed two-center
    system: r^2 p_r^2 - (m1+m2)(r^2+1)/r + f (r^2+1)^2 / (2 r^2).

    Conserved along the transformed flow on its zero-energy level and
    invariant under reflections at centered circles and lines through the
    origin (p_r^2 is unchanged by both).  With ``plane='target-q'`` the same
    quantity is evaluated on two-center states through the inverse Birkhoff
    lift (branch independent); it is then invariant at confocal
    ellipse/hyperbola walls, and conserved along the flow on energy -f.
    """

    def fn_z(y):
        z1, z2, w1, w2 = _split(y)
        r2 = z1 * z1 + z2 * z2
        r = np.sqrt(r2)
        rpr = z1 * w1 + z2 * w2          # r * p_r
        return (rpr * rpr - (m1 + m2) * (r2 + 1.0) / r
                + f * (r2 + 1.0) ** 2 / (2.0 * r2))

    if plane == "source-z":
        from .fields import KHat
        return FirstIntegral("two_center_I_r", dict(m1=m1, m2=m2, f=f), fn_z,
                             plane="source-z", energy=0.0,
                             energy_field=KHat(m1, m2, f))
    if plane == "target-q":
        from .fields import TwoCenter
        mapping = cf.BirkhoffMap()

        def fn(y):
            y = np.atleast_2d(np.asarray(y, dtype=float))
            qc = y[..., 0] + 1j * y[..., 1]
            zc = qc + np.sqrt(qc * qc - 1.0 + 0.0j)
            z = np.stack([zc.real, zc.imag], axis=-1)
            w = cf.unlift_momentum(mapping, z, y[..., 2:])
            out = fn_z(np.concatenate([z, w], axis=-1))
            return out if out.shape != (1,) else float(out[0])

        return FirstIntegral("two_center_I_r", dict(m1=m1, m2=m2, f=f), fn,
                             plane="target-q", energy=-f,
                             energy_field=TwoCenter(m1, m2))
    raise ValueError(f"unknown plane {plane!r}")


def elliptic_coords(q) -> tuple[float, float]:
    """Elliptic-hyperbolic coordinates: half sum/difference of distances to
    the centers (+-1, 0); xi-levels are confocal ellipses, eta-levels
    confocal hyperbola branches."""
    q = np.asarray(q, dtype=float)
    r1 = np.hypot(q[..., 0] - 1.0, q[..., 1])
    r2 = np.hypot(q[..., 0] + 1.0, q[..., 1])
    return 0.5 * (r1 + r2), 0.5 * (r1 - r2)


def pullback_integral(mapping, integral: FirstIntegral) -> FirstIntegral:
    """Compose a target-plane integral with the cotangent lift.

    The result evaluates on source-plane states.  An energy restriction on
    the target side has no direct source-plane meaning and must be supplied
    by the caller through the pairing; it is dropped here.
    """

    def fn(y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        q, p = cf.lift(mapping, y[..., :2], y[..., 2:])
        out = np.asarray(integral.fn(np.concatenate([q, p], axis=-1)))
        return out if out.shape != (1,) else float(out[0])

    return FirstIntegral(f"pullback({integral.name})", dict(integral.params),
                         fn, plane="source-z", event_only=integral.event_only)


def pushforward_integral(mapping, integral: FirstIntegral) -> FirstIntegral:
    """Compose a source-plane integral with an inverse branch of the lift.

    Only valid for integrals that take equal values on all inverse branches
    (true for the catalogued even quantities); verified by tests.
    """

    def fn(y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        out = np.empty(y.shape[0])
        for i, row in enumerate(y):
            z = cf.principal_inverse(mapping, row[:2])
            w = cf.unlift_momentum(mapping, z, row[2:])
            out[i] = integral.fn(np.concatenate([z, w]))
        return out if out.shape != (1,) else float(out[0])

    return FirstIntegral(f"pushforward({integral.name})",
                         dict(integral.params), fn, plane="target-q",
                         event_only=integral.event_only)


# --------------------------------------------------------------------------
# reports and checkers
# --------------------------------------------------------------------------

@dataclass
class InvarianceReport:
    """Outcome of a conservation/invariance check."""

    name: str
    kind: str
    n_samples: int
    max_violation: float
    mean_violation: float
    verdict: str                      # invariant | violated | not-applicable
    tol: float
    seed: Optional[int] = None
    witness: Optional[np.ndarray] = None
    params: dict = field(default_factory=dict)

    def format(self) -> str:
        lines = [
            f"name: {self.name}",
            f"kind: {self.kind}",
            f"params: {_fmt_params(self.params)}",
            f"seed: {self.seed if self.seed is not None else '-'}",
            f"n: {self.n_samples}",
            f"max_violation: {self.max_violation:.17g}",
            f"mean_violation: {self.mean_violation:.17g}",
            f"tol: {self.tol:.17g}",
            f"verdict: {self.verdict}",
        ]
        if self.witness is not None:
            w = " ".join(f"{v:.17g}" for v in np.asarray(self.witness).ravel())
            lines.append(f"witness: {w}")
        return "\n".join(lines) + "\n"


def _fmt_params(params: dict) -> str:
    items = []
    for k in sorted(params):
        v = params[k]
        if isinstance(v, float):
            items.append(f"{k}={v:.17g}")
        else:
            items.append(f"{k}={v}")
    return " ".join(items) if items else "-"


def _scaled(diff, ref) -> np.ndarray:
    return np.abs(diff) / np.maximum(1.0, np.abs(ref))


def check_flow_conservation(field: ForceField, integral: FirstIntegral,
                            state0, *, t_max: Optional[float] = None,
                            walls=None, n_reflections: Optional[int] = None,
                            flow_tol: float = 1e-11, tol: float = 1e-8,
                            ) -> InvarianceReport:
    """Drift of the integral along an integrated (billiard) trajectory.

    Fixed-energy integrals refuse off-level initial states with a
    not-applicable verdict.  The drift is evaluated on all accepted samples,
    scaled by max(1, |I(initial)|).
    """
    y0 = np.asarray(state0, dtype=float)
    if integral.energy is not None:
        efield = integral.energy_field if integral.energy_field is not None \
            else field
        h0 = hamiltonian(efield, y0)
        if abs(h0 - integral.energy) > 1e-9 * max(1.0, abs(integral.energy)):
            return InvarianceReport(
                integral.name, "flow", 0, math.nan, math.nan,
                "not-applicable", tol, params=dict(integral.params,
                                                   state_energy=h0))
    traj = simulate(field, as_components(walls), y0,
                    n_reflections=n_reflections,
                    t_max=t_max if n_reflections is None else None,
                    tol=flow_tol)
    _, states = traj.samples()
    vals = np.atleast_1d(np.asarray(integral.fn(states), dtype=float))
    i0 = vals[0]
    viol = _scaled(vals - i0, i0)
    verdict = "invariant" if viol.max() <= tol else "violated"
    witness = states[int(viol.argmax())] if verdict == "violated" else None
    return InvarianceReport(integral.name, "flow", len(vals),
                            float(viol.max()), float(viol.mean()), verdict,
                            tol, witness=witness,
                            params=dict(integral.params,
                                        outcome=traj.outcome,
                                        n_events=len(traj.events)))


def _component_lengths(comps) -> np.ndarray:
    return np.array([c.total_length() for c in comps])


def sample_wall_states(walls, n: int, seed: int, *,
                       speed: float | tuple = 1.0,
                       graze_skip: float = GRAZE_SKIP,
                       ) -> tuple[np.ndarray, np.ndarray, list[WallComponent]]:
    """Deterministic on-wall states: arc-length-uniform points, directions
    uniform on the circle, momenta scaled to ``speed``.

    ``speed`` may be a constant or ('energy', field, e): then |p| is set
    from the energy at the sampled point and forbidden points are skipped.
    Near-grazing samples are discarded.  Returns (points, momenta, comps).
    """
    comps = as_components(walls)
    rng = np.random.default_rng(seed)
    lengths = _component_lengths(comps)
    weights = lengths / lengths.sum()
    pts = np.empty((n, 2))
    ps = np.empty((n, 2))
    owners: list[WallComponent] = []
    count = 0
    attempts = 0
    while count < n:
        attempts += 1
        if attempts > 100 * n:
            raise RuntimeError("wall sampling keeps hitting excluded states")
        ci = int(rng.choice(len(comps), p=weights))
        comp = comps[ci]
        s = rng.uniform(0.0, lengths[ci])
        q = comp.points_at_arclength(np.array([s]))[0]
        th = rng.uniform(0.0, 2.0 * math.pi)
        d = np.array([math.cos(th), math.sin(th)])
        if isinstance(speed, tuple):
            _, fld, e_level = speed
            v = potential(fld, q)
            if e_level - v <= 0.0:
                continue
            sp = math.sqrt(2.0 * (e_level - v))
        else:
            sp = float(speed)
        p = sp * d
        nvec = np.asarray(comp.gradient(q), dtype=float)
        nn = np.hypot(*nvec)
        if nn == 0.0 or abs(p @ nvec) < graze_skip * sp * nn:
            continue
        pts[count] = q
        ps[count] = p
        owners.append(comp)
        count += 1
    return pts, ps, owners


def check_reflection_invariance(walls, integral: FirstIntegral,
                                n_samples: int = 1000, seed: int = 0, *,
                                tol: float = 1e-11,
                                speed: float | tuple = 1.0,
                                ) -> InvarianceReport:
    """Invariance of the integral under sampled elastic reflections.

    Samples on-wall states (arc-length uniform, directions uniform, fixed
    seed), reflects, compares the integral before and after, scaled by
    max(1, |before|).
    """
    pts, ps, owners = sample_wall_states(walls, n_samples, seed, speed=speed)
    worst = -1.0
    total = 0.0
    witness = None
    for q, p, comp in zip(pts, ps, owners):
        n = np.asarray(comp.gradient(q), dtype=float)
        p2 = reflect(p, n)
        before = float(integral.fn(np.concatenate([q, p])))
        after = float(integral.fn(np.concatenate([q, p2])))
        v = abs(after - before) / max(1.0, abs(before))
        total += v
        if v > worst:
            worst = v
            witness = np.concatenate([q, p])
    verdict = "invariant" if worst <= tol else "violated"
    return InvarianceReport(integral.name, "reflection", n_samples, worst,
                            total / n_samples, verdict, tol, seed=seed,
                            witness=witness if verdict == "violated" else None,
                            params=dict(integral.params))


def check_event_invariance(traj, integral: FirstIntegral,
                           tol: float = 1e-10) -> InvarianceReport:
    """Constancy of an event-indexed integral along a trajectory's events,
    evaluated with outgoing momenta."""
    vals = np.array([float(integral.fn(np.concatenate([e.q, e.p_out])))
                     for e in traj.events])
    if len(vals) == 0:
        return InvarianceReport(integral.name, "events", 0, math.nan,
                                math.nan, "not-applicable", tol,
                                params=dict(integral.params))
    viol = _scaled(vals - vals[0], vals[0])
    verdict = "invariant" if viol.max() <= tol else "violated"
    return InvarianceReport(integral.name, "events", len(vals),
                            float(viol.max()), float(viol.mean()), verdict,
                            tol, params=dict(integral.params))


@dataclass
class FactorizationReport:
    """On-wall vanishing plus off-wall linear growth of the reflection
    difference of an integral."""

    name: str
    on_wall_max: float
    on_tol: float
    distances: np.ndarray
    mean_diffs: np.ndarray
    mean_fvals: np.ndarray
    slope: float
    verdict: str
    seed: int

    def format(self) -> str:
        rows = " ".join(f"{d:.3g}:{m:.6g}" for d, m in
                        zip(self.distances, self.mean_diffs))
        return "\n".join([
            f"name: {self.name}",
            f"kind: factorization",
            f"seed: {self.seed}",
            f"on_wall_max: {self.on_wall_max:.17g}",
            f"on_tol: {self.on_tol:.17g}",
            f"offsets: {rows}",
            f"loglog_slope: {self.slope:.17g}",
            f"verdict: {self.verdict}",
        ]) + "\n"


def factorization_check(walls, integral: FirstIntegral, n_samples: int = 200,
                        seed: int = 0, *, on_tol: float = 1e-11,
                        ) -> FactorizationReport:
    """Verify that the reflection difference of the integral carries the
    wall equation as a factor.

    On the wall the difference must vanish (max scaled difference at
    ``n_samples`` states below ``on_tol``); displaced off the wall along the
    normal, the mean |difference| must grow linearly with the mean |F|
    (log-log slope within [0.7, 1.3]).
    """
    comps = as_components(walls)
    pts, ps, owners = sample_wall_states(comps, n_samples, seed)
    on_max = 0.0
    for q, p, comp in zip(pts, ps, owners):
        n = np.asarray(comp.gradient(q), dtype=float)
        p2 = reflect(p, n)
        before = float(integral.fn(np.concatenate([q, p])))
        after = float(integral.fn(np.concatenate([q, p2])))
        on_max = max(on_max, abs(after - before) / max(1.0, abs(before)))

    distances = np.array([1e-6, 1e-5, 1e-4, 1e-3, 1e-2])
    m = max(20, n_samples // 5)
    pts2, ps2, owners2 = sample_wall_states(comps, m, seed + 1)
    mean_diffs = np.empty(len(distances))
    mean_fvals = np.empty(len(distances))
    for k, dist in enumerate(distances):
        acc_d = 0.0
        acc_f = 0.0
        for q, p, comp in zip(pts2, ps2, owners2):
            n = np.asarray(comp.gradient(q), dtype=float)
            qd = q + dist * n / np.hypot(*n)
            nd = np.asarray(comp.gradient(qd), dtype=float)
            p2 = reflect(p, nd)
            before = float(integral.fn(np.concatenate([qd, p])))
            after = float(integral.fn(np.concatenate([qd, p2])))
            acc_d += abs(after - before)
            acc_f += abs(float(comp.value(qd)))
        mean_diffs[k] = acc_d / m
        mean_fvals[k] = acc_f / m
    slope = float(np.polyfit(np.log(mean_fvals), np.log(mean_diffs), 1)[0])
    ok = on_max <= on_tol and 0.7 <= slope <= 1.3 \
        and bool(np.all(np.diff(mean_diffs) > 0))
    return FactorizationReport(integral.name, on_max, on_tol, distances,
                               mean_diffs, mean_fvals, slope,
                               "factorized" if ok else "violated", seed)
