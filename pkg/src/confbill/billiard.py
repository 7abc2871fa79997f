"""Billiard dynamics: arc integration, wall-crossing detection, reflection.

The flow between walls is integrated by an embedded Dormand-Prince 5(4) pair
with PI step control (compiled kernel with a pure-Python fallback, selected
at import in :mod:`confbill._kernel`).  Wall crossings are located on the
quartic dense output of every accepted step, refined by Brent's method, and
resolved by elastic reflection or pass-through according to the component's
reflection mask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import _kernel
from ._kernel.tableau import P as _P
from .fields import EPS_COLL, ForceField, kernel_spec, singular_points, state_array
from .geometry import ProjectionError, WallComponent, as_components, project_to_wall

#: outcomes of a simulation
COMPLETED = "completed"
COLLISION_STOP = "collision-stop"
ESCAPED = "escaped"
STEP_LIMIT = "step-limit"

GRAZE_COS = 1e-8          # |p.n| / (|p||n|) below this counts as grazing
ROOT_EXCLUDE = 1e-12      # roots closer than this to the arc start are ignored
DEFAULT_TOL = 1e-11
DEFAULT_MAX_STEPS = 10 ** 6


class ZeroNormalError(RuntimeError):
    """Reflection attempted at a point with vanishing wall gradient."""


class CollisionStopError(RuntimeError):
    """Arc integration ran into a potential singularity."""


# --------------------------------------------------------------------------
# reflection
# --------------------------------------------------------------------------

def reflect(p, n) -> np.ndarray:
    """Elastic reflection of momentum p at a wall with (unnormalized) normal n.

    Returns ``p - 2 (p.n / |n|^2) n``: the tangential component is kept, the
    normal component is reversed, and |p| is preserved.
    """
    p = np.asarray(p, dtype=float)
    n = np.asarray(n, dtype=float)
    n2 = float(n @ n)
    if n2 == 0.0:
        raise ZeroNormalError("wall normal vanishes at the reflection point")
    return p - (2.0 * float(p @ n) / n2) * n


# --------------------------------------------------------------------------
# dense arcs
# --------------------------------------------------------------------------

_P_ARR = np.asarray(_P)   # (7, 4)


class DenseArc:
    """One integrated arc with quartic dense output on every accepted step."""

    def __init__(self, status: int, ts: np.ndarray, ys: np.ndarray,
                 ks: np.ndarray, nfev: int):
        self.status = status
        self.ts = ts
        self.ys = ys
        self.ks = ks
        self.nfev = nfev

    @property
    def t0(self) -> float:
        return float(self.ts[0])

    @property
    def t1(self) -> float:
        return float(self.ts[-1])

    @property
    def n_steps(self) -> int:
        return len(self.ts) - 1

    def states(self, t) -> np.ndarray:
        """Interpolated states at times t (scalar or array) within [t0, t1]."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(self.ts, t, side="right") - 1, 0,
                      max(self.n_steps - 1, 0))
        h = self.ts[idx + 1] - self.ts[idx]
        theta = np.where(h > 0, (t - self.ts[idx]) / np.where(h > 0, h, 1.0), 0.0)
        # Q_s(theta), shape (m, 7)
        Q = theta[:, None] * (_P_ARR[:, 0]
                              + theta[:, None] * (_P_ARR[:, 1]
                              + theta[:, None] * (_P_ARR[:, 2]
                              + theta[:, None] * _P_ARR[:, 3])))
        out = self.ys[idx] + h[:, None] * np.einsum("ms,msd->md", Q, self.ks[idx])
        return out

    def state(self, t) -> np.ndarray:
        return self.states(t)[0]

    def truncated_samples(self, t_star: float,
                          y_star: Optional[np.ndarray] = None
                          ) -> tuple[np.ndarray, np.ndarray]:
        """(times, states) of accepted samples up to t_star, endpoint included."""
        keep = self.ts < t_star
        times = np.append(self.ts[keep], t_star)
        end = self.state(t_star) if y_star is None else y_star
        states = np.vstack([self.ys[keep], end])
        return times, states


def integrate_arc(field: ForceField, state, t_span, tol: float = DEFAULT_TOL,
                  *, max_steps: int = DEFAULT_MAX_STEPS, h_max: float = math.inf,
                  eps_coll: float = EPS_COLL) -> DenseArc:
    """Integrate the flow of ``field`` over ``t_span = (t0, t1)``.

    ``tol`` is used as both relative and absolute per-step error tolerance
    and must lie in [1e-14, 1e-4].
    """
    if not (1e-14 <= tol <= 1e-4):
        raise ValueError(f"tol must be in [1e-14, 1e-4], got {tol}")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 < t0:
        raise ValueError("backward integration is not supported; negate momenta")
    code, params = kernel_spec(field)
    y0 = state_array(state)
    if not np.all(np.isfinite(y0)):
        raise ValueError(f"non-finite initial state {y0!r}")
    status, ts, ys, ks, nfev = _kernel.integrate(
        code, params, y0, t0, t1, tol, tol, max_steps, h_max, eps_coll)
    arc = DenseArc(status, ts, ys, ks, nfev)
    # a step underflow right next to a singularity is a collision in disguise
    if status == _kernel.STATUS_UNDERFLOW:
        qf = ys[-1, :2]
        for s in singular_points(field):
            if np.hypot(qf[0] - s[0], qf[1] - s[1]) < 1e-6:
                arc.status = _kernel.STATUS_COLLISION
                break
    return arc


def exact_state(field: ForceField, arc: DenseArc, t_star: float,
                tol: float = DEFAULT_TOL) -> np.ndarray:
    """State at t_star to full stepper accuracy (not dense-output accuracy).

    Re-integrates the accepted step containing t_star from its start; used
    to anchor reflection events, whose accuracy dominates reversibility and
    conjugacy errors.
    """
    i = int(np.clip(np.searchsorted(arc.ts, t_star, side="right") - 1, 0,
                    max(arc.n_steps - 1, 0)))
    if t_star <= arc.ts[i]:
        return arc.ys[i].copy()
    code, params = kernel_spec(field)
    status, ts, ys, _, _ = _kernel.integrate(
        code, params, arc.ys[i], float(arc.ts[i]), float(t_star), tol, tol,
        10000, math.inf, EPS_COLL)
    return ys[-1].copy()


# --------------------------------------------------------------------------
# crossing detection
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Crossing:
    """A located intersection of an arc with one wall component."""

    t: float
    q: np.ndarray
    state: np.ndarray
    component: WallComponent
    normal: np.ndarray
    grazing: bool


def _subsample_grid(arc: DenseArc, resolution: float) -> np.ndarray:
    """Global time grid: each step subdivided according to its chord length."""
    ts = arc.ts
    chords = np.hypot(*(np.diff(arc.ys[:, :2], axis=0).T))
    nsub = np.clip(np.ceil(chords / max(resolution, 1e-12)).astype(int) + 1,
                   3, 512)
    pieces = [np.linspace(ts[i], ts[i + 1], nsub[i], endpoint=False)
              for i in range(len(ts) - 1)]
    pieces.append(ts[-1:])
    return np.concatenate(pieces)


def _component_crossing(arc: DenseArc, comp: WallComponent, tgrid, pts,
                        t_lo: float, graze_cos: float) -> Optional[Crossing]:
    """Earliest crossing of the arc with one component after t_lo."""
    fvals = np.asarray(comp.value(pts), dtype=float)
    fscale = max(1.0, float(np.max(np.abs(fvals))))

    def f_of_t(t):
        return float(comp.value(arc.state(t)[:2]))

    def df_of_t(t):
        y = arc.state(t)
        g = np.asarray(comp.gradient(y[:2]), dtype=float)
        return float(g @ y[2:])

    best: Optional[Crossing] = None
    prod = fvals[:-1] * fvals[1:]
    for i in np.flatnonzero(prod < 0.0):
        ta, tb = tgrid[i], tgrid[i + 1]
        if tb <= t_lo + ROOT_EXCLUDE:
            continue
        # reconfirm the bracket through the scalar path: vectorized grid
        # values can differ by 1 ulp, which flips noise-level signs right
        # after a reflection (the arc starts exactly on the wall)
        fa, fb = f_of_t(ta), f_of_t(tb)
        if fa == 0.0:
            t_star = ta
        elif fa * fb >= 0.0:
            continue
        else:
            t_star = brentq(f_of_t, ta, tb, xtol=1e-14, rtol=8.9e-16)
        if t_star <= t_lo + ROOT_EXCLUDE:
            continue
        y = arc.state(t_star)
        n = np.asarray(comp.gradient(y[:2]), dtype=float)
        nn = float(np.hypot(*n))
        pn = float(np.hypot(*y[2:]))
        grazing = nn == 0.0 or abs(float(y[2:] @ n)) < graze_cos * pn * nn
        best = Crossing(t_star, y[:2].copy(), y, comp, n, grazing)
        break

    # tangential touches: interior extrema of F that reach the wall.  The
    # parabolic estimate through three grid values filters true tangencies
    # from near misses before any refinement work.
    if len(fvals) >= 3:
        den = fvals[2:] + fvals[:-2] - 2.0 * fvals[1:-1]
        num = fvals[2:] - fvals[:-2]
        with np.errstate(divide="ignore", invalid="ignore"):
            est = fvals[1:-1] - np.where(den != 0.0, num * num / (8.0 * den), 0.0)
        cand = np.flatnonzero((prod[:-1] > 0) & (prod[1:] > 0)
                              & (np.abs(est) < 1e-5 * fscale)) + 1
        for j in cand:
            ta, tb = tgrid[j - 1], tgrid[j + 1]
            if tb <= t_lo + ROOT_EXCLUDE:
                continue
            if best is not None and ta >= best.t:
                continue
            da, db = df_of_t(ta), df_of_t(tb)
            if da * db >= 0:
                continue
            t_star = brentq(df_of_t, ta, tb, xtol=1e-14, rtol=8.9e-16)
            if t_star <= t_lo + ROOT_EXCLUDE:
                continue
            if abs(f_of_t(t_star)) > 1e-10 * fscale:
                continue
            if best is not None and t_star >= best.t:
                continue
            y = arc.state(t_star)
            n = np.asarray(comp.gradient(y[:2]), dtype=float)
            best = Crossing(t_star, y[:2].copy(), y, comp, n, True)
    return best


def detect_crossing_all(arc: DenseArc, walls, *, t_min: Optional[float] = None,
                        graze_cos: float = GRAZE_COS,
                        resolution: Optional[float] = None) -> list[Crossing]:
    """Earliest crossing per component, sorted by time."""
    comps = as_components(walls)
    if not comps or arc.n_steps == 0:
        return []
    scale = max(c.feature_scale for c in comps)
    if resolution is None:
        resolution = 0.02 * scale
    tgrid = _subsample_grid(arc, resolution)
    pts = arc.states(tgrid)[:, :2]
    t_lo = arc.t0 if t_min is None else t_min
    hits = [_component_crossing(arc, c, tgrid, pts, t_lo, graze_cos)
            for c in comps]
    return sorted((h for h in hits if h is not None), key=lambda h: h.t)


def detect_crossing(arc: DenseArc, walls, *, t_min: Optional[float] = None,
                    graze_cos: float = GRAZE_COS,
                    resolution: Optional[float] = None) -> Optional[Crossing]:
    """Earliest crossing of the arc with any wall component after ``t_min``.

    Grazing contacts (normal momentum fraction below ``graze_cos``, or
    tangential touches located through a sign change of d/dt F) come back
    with ``grazing=True``; the caller decides how to treat them.  Returns
    None when the arc stays on one side of every component.
    """
    hits = detect_crossing_all(arc, walls, t_min=t_min, graze_cos=graze_cos,
                               resolution=resolution)
    return hits[0] if hits else None


# --------------------------------------------------------------------------
# trajectories
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ReflectionEvent:
    t: float
    q: np.ndarray
    p_in: np.ndarray
    p_out: np.ndarray
    component: str
    branch: Optional[int] = None


@dataclass
class Arc:
    times: np.ndarray
    states: np.ndarray


@dataclass
class Trajectory:
    """Ordered arcs separated by reflection events."""

    arcs: list[Arc]
    events: list[ReflectionEvent]
    outcome: str
    source: Optional["Trajectory"] = None

    def samples(self) -> tuple[np.ndarray, np.ndarray]:
        """All (times, states) samples concatenated across arcs."""
        times = np.concatenate([a.times for a in self.arcs])
        states = np.vstack([a.states for a in self.arcs])
        return times, states

    @property
    def final_state(self) -> np.ndarray:
        return self.arcs[-1].states[-1]

    @property
    def t_end(self) -> float:
        return float(self.arcs[-1].times[-1])


def _initial_chunk(field, y0, scale) -> float:
    speed = float(np.hypot(y0[2], y0[3]))
    return scale / max(speed, 0.1)


def simulate(field: ForceField, walls, state0, *,
             n_reflections: Optional[int] = None,
             t_max: Optional[float] = None,
             tol: float = DEFAULT_TOL,
             max_steps: int = DEFAULT_MAX_STEPS,
             escape_radius: Optional[float] = None,
             on_grazing: str = "pass",
             eps_coll: float = EPS_COLL) -> Trajectory:
    """Simulate the mechanical billiard (field + reflecting walls).

    Alternates flow integration, crossing detection and elastic reflection.
    Crossings of components whose reflection mask rejects the hit point are
    pass-throughs (the covering-wall rule); grazing hits follow
    ``on_grazing`` ('pass' or 'stop').
    """
    if n_reflections is None and t_max is None:
        raise ValueError("need a stop condition: n_reflections or t_max")
    comps = as_components(walls)
    y = state_array(state0).copy()
    scale = max([c.feature_scale for c in comps], default=1.0)
    if escape_radius is None:
        escape_radius = 50.0 * scale
    base_chunk = _initial_chunk(field, y, scale)
    chunk = base_chunk

    t = 0.0
    arcs: list[Arc] = []
    events: list[ReflectionEvent] = []
    steps_used = 0
    outcome = None

    while True:
        if n_reflections is not None and len(events) >= n_reflections:
            outcome = COMPLETED
            break
        if t_max is not None and t >= t_max * (1 - 1e-15):
            outcome = COMPLETED
            break
        t_target = t + chunk if t_max is None else min(t + chunk, t_max)
        arc = integrate_arc(field, y, (t, t_target), tol,
                            max_steps=max_steps - steps_used,
                            eps_coll=eps_coll)
        steps_used += arc.n_steps

        stopped_early = arc.status != _kernel.STATUS_DONE
        reflection = None
        grazing_stop = None
        t_scan = t
        while True:
            cands = detect_crossing_all(arc, comps, t_min=t_scan)
            if not cands:
                break
            # resolve all components hit at (numerically) the same time:
            # a reflecting non-grazing member wins, otherwise pass through
            t_first = cands[0].t
            group = [c for c in cands if c.t <= t_first + ROOT_EXCLUDE]
            usable = [c for c in group
                      if not c.grazing and c.component.is_reflecting(c.q)]
            if usable:
                reflection = usable[0]
                break
            if any(c.grazing for c in group) and on_grazing == "stop":
                grazing_stop = group[0]
                break
            t_scan = t_first + ROOT_EXCLUDE

        if reflection is not None:
            # anchor the event at stepper accuracy, then pin it to the wall
            y_star = exact_state(field, arc, reflection.t, tol)
            try:
                q_star = project_to_wall(reflection.component, y_star[:2])
            except ProjectionError:
                q_star = reflection.q
            p_in = y_star[2:].copy()
            n = np.asarray(reflection.component.gradient(q_star), dtype=float)
            p_out = reflect(p_in, n)
            y_event = np.concatenate([q_star, p_in])
            times, states = arc.truncated_samples(reflection.t, y_event)
            arcs.append(Arc(times, states))
            events.append(ReflectionEvent(
                reflection.t, q_star.copy(), p_in, p_out,
                reflection.component.name, reflection.component.branch))
            y = np.concatenate([q_star, p_out])
            t = reflection.t
            chunk = base_chunk
            continue
        if grazing_stop is not None:
            times, states = arc.truncated_samples(grazing_stop.t)
            arcs.append(Arc(times, states))
            outcome = COMPLETED
            break

        arcs.append(Arc(arc.ts.copy(), arc.ys.copy()))
        y = arc.ys[-1].copy()
        t = arc.t1
        if stopped_early:
            outcome = (COLLISION_STOP if arc.status == _kernel.STATUS_COLLISION
                       else STEP_LIMIT)
            break
        if float(np.hypot(y[0], y[1])) > escape_radius:
            outcome = ESCAPED
            break
        if steps_used >= max_steps:
            outcome = STEP_LIMIT
            break
        chunk = min(chunk * 2.0, 64.0 * base_chunk)

    return Trajectory(arcs, events, outcome)


def simulate_via_source(pairing, source_walls, state0_target, *,
                        n_reflections: Optional[int] = None,
                        t_max: Optional[float] = None,
                        tol: float = DEFAULT_TOL,
                        branch: Optional[int] = None,
                        **kw) -> Trajectory:
    """Simulate in the pairing's source plane and push the result forward.

    This is the reference realization of the covering reflection rule: the
    target trajectory reflects exactly where the source trajectory hits the
    source wall, and crosses the image wall everywhere else.  The returned
    target trajectory keeps the source-plane trajectory in ``.source``
    (its times are source times; the duality reparametrizes time).
    """
    from . import conformal  # local import to avoid a cycle

    y0 = state_array(state0_target)
    z, w = pairing.pull_state(y0[:2], y0[2:], branch=branch)
    src = simulate(pairing.source_field, source_walls,
                   np.concatenate([z, w]), n_reflections=n_reflections,
                   t_max=t_max, tol=tol, **kw)
    tgt = conformal.push_trajectory(pairing, src)
    tgt.source = src
    return tgt
