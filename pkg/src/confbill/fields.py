"""Force fields: potentials, accelerations and Hamiltonians.

Sign convention used throughout the package: ``H(q, p) = |p|^2/2 + V(q)``
with unit mass, so ``accel = -grad V``.  The gravitational (Kepler) potential
is ``V = -mu/|q|`` with ``mu > 0`` attractive, and the oscillator (Hooke)
potential is ``V = f |q|^2`` with ``f > 0`` attractive.  See
``docs/sign_conventions.md`` for the translation table to the force-function
convention ``H = T - U``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

#: Distance to a potential singularity below which evaluation refuses and
#: trajectory integration stops with a collision outcome.
EPS_COLL = 1e-9

#: Cap on custom separable polynomial degree.
MAX_POLY_DEGREE = 16


class SingularPointError(ValueError):
    """Evaluation requested within EPS_COLL of a potential singularity."""


class OddCoefficientError(ValueError):
    """A custom separable polynomial has a nonzero odd coefficient."""


# --------------------------------------------------------------------------
# phase state
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseState:
    """Position and momentum in the plane (unit mass)."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_array(cls, y) -> "PhaseState":
        y = np.asarray(y, dtype=float)
        return cls(y[:2].copy(), y[2:].copy())


def state_array(state) -> np.ndarray:
    """Accept a PhaseState, a (q, p) pair, or a flat length-4 array."""
    if isinstance(state, PhaseState):
        return state.as_array()
    arr = np.asarray(state, dtype=float)
    if arr.shape == (2, 2):
        return arr.reshape(4)
    if arr.shape[-1] == 4:
        return arr
    raise ValueError(f"cannot interpret {state!r} as a phase state")


# --------------------------------------------------------------------------
# field variants
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Free:
    """V = 0."""


@dataclass(frozen=True)
class Hooke:
    """V = f |q|^2 (attractive for f > 0)."""

    f: float


@dataclass(frozen=True)
class Kepler:
    """V = -mu / |q| (attractive for mu > 0)."""

    mu: float


@dataclass(frozen=True)
class RadialPower:
    """V = s |q|^alpha."""

    s: float
    alpha: float


@dataclass(frozen=True)
class Stark:
    """V = -mu/|q| - g q1: gravity plus a uniform field along +q1."""

    mu: float
    g: float


@dataclass(frozen=True)
class FrozenHill:
    """V = -mu/|q| - g q1^2 - (g/4) q2^2."""

    mu: float
    g: float


@dataclass(frozen=True)
class TwoCenter:
    """V = -m1/|q - (1,0)| - m2/|q + (1,0)|."""

    m1: float
    m2: float


def _check_even_poly(coeffs) -> tuple[float, ...]:
    c = tuple(float(v) for v in coeffs)
    if len(c) - 1 > MAX_POLY_DEGREE:
        raise ValueError(f"polynomial degree {len(c) - 1} exceeds {MAX_POLY_DEGREE}")
    for i, v in enumerate(c):
        if i % 2 == 1 and v != 0.0:
            raise OddCoefficientError(
                f"coefficient of x^{i} must be exactly zero, got {v}")
    return c


@dataclass(frozen=True)
class SeparableStark:
    """V(q) = (g1(z1) + g2(z2)) / (z1^2 + z2^2) with z either square root of q.

    g1, g2 are even polynomials given as coefficient tuples (constant term
    first).  Both square-root branches give the same potential value, so the
    field is well defined on the punctured plane.  A constant term -mu in
    g1 + g2 contributes the gravitational part -mu/|q|.
    """

    g1: tuple[float, ...]
    g2: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "g1", _check_even_poly(self.g1))
        object.__setattr__(self, "g2", _check_even_poly(self.g2))


@dataclass(frozen=True)
class ZSeparable:
    """V(z) = f |z|^2 + g1(z1) + g2(z2): the square-map transform plane.

    This is the separable system obtained from a Kepler-plus-perturbation
    field at fixed energy -f after the conformal square map and time change.
    """

    f: float
    g1: tuple[float, ...]
    g2: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "g1", _check_even_poly(self.g1))
        object.__setattr__(self, "g2", _check_even_poly(self.g2))


@dataclass(frozen=True)
class KHat:
    """The two-center problem transported through the Birkhoff map.

    V(z) = -m1 |z+1|^2 / (2|z|^3) - m2 |z-1|^2 / (2|z|^3)
           + f |z-1|^2 |z+1|^2 / (4|z|^4).

    Its natural energy level is 0, pairing with the two-center problem at
    energy -f.
    """

    m1: float
    m2: float
    f: float


ForceField = Union[Free, Hooke, Kepler, RadialPower, Stark, FrozenHill,
                   TwoCenter, SeparableStark, ZSeparable, KHat]


def stark_type_from_even_polynomials(g1, g2) -> ForceField:
    """Field whose square-map transform separates as given even polynomials.

    Raises OddCoefficientError when parity is violated.  The all-zero case
    degenerates to free motion.
    """
    field = SeparableStark(tuple(g1), tuple(g2))
    if all(v == 0.0 for v in field.g1) and all(v == 0.0 for v in field.g2):
        return Free()
    return field


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

def _polyval(coeffs: tuple[float, ...], x):
    acc = np.zeros_like(x) if isinstance(x, np.ndarray) else 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _polyder(coeffs: tuple[float, ...]) -> tuple[float, ...]:
    return tuple(i * c for i, c in enumerate(coeffs))[1:] or (0.0,)


def _sqrt_branch(q):
    """Principal square root of q read as a complex number, as a 2-vector."""
    q = np.asarray(q, dtype=float)
    z = np.sqrt(q[..., 0] + 1j * q[..., 1])
    return np.stack([z.real, z.imag], axis=-1)


def singular_points(field: ForceField) -> tuple[np.ndarray, ...]:
    """Points where the potential is singular."""
    if isinstance(field, (Kepler, Stark, FrozenHill, SeparableStark, KHat)):
        return (np.zeros(2),)
    if isinstance(field, RadialPower):
        return (np.zeros(2),) if field.alpha < 2.0 and field.alpha != 0.0 else ()
    if isinstance(field, TwoCenter):
        return (np.array([1.0, 0.0]), np.array([-1.0, 0.0]))
    return ()


def _guard_singular(field, q):
    for s in singular_points(field):
        d = np.hypot(q[..., 0] - s[0], q[..., 1] - s[1])
        if np.any(d < EPS_COLL):
            raise SingularPointError(
                f"{type(field).__name__} evaluated within {EPS_COLL} of {s}")


def potential(field: ForceField, q):
    """Potential V(q); vectorized over leading axes of q."""
    q = np.asarray(q, dtype=float)
    _guard_singular(field, q)
    x, y = q[..., 0], q[..., 1]
    if isinstance(field, Free):
        return np.zeros_like(x) if x.ndim else 0.0
    if isinstance(field, Hooke):
        return field.f * (x * x + y * y)
    if isinstance(field, Kepler):
        return -field.mu / np.hypot(x, y)
    if isinstance(field, RadialPower):
        return field.s * np.hypot(x, y) ** field.alpha
    if isinstance(field, Stark):
        return -field.mu / np.hypot(x, y) - field.g * x
    if isinstance(field, FrozenHill):
        return -field.mu / np.hypot(x, y) - field.g * x * x - 0.25 * field.g * y * y
    if isinstance(field, TwoCenter):
        r1 = np.hypot(x - 1.0, y)
        r2 = np.hypot(x + 1.0, y)
        return -field.m1 / r1 - field.m2 / r2
    if isinstance(field, SeparableStark):
        z = _sqrt_branch(q)
        r2 = x * x + y * y
        return (_polyval(field.g1, z[..., 0]) + _polyval(field.g2, z[..., 1])) / np.sqrt(r2)
    if isinstance(field, ZSeparable):
        return (field.f * (x * x + y * y) + _polyval(field.g1, x)
                + _polyval(field.g2, y))
    if isinstance(field, KHat):
        r2 = x * x + y * y
        r = np.sqrt(r2)
        A = (x + 1.0) ** 2 + y * y
        B = (x - 1.0) ** 2 + y * y
        return (-(field.m1 * A + field.m2 * B) / (2.0 * r * r2)
                + field.f * A * B / (4.0 * r2 * r2))
    raise TypeError(f"unknown field {field!r}")


def accel(field: ForceField, q):
    """Acceleration -grad V(q); analytic, vectorized."""
    q = np.asarray(q, dtype=float)
    _guard_singular(field, q)
    x, y = q[..., 0], q[..., 1]
    if isinstance(field, Free):
        return np.zeros_like(q)
    if isinstance(field, Hooke):
        return -2.0 * field.f * q
    if isinstance(field, Kepler):
        r = np.hypot(x, y)
        return -field.mu * q / r[..., None] ** 3
    if isinstance(field, RadialPower):
        r = np.hypot(x, y)
        fac = -field.s * field.alpha * r ** (field.alpha - 2.0)
        return fac[..., None] * q if q.ndim > 1 else fac * q
    if isinstance(field, Stark):
        r = np.hypot(x, y)
        g = np.stack([-field.mu * x / r**3 + field.g,
                      -field.mu * y / r**3], axis=-1)
        return g
    if isinstance(field, FrozenHill):
        r = np.hypot(x, y)
        return np.stack([-field.mu * x / r**3 + 2.0 * field.g * x,
                         -field.mu * y / r**3 + 0.5 * field.g * y], axis=-1)
    if isinstance(field, TwoCenter):
        dx1, dx2 = x - 1.0, x + 1.0
        r1 = np.hypot(dx1, y) ** 3
        r2 = np.hypot(dx2, y) ** 3
        return np.stack([-field.m1 * dx1 / r1 - field.m2 * dx2 / r2,
                         -field.m1 * y / r1 - field.m2 * y / r2], axis=-1)
    if isinstance(field, SeparableStark):
        # grad_q V = J grad_z Vtil / (4 |z|^2) with J = d(z^2)/dz
        z = _sqrt_branch(q)
        z1, z2 = z[..., 0], z[..., 1]
        zr2 = z1 * z1 + z2 * z2
        N = _polyval(field.g1, z1) + _polyval(field.g2, z2)
        d1 = _polyval(_polyder(field.g1), z1)
        d2 = _polyval(_polyder(field.g2), z2)
        gz1 = d1 / zr2 - 2.0 * z1 * N / zr2**2
        gz2 = d2 / zr2 - 2.0 * z2 * N / zr2**2
        gq1 = (z1 * gz1 - z2 * gz2) / (2.0 * zr2)
        gq2 = (z2 * gz1 + z1 * gz2) / (2.0 * zr2)
        return np.stack([-gq1, -gq2], axis=-1)
    if isinstance(field, ZSeparable):
        return np.stack([-2.0 * field.f * x - _polyval(_polyder(field.g1), x),
                         -2.0 * field.f * y - _polyval(_polyder(field.g2), y)],
                        axis=-1)
    if isinstance(field, KHat):
        r2 = x * x + y * y
        r = np.sqrt(r2)
        A = (x + 1.0) ** 2 + y * y
        B = (x - 1.0) ** 2 + y * y
        Ax, Ay = 2.0 * (x + 1.0), 2.0 * y
        Bx, By = 2.0 * (x - 1.0), 2.0 * y
        mAB = field.m1 * A + field.m2 * B
        gx = (-(field.m1 * Ax + field.m2 * Bx) / (2.0 * r**3)
              + 1.5 * x * mAB / r**5
              + field.f * (Ax * B + A * Bx) / (4.0 * r2 * r2)
              - field.f * A * B * x / (r2 ** 3))
        gy = (-(field.m1 * Ay + field.m2 * By) / (2.0 * r**3)
              + 1.5 * y * mAB / r**5
              + field.f * (Ay * B + A * By) / (4.0 * r2 * r2)
              - field.f * A * B * y / (r2 ** 3))
        return np.stack([-gx, -gy], axis=-1)
    raise TypeError(f"unknown field {field!r}")


def hamiltonian(field: ForceField, state):
    """H = |p|^2/2 + V(q) for a state or an (..., 4) array of states."""
    y = state_array(state)
    q, p = y[..., :2], y[..., 2:]
    return 0.5 * (p[..., 0] ** 2 + p[..., 1] ** 2) + potential(field, q)


# --------------------------------------------------------------------------
# square-map transforms of Stark-type fields
# --------------------------------------------------------------------------

def z_plane_parts(field: ForceField) -> tuple[float, tuple[float, ...], tuple[float, ...]]:
    """Return (mu, g1, g2) such that the square-map transform of the field at
    energy -f is ZSeparable(f, g1, g2) at energy mu.

    mu is the coefficient of the -1/|q| part (the transform's additive
    constant); g1, g2 are the even polynomial parts in (z1, z2).
    """
    if isinstance(field, Kepler):
        return field.mu, (0.0,), (0.0,)
    if isinstance(field, Free):
        return 0.0, (0.0,), (0.0,)
    if isinstance(field, Stark):
        # -g q1 * |z|^2 = -g z1^4 + g z2^4
        g = field.g
        return field.mu, (0.0, 0.0, 0.0, 0.0, -g), (0.0, 0.0, 0.0, 0.0, g)
    if isinstance(field, FrozenHill):
        g = field.g
        z6 = (0.0,) * 6 + (-g,)
        return field.mu, z6, z6
    if isinstance(field, SeparableStark):
        g1, g2 = list(field.g1), list(field.g2)
        # split off the constant part as the gravitational coefficient
        mu = -(g1[0] if g1 else 0.0) - (g2[0] if len(g2) else 0.0)
        if g1:
            g1[0] = 0.0
        if g2:
            g2[0] = 0.0
        return mu, tuple(g1), tuple(g2)
    raise TypeError(f"{type(field).__name__} has no separable square-map transform")


def z_separable_transform(field: ForceField, f: float) -> tuple[ZSeparable, float]:
    """Square-map transform of a Stark-type field on the -f energy level.

    Returns (transformed field, its paired energy level).
    """
    mu, g1, g2 = z_plane_parts(field)
    return ZSeparable(f, g1, g2), mu


# --------------------------------------------------------------------------
# kernel packing
# --------------------------------------------------------------------------

KERNEL_CODES = {
    Free: 0, Hooke: 1, Kepler: 2, RadialPower: 3, Stark: 4, FrozenHill: 5,
    TwoCenter: 6, ZSeparable: 7, SeparableStark: 8, KHat: 9,
}


def kernel_spec(field: ForceField) -> tuple[int, np.ndarray]:
    """(code, parameter vector) consumed by the stepper backends."""
    code = KERNEL_CODES[type(field)]
    if isinstance(field, Free):
        params = []
    elif isinstance(field, Hooke):
        params = [field.f]
    elif isinstance(field, Kepler):
        params = [field.mu]
    elif isinstance(field, RadialPower):
        params = [field.s, field.alpha]
    elif isinstance(field, (Stark, FrozenHill)):
        params = [field.mu, field.g]
    elif isinstance(field, TwoCenter):
        params = [field.m1, field.m2]
    elif isinstance(field, ZSeparable):
        params = [field.f, float(len(field.g1)), *field.g1,
                  float(len(field.g2)), *field.g2]
    elif isinstance(field, SeparableStark):
        params = [float(len(field.g1)), *field.g1,
                  float(len(field.g2)), *field.g2]
    elif isinstance(field, KHat):
        params = [field.m1, field.m2, field.f]
    else:
        raise TypeError(f"unknown field {field!r}")
    return code, np.asarray(params, dtype=float)
