"""Pure-Python Dormand-Prince 5(4) stepper for planar Hamiltonian fields.

This is the fallback twin of the compiled kernel in ``_native.pyx``: same
tableau, same controller, same operation order, plain C-double arithmetic via
Python floats.  It returns the accepted step grid, the states at the grid
points and the seven stage derivatives of every step (for the quartic dense
output evaluated in :mod:`confbill.billiard`).
"""

from __future__ import annotations

from math import copysign, sqrt

import numpy as np

from .tableau import (
    A21, A31, A32, A41, A42, A43, A51, A52, A53, A54, A61, A62, A63, A64,
    A65, ALPHA, B1, B3, B4, B5, B6, BETA, E1, E3, E4, E5, E6, E7, H_MIN,
    MAX_FACTOR, MIN_FACTOR, SAFETY, STATUS_COLLISION, STATUS_DONE,
    STATUS_STEP_LIMIT, STATUS_UNDERFLOW,
)

BACKEND_NAME = "pure"


def _poly_parts(params, off):
    n = int(params[off])
    coeffs = tuple(float(v) for v in params[off + 1:off + 1 + n])
    return coeffs, off + 1 + n


def _horner(coeffs, x):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _make_accel(code, params, eps_coll):
    """Scalar acceleration closure; returns None within eps_coll of a singularity."""
    eps2 = eps_coll * eps_coll

    if code == 0:  # free
        return lambda x, y: (0.0, 0.0)

    if code == 1:  # hooke
        f2 = 2.0 * params[0]
        return lambda x, y: (-f2 * x, -f2 * y)

    if code == 2:  # kepler
        mu = params[0]

        def acc(x, y):
            r2 = x * x + y * y
            if r2 < eps2:
                return None
            w = mu / (r2 * sqrt(r2))
            return (-x * w, -y * w)
        return acc

    if code == 3:  # radial power
        s, alpha = params[0], params[1]
        singular = (alpha < 2.0 and alpha != 0.0 and s != 0.0)

        def acc(x, y):
            r2 = x * x + y * y
            if singular and r2 < eps2:
                return None
            w = -s * alpha * r2 ** ((alpha - 2.0) / 2.0)
            return (w * x, w * y)
        return acc

    if code == 4:  # stark
        mu, g = params[0], params[1]

        def acc(x, y):
            r2 = x * x + y * y
            if r2 < eps2:
                return None
            w = mu / (r2 * sqrt(r2))
            return (-x * w + g, -y * w)
        return acc

    if code == 5:  # frozen hill
        mu, g = params[0], params[1]

        def acc(x, y):
            r2 = x * x + y * y
            if r2 < eps2:
                return None
            w = mu / (r2 * sqrt(r2))
            return (-x * w + 2.0 * g * x, -y * w + 0.5 * g * y)
        return acc

    if code == 6:  # two centers at (+1, 0), (-1, 0)
        m1, m2 = params[0], params[1]

        def acc(x, y):
            dx1 = x - 1.0
            dx2 = x + 1.0
            r1sq = dx1 * dx1 + y * y
            r2sq = dx2 * dx2 + y * y
            if r1sq < eps2 or r2sq < eps2:
                return None
            w1 = m1 / (r1sq * sqrt(r1sq))
            w2 = m2 / (r2sq * sqrt(r2sq))
            return (-dx1 * w1 - dx2 * w2, -y * w1 - y * w2)
        return acc

    if code == 7:  # z-separable: V = f r^2 + g1(x) + g2(y)
        f = params[0]
        g1, off = _poly_parts(params, 1)
        g2, _ = _poly_parts(params, off)
        d1 = tuple(i * c for i, c in enumerate(g1))[1:] or (0.0,)
        d2 = tuple(i * c for i, c in enumerate(g2))[1:] or (0.0,)
        f2 = 2.0 * f

        def acc(x, y):
            return (-f2 * x - _horner(d1, x), -f2 * y - _horner(d2, y))
        return acc

    if code == 8:  # separable Stark type in the q plane
        g1, off = _poly_parts(params, 0)
        g2, _ = _poly_parts(params, off)
        d1 = tuple(i * c for i, c in enumerate(g1))[1:] or (0.0,)
        d2 = tuple(i * c for i, c in enumerate(g2))[1:] or (0.0,)

        def acc(x, y):
            r2 = x * x + y * y
            if r2 < eps2:
                return None
            r = sqrt(r2)
            if x >= 0.0:
                z1 = sqrt(0.5 * (r + x))
                z2 = 0.5 * y / z1
            else:
                z2 = copysign(sqrt(0.5 * (r - x)), y)
                z1 = 0.5 * y / z2
            zr2 = z1 * z1 + z2 * z2
            N = _horner(g1, z1) + _horner(g2, z2)
            gz1 = _horner(d1, z1) / zr2 - 2.0 * z1 * N / (zr2 * zr2)
            gz2 = _horner(d2, z2) / zr2 - 2.0 * z2 * N / (zr2 * zr2)
            gq1 = (z1 * gz1 - z2 * gz2) / (2.0 * zr2)
            gq2 = (z2 * gz1 + z1 * gz2) / (2.0 * zr2)
            return (-gq1, -gq2)
        return acc

    if code == 9:  # Birkhoff-transformed two-center system
        m1, m2, f = params[0], params[1], params[2]

        def acc(x, y):
            r2 = x * x + y * y
            if r2 < eps2:
                return None
            r = sqrt(r2)
            r3 = r2 * r
            r5 = r3 * r2
            r6 = r2 * r2 * r2
            A = (x + 1.0) * (x + 1.0) + y * y
            B = (x - 1.0) * (x - 1.0) + y * y
            Ax = 2.0 * (x + 1.0)
            Bx = 2.0 * (x - 1.0)
            Ay = 2.0 * y
            By = 2.0 * y
            mAB = m1 * A + m2 * B
            gx = (-(m1 * Ax + m2 * Bx) / (2.0 * r3) + 1.5 * x * mAB / r5
                  + f * (Ax * B + A * Bx) / (4.0 * r2 * r2) - f * A * B * x / r6)
            gy = (-(m1 * Ay + m2 * By) / (2.0 * r3) + 1.5 * y * mAB / r5
                  + f * (Ay * B + A * By) / (4.0 * r2 * r2) - f * A * B * y / r6)
            return (-gx, -gy)
        return acc

    raise ValueError(f"unknown field code {code}")


def integrate(code, params, y0, t0, t_end, rtol, atol, max_steps, h_max,
              eps_coll):
    """Integrate Hamilton's equations from t0 to t_end (t_end >= t0).

    Returns (status, ts, ys, ks, nfev) where ts has shape (n+1,), ys
    (n+1, 4) and ks (n, 7, 4).
    """
    params = np.asarray(params, dtype=float)
    acc = _make_accel(int(code), params, float(eps_coll))

    x1, x2, p1, p2 = (float(v) for v in y0)
    t = float(t0)
    t_end = float(t_end)

    ts = [t]
    ys = [(x1, x2, p1, p2)]
    ks_all = []
    nfev = 0

    def pack(status):
        n = len(ks_all)
        ks = np.array(ks_all, dtype=float).reshape(n, 7, 4)
        return (status, np.array(ts), np.array(ys), ks, nfev)

    a = acc(x1, x2)
    nfev += 1
    if a is None:
        return pack(STATUS_COLLISION)
    k1 = (p1, p2, a[0], a[1])

    if t_end <= t:
        return pack(STATUS_DONE)

    # Hairer-style initial step selection
    sc0 = atol + rtol * abs(x1)
    sc1 = atol + rtol * abs(x2)
    sc2 = atol + rtol * abs(p1)
    sc3 = atol + rtol * abs(p2)
    d0 = sqrt(((x1 / sc0) ** 2 + (x2 / sc1) ** 2 + (p1 / sc2) ** 2
               + (p2 / sc3) ** 2) / 4.0)
    d1 = sqrt(((k1[0] / sc0) ** 2 + (k1[1] / sc1) ** 2 + (k1[2] / sc2) ** 2
               + (k1[3] / sc3) ** 2) / 4.0)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, t_end - t)
    ya = acc(x1 + h0 * k1[0], x2 + h0 * k1[1])
    nfev += 1
    if ya is None:
        h = h0 * 1e-3
    else:
        f1 = (p1 + h0 * k1[2], p2 + h0 * k1[3], ya[0], ya[1])
        d2 = sqrt((((f1[0] - k1[0]) / sc0) ** 2 + ((f1[1] - k1[1]) / sc1) ** 2
                   + ((f1[2] - k1[2]) / sc2) ** 2
                   + ((f1[3] - k1[3]) / sc3) ** 2) / 4.0) / h0
        if max(d1, d2) <= 1e-15:
            h = max(1e-6, h0 * 1e-3)
        else:
            h = (0.01 / max(d1, d2)) ** 0.2
        h = min(100.0 * h0, h)
    h = min(h, h_max, t_end - t)

    err_prev = 1e-4
    rejected = False
    nsteps = 0

    while True:
        if nsteps >= max_steps:
            return pack(STATUS_STEP_LIMIT)
        if not (h >= H_MIN):   # also catches NaN step sizes
            return pack(STATUS_UNDERFLOW)
        last = h >= (t_end - t)
        if last:
            h = t_end - t

        # stage 2
        a = acc(x1 + h * (A21 * k1[0]), x2 + h * (A21 * k1[1]))
        if a is None:
            h *= 0.5
            if h < H_MIN:
                return pack(STATUS_COLLISION)
            continue
        k2 = (p1 + h * (A21 * k1[2]), p2 + h * (A21 * k1[3]), a[0], a[1])
        # stage 3
        a = acc(x1 + h * (A31 * k1[0] + A32 * k2[0]),
                x2 + h * (A31 * k1[1] + A32 * k2[1]))
        if a is None:
            h *= 0.5
            if h < H_MIN:
                return pack(STATUS_COLLISION)
            continue
        k3 = (p1 + h * (A31 * k1[2] + A32 * k2[2]),
              p2 + h * (A31 * k1[3] + A32 * k2[3]), a[0], a[1])
        # stage 4
        a = acc(x1 + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
                x2 + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]))
        if a is None:
            h *= 0.5
            if h < H_MIN:
                return pack(STATUS_COLLISION)
            continue
        k4 = (p1 + h * (A41 * k1[2] + A42 * k2[2] + A43 * k3[2]),
              p2 + h * (A41 * k1[3] + A42 * k2[3] + A43 * k3[3]), a[0], a[1])
        # stage 5
        a = acc(x1 + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
                x2 + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]))
        if a is None:
            h *= 0.5
            if h < H_MIN:
                return pack(STATUS_COLLISION)
            continue
        k5 = (p1 + h * (A51 * k1[2] + A52 * k2[2] + A53 * k3[2] + A54 * k4[2]),
              p2 + h * (A51 * k1[3] + A52 * k2[3] + A53 * k3[3] + A54 * k4[3]),
              a[0], a[1])
        # stage 6
        a = acc(x1 + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0]
                          + A64 * k4[0] + A65 * k5[0]),
                x2 + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1]
                          + A64 * k4[1] + A65 * k5[1]))
        if a is None:
            h *= 0.5
            if h < H_MIN:
                return pack(STATUS_COLLISION)
            continue
        k6 = (p1 + h * (A61 * k1[2] + A62 * k2[2] + A63 * k3[2]
                        + A64 * k4[2] + A65 * k5[2]),
              p2 + h * (A61 * k1[3] + A62 * k2[3] + A63 * k3[3]
                        + A64 * k4[3] + A65 * k5[3]), a[0], a[1])
        # 5th order solution (stage 7 state, FSAL)
        y1_0 = x1 + h * (B1 * k1[0] + B3 * k3[0] + B4 * k4[0] + B5 * k5[0]
                         + B6 * k6[0])
        y1_1 = x2 + h * (B1 * k1[1] + B3 * k3[1] + B4 * k4[1] + B5 * k5[1]
                         + B6 * k6[1])
        y1_2 = p1 + h * (B1 * k1[2] + B3 * k3[2] + B4 * k4[2] + B5 * k5[2]
                         + B6 * k6[2])
        y1_3 = p2 + h * (B1 * k1[3] + B3 * k3[3] + B4 * k4[3] + B5 * k5[3]
                         + B6 * k6[3])
        a = acc(y1_0, y1_1)
        nfev += 6
        if a is None:
            h *= 0.5
            if h < H_MIN:
                return pack(STATUS_COLLISION)
            continue
        k7 = (y1_2, y1_3, a[0], a[1])

        e0 = h * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0]
                  + E6 * k6[0] + E7 * k7[0])
        e1 = h * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1]
                  + E6 * k6[1] + E7 * k7[1])
        e2 = h * (E1 * k1[2] + E3 * k3[2] + E4 * k4[2] + E5 * k5[2]
                  + E6 * k6[2] + E7 * k7[2])
        e3 = h * (E1 * k1[3] + E3 * k3[3] + E4 * k4[3] + E5 * k5[3]
                  + E6 * k6[3] + E7 * k7[3])
        sc0 = atol + rtol * max(abs(x1), abs(y1_0))
        sc1 = atol + rtol * max(abs(x2), abs(y1_1))
        sc2 = atol + rtol * max(abs(p1), abs(y1_2))
        sc3 = atol + rtol * max(abs(p2), abs(y1_3))
        err = sqrt(((e0 / sc0) ** 2 + (e1 / sc1) ** 2 + (e2 / sc2) ** 2
                    + (e3 / sc3) ** 2) / 4.0)
        if err != err:   # NaN state: force rejection until underflow
            err = float("inf")

        if err <= 1.0:
            ks_all.append((k1, k2, k3, k4, k5, k6, k7))
            t = t_end if last else t + h
            x1, x2, p1, p2 = y1_0, y1_1, y1_2, y1_3
            ts.append(t)
            ys.append((x1, x2, p1, p2))
            k1 = k7
            nsteps += 1
            if last:
                return pack(STATUS_DONE)
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = SAFETY * err ** (-ALPHA) * err_prev ** BETA
                factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
            if rejected:
                factor = min(1.0, factor)
            err_prev = max(err, 1e-4)
            rejected = False
            h = min(h * factor, h_max, t_end - t) if t_end > t else h * factor
        else:
            rejected = True
            h *= max(MIN_FACTOR, SAFETY * err ** (-0.2))
