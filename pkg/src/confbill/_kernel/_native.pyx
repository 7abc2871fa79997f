# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Dormand-Prince 5(4) stepper; twin of confbill._kernel.pure.

Constants, controller and operation order match the pure-Python backend
exactly so both produce the same floating-point results.
"""

from libc.math cimport sqrt, pow, fabs, copysign

import numpy as np

BACKEND_NAME = "native"

cdef double C2 = 1.0 / 5.0
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0
cdef double A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0
cdef double A42 = -56.0 / 15.0
cdef double A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0
cdef double A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0
cdef double A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0
cdef double A62 = -355.0 / 33.0
cdef double A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0
cdef double A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0
cdef double B3 = 500.0 / 1113.0
cdef double B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0
cdef double B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0
cdef double E3 = -71.0 / 16695.0
cdef double E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0
cdef double E6 = 22.0 / 525.0
cdef double E7 = -1.0 / 40.0

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0
cdef double BETA = 0.04
cdef double ALPHA = 0.2 - 0.75 * BETA
cdef double H_MIN = 1e-15

cdef int STATUS_DONE = 0
cdef int STATUS_COLLISION = 1
cdef int STATUS_UNDERFLOW = 2
cdef int STATUS_STEP_LIMIT = 3


cdef inline void _poly_vd(const double* c, int n, double x,
                          double* val, double* der) noexcept:
    # simultaneous Horner for value and derivative
    cdef double v = 0.0
    cdef double d = 0.0
    cdef int i
    for i in range(n - 1, -1, -1):
        d = d * x + v
        v = v * x + c[i]
    val[0] = v
    der[0] = d


cdef int _accel(int code, const double* fp, double eps2,
                double x, double y, double* ax, double* ay) noexcept:
    """Acceleration at (x, y); returns 1 on singular proximity, else 0."""
    cdef double r2, r, w, w1, w2, dx1, dx2, r1sq, r2sq
    cdef double z1, z2, zr2, N, gz1, gz2, v1, v2, d1, d2
    cdef double r3, r5, r6, A, B, Ax, Bx, Ay, By, mAB, gx, gy
    cdef int n1, n2

    if code == 0:
        ax[0] = 0.0
        ay[0] = 0.0
        return 0
    if code == 1:
        w = 2.0 * fp[0]
        ax[0] = -w * x
        ay[0] = -w * y
        return 0
    if code == 2:
        r2 = x * x + y * y
        if r2 < eps2:
            return 1
        w = fp[0] / (r2 * sqrt(r2))
        ax[0] = -x * w
        ay[0] = -y * w
        return 0
    if code == 3:
        r2 = x * x + y * y
        if fp[1] < 2.0 and fp[1] != 0.0 and fp[0] != 0.0 and r2 < eps2:
            return 1
        w = -fp[0] * fp[1] * pow(r2, (fp[1] - 2.0) / 2.0)
        ax[0] = w * x
        ay[0] = w * y
        return 0
    if code == 4:
        r2 = x * x + y * y
        if r2 < eps2:
            return 1
        w = fp[0] / (r2 * sqrt(r2))
        ax[0] = -x * w + fp[1]
        ay[0] = -y * w
        return 0
    if code == 5:
        r2 = x * x + y * y
        if r2 < eps2:
            return 1
        w = fp[0] / (r2 * sqrt(r2))
        ax[0] = -x * w + 2.0 * fp[1] * x
        ay[0] = -y * w + 0.5 * fp[1] * y
        return 0
    if code == 6:
        dx1 = x - 1.0
        dx2 = x + 1.0
        r1sq = dx1 * dx1 + y * y
        r2sq = dx2 * dx2 + y * y
        if r1sq < eps2 or r2sq < eps2:
            return 1
        w1 = fp[0] / (r1sq * sqrt(r1sq))
        w2 = fp[1] / (r2sq * sqrt(r2sq))
        ax[0] = -dx1 * w1 - dx2 * w2
        ay[0] = -y * w1 - y * w2
        return 0
    if code == 7:
        n1 = <int> fp[1]
        n2 = <int> fp[2 + n1]
        _poly_vd(fp + 2, n1, x, &v1, &d1)
        _poly_vd(fp + 3 + n1, n2, y, &v2, &d2)
        w = 2.0 * fp[0]
        ax[0] = -w * x - d1
        ay[0] = -w * y - d2
        return 0
    if code == 8:
        r2 = x * x + y * y
        if r2 < eps2:
            return 1
        r = sqrt(r2)
        if x >= 0.0:
            z1 = sqrt(0.5 * (r + x))
            z2 = 0.5 * y / z1
        else:
            z2 = copysign(sqrt(0.5 * (r - x)), y)
            z1 = 0.5 * y / z2
        n1 = <int> fp[0]
        n2 = <int> fp[1 + n1]
        _poly_vd(fp + 1, n1, z1, &v1, &d1)
        _poly_vd(fp + 2 + n1, n2, z2, &v2, &d2)
        zr2 = z1 * z1 + z2 * z2
        N = v1 + v2
        gz1 = d1 / zr2 - 2.0 * z1 * N / (zr2 * zr2)
        gz2 = d2 / zr2 - 2.0 * z2 * N / (zr2 * zr2)
        ax[0] = -((z1 * gz1 - z2 * gz2) / (2.0 * zr2))
        ay[0] = -((z2 * gz1 + z1 * gz2) / (2.0 * zr2))
        return 0
    if code == 9:
        r2 = x * x + y * y
        if r2 < eps2:
            return 1
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
        mAB = fp[0] * A + fp[1] * B
        gx = (-(fp[0] * Ax + fp[1] * Bx) / (2.0 * r3) + 1.5 * x * mAB / r5
              + fp[2] * (Ax * B + A * Bx) / (4.0 * r2 * r2)
              - fp[2] * A * B * x / r6)
        gy = (-(fp[0] * Ay + fp[1] * By) / (2.0 * r3) + 1.5 * y * mAB / r5
              + fp[2] * (Ay * B + A * By) / (4.0 * r2 * r2)
              - fp[2] * A * B * y / r6)
        ax[0] = -gx
        ay[0] = -gy
        return 0
    return -1


def integrate(code, params, y0, t0, t_end, rtol, atol, max_steps, h_max,
              eps_coll):
    """Same contract as confbill._kernel.pure.integrate."""
    cdef int ccode = int(code)
    cdef double[::1] pview = np.ascontiguousarray(params, dtype=float)
    cdef double fp[80]
    cdef int np_ = pview.shape[0]
    cdef int i, s
    if np_ > 80:
        raise ValueError("parameter vector too long")
    for i in range(np_):
        fp[i] = pview[i]
    # a zero-length params array still needs a valid pointer
    cdef const double* fpp = &fp[0]

    cdef double eps2 = float(eps_coll) * float(eps_coll)
    cdef double crtol = float(rtol)
    cdef double catol = float(atol)
    cdef double chmax = float(h_max)
    cdef long cmax_steps = int(max_steps)

    cdef double x1, x2, p1, p2, t, tend
    x1 = float(y0[0]); x2 = float(y0[1]); p1 = float(y0[2]); p2 = float(y0[3])
    t = float(t0)
    tend = float(t_end)

    cdef long cap = 512
    ts_arr = np.empty(cap + 1, dtype=float)
    ys_arr = np.empty((cap + 1, 4), dtype=float)
    ks_arr = np.empty((cap, 7, 4), dtype=float)
    cdef double[::1] ts = ts_arr
    cdef double[:, ::1] ys = ys_arr
    cdef double[:, :, ::1] ks = ks_arr

    cdef long n = 0
    cdef long nfev = 0
    ts[0] = t
    ys[0, 0] = x1; ys[0, 1] = x2; ys[0, 2] = p1; ys[0, 3] = p2

    cdef double ax = 0.0, ay = 0.0
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double k5[4]
    cdef double k6[4]
    cdef double k7[4]
    cdef double y1_0, y1_1, y1_2, y1_3
    cdef double e0, e1, e2, e3, sc0, sc1, sc2, sc3
    cdef double d0, d1n, d2n, h0, h, err, err_prev, factor
    cdef double f1_0, f1_1, f1_2, f1_3
    cdef int rejected = 0, last = 0, status = STATUS_DONE, sing

    sing = _accel(ccode, fpp, eps2, x1, x2, &ax, &ay)
    nfev += 1
    if sing:
        return (STATUS_COLLISION, ts_arr[:n + 1].copy(), ys_arr[:n + 1].copy(),
                ks_arr[:n].copy(), int(nfev))
    k1[0] = p1; k1[1] = p2; k1[2] = ax; k1[3] = ay

    if tend <= t:
        return (STATUS_DONE, ts_arr[:n + 1].copy(), ys_arr[:n + 1].copy(),
                ks_arr[:n].copy(), int(nfev))

    sc0 = catol + crtol * fabs(x1)
    sc1 = catol + crtol * fabs(x2)
    sc2 = catol + crtol * fabs(p1)
    sc3 = catol + crtol * fabs(p2)
    d0 = sqrt(((x1 / sc0) ** 2 + (x2 / sc1) ** 2 + (p1 / sc2) ** 2
               + (p2 / sc3) ** 2) / 4.0)
    d1n = sqrt(((k1[0] / sc0) ** 2 + (k1[1] / sc1) ** 2 + (k1[2] / sc2) ** 2
                + (k1[3] / sc3) ** 2) / 4.0)
    h0 = 1e-6 if (d0 < 1e-5 or d1n < 1e-5) else 0.01 * d0 / d1n
    if h0 > tend - t:
        h0 = tend - t
    sing = _accel(ccode, fpp, eps2, x1 + h0 * k1[0], x2 + h0 * k1[1], &ax, &ay)
    nfev += 1
    if sing:
        h = h0 * 1e-3
    else:
        f1_0 = p1 + h0 * k1[2]
        f1_1 = p2 + h0 * k1[3]
        f1_2 = ax
        f1_3 = ay
        d2n = sqrt((((f1_0 - k1[0]) / sc0) ** 2 + ((f1_1 - k1[1]) / sc1) ** 2
                    + ((f1_2 - k1[2]) / sc2) ** 2
                    + ((f1_3 - k1[3]) / sc3) ** 2) / 4.0) / h0
        if max(d1n, d2n) <= 1e-15:
            h = max(1e-6, h0 * 1e-3)
        else:
            h = pow(0.01 / max(d1n, d2n), 0.2)
        h = min(100.0 * h0, h)
    h = min(h, chmax, tend - t)

    err_prev = 1e-4

    while True:
        if n >= cmax_steps:
            return (STATUS_STEP_LIMIT, ts_arr[:n + 1].copy(),
                    ys_arr[:n + 1].copy(), ks_arr[:n].copy(), int(nfev))
        if not (h >= H_MIN):   # also catches NaN step sizes
            return (STATUS_UNDERFLOW, ts_arr[:n + 1].copy(),
                    ys_arr[:n + 1].copy(), ks_arr[:n].copy(), int(nfev))
        last = 1 if h >= (tend - t) else 0
        if last:
            h = tend - t

        sing = _accel(ccode, fpp, eps2,
                      x1 + h * (A21 * k1[0]), x2 + h * (A21 * k1[1]), &ax, &ay)
        if sing:
            h *= 0.5
            if h < H_MIN:
                return (STATUS_COLLISION, ts_arr[:n + 1].copy(),
                    ys_arr[:n + 1].copy(), ks_arr[:n].copy(), int(nfev))
            continue
        k2[0] = p1 + h * (A21 * k1[2]); k2[1] = p2 + h * (A21 * k1[3])
        k2[2] = ax; k2[3] = ay

        sing = _accel(ccode, fpp, eps2,
                      x1 + h * (A31 * k1[0] + A32 * k2[0]),
                      x2 + h * (A31 * k1[1] + A32 * k2[1]), &ax, &ay)
        if sing:
            h *= 0.5
            if h < H_MIN:
                return (STATUS_COLLISION, ts_arr[:n + 1].copy(),
                    ys_arr[:n + 1].copy(), ks_arr[:n].copy(), int(nfev))
            continue
        k3[0] = p1 + h * (A31 * k1[2] + A32 * k2[2])
        k3[1] = p2 + h * (A31 * k1[3] + A32 * k2[3])
        k3[2] = ax; k3[3] = ay

        sing = _accel(ccode, fpp, eps2,
                      x1 + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
                      x2 + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]),
                      &ax, &ay)
        if sing:
            h *= 0.5
            if h < H_MIN:
                return (STATUS_COLLISION, ts_arr[:n + 1].copy(),
                    ys_arr[:n + 1].copy(), ks_arr[:n].copy(), int(nfev))
            continue
        k4[0] = p1 + h * (A41 * k1[2] + A42 * k2[2] + A43 * k3[2])
        k4[1] = p2 + h * (A41 * k1[3] + A42 * k2[3] + A43 * k3[3])
        k4[2] = ax; k4[3] = ay

        sing = _accel(ccode, fpp, eps2,
                      x1 + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0]
                                + A54 * k4[0]),
                      x2 + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1]
                                + A54 * k4[1]), &ax, &ay)
        if sing:
            h *= 0.5
            if h < H_MIN:
                return (STATUS_COLLISION, ts_arr[:n + 1].copy(),
                    ys_arr[:n + 1].copy(), ks_arr[:n].copy(), int(nfev))
            continue
        k5[0] = p1 + h * (A51 * k1[2] + A52 * k2[2] + A53 * k3[2] + A54 * k4[2])
        k5[1] = p2 + h * (A51 * k1[3] + A52 * k2[3] + A53 * k3[3] + A54 * k4[3])
        k5[2] = ax; k5[3] = ay

        sing = _accel(ccode, fpp, eps2,
                      x1 + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0]
                                + A64 * k4[0] + A65 * k5[0]),
                      x2 + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1]
                                + A64 * k4[1] + A65 * k5[1]), &ax, &ay)
        if sing:
            h *= 0.5
            if h < H_MIN:
                return (STATUS_COLLISION, ts_arr[:n + 1].copy(),
                    ys_arr[:n + 1].copy(), ks_arr[:n].copy(), int(nfev))
            continue
        k6[0] = p1 + h * (A61 * k1[2] + A62 * k2[2] + A63 * k3[2]
                          + A64 * k4[2] + A65 * k5[2])
        k6[1] = p2 + h * (A61 * k1[3] + A62 * k2[3] + A63 * k3[3]
                          + A64 * k4[3] + A65 * k5[3])
        k6[2] = ax; k6[3] = ay

        y1_0 = x1 + h * (B1 * k1[0] + B3 * k3[0] + B4 * k4[0] + B5 * k5[0]
                         + B6 * k6[0])
        y1_1 = x2 + h * (B1 * k1[1] + B3 * k3[1] + B4 * k4[1] + B5 * k5[1]
                         + B6 * k6[1])
        y1_2 = p1 + h * (B1 * k1[2] + B3 * k3[2] + B4 * k4[2] + B5 * k5[2]
                         + B6 * k6[2])
        y1_3 = p2 + h * (B1 * k1[3] + B3 * k3[3] + B4 * k4[3] + B5 * k5[3]
                         + B6 * k6[3])
        sing = _accel(ccode, fpp, eps2, y1_0, y1_1, &ax, &ay)
        nfev += 6
        if sing:
            h *= 0.5
            if h < H_MIN:
                return (STATUS_COLLISION, ts_arr[:n + 1].copy(),
                    ys_arr[:n + 1].copy(), ks_arr[:n].copy(), int(nfev))
            continue
        k7[0] = y1_2; k7[1] = y1_3; k7[2] = ax; k7[3] = ay

        e0 = h * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0]
                  + E6 * k6[0] + E7 * k7[0])
        e1 = h * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1]
                  + E6 * k6[1] + E7 * k7[1])
        e2 = h * (E1 * k1[2] + E3 * k3[2] + E4 * k4[2] + E5 * k5[2]
                  + E6 * k6[2] + E7 * k7[2])
        e3 = h * (E1 * k1[3] + E3 * k3[3] + E4 * k4[3] + E5 * k5[3]
                  + E6 * k6[3] + E7 * k7[3])
        sc0 = catol + crtol * max(fabs(x1), fabs(y1_0))
        sc1 = catol + crtol * max(fabs(x2), fabs(y1_1))
        sc2 = catol + crtol * max(fabs(p1), fabs(y1_2))
        sc3 = catol + crtol * max(fabs(p2), fabs(y1_3))
        err = sqrt(((e0 / sc0) ** 2 + (e1 / sc1) ** 2 + (e2 / sc2) ** 2
                    + (e3 / sc3) ** 2) / 4.0)
        if err != err:   # NaN state: force rejection until underflow
            err = float("inf")

        if err <= 1.0:
            if n >= cap:
                cap *= 2
                ts_new = np.empty(cap + 1, dtype=float)
                ys_new = np.empty((cap + 1, 4), dtype=float)
                ks_new = np.empty((cap, 7, 4), dtype=float)
                ts_new[:n + 1] = ts_arr[:n + 1]
                ys_new[:n + 1] = ys_arr[:n + 1]
                ks_new[:n] = ks_arr[:n]
                ts_arr, ys_arr, ks_arr = ts_new, ys_new, ks_new
                ts = ts_arr; ys = ys_arr; ks = ks_arr
            for s in range(4):
                ks[n, 0, s] = k1[s]
                ks[n, 1, s] = k2[s]
                ks[n, 2, s] = k3[s]
                ks[n, 3, s] = k4[s]
                ks[n, 4, s] = k5[s]
                ks[n, 5, s] = k6[s]
                ks[n, 6, s] = k7[s]
            t = tend if last else t + h
            x1 = y1_0; x2 = y1_1; p1 = y1_2; p2 = y1_3
            n += 1
            ts[n] = t
            ys[n, 0] = x1; ys[n, 1] = x2; ys[n, 2] = p1; ys[n, 3] = p2
            for s in range(4):
                k1[s] = k7[s]
            if last:
                return (STATUS_DONE, ts_arr[:n + 1].copy(),
                        ys_arr[:n + 1].copy(), ks_arr[:n].copy(), int(nfev))
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = SAFETY * pow(err, -ALPHA) * pow(err_prev, BETA)
                factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
            if rejected:
                factor = min(1.0, factor)
            err_prev = max(err, 1e-4)
            rejected = 0
            h = min(h * factor, chmax, tend - t) if tend > t else h * factor
        else:
            rejected = 1
            h *= max(MIN_FACTOR, SAFETY * pow(err, -0.2))
