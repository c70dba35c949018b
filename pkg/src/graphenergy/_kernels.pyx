# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled quadrature kernels (Cython backend).

Scalar-loop mirror of the numpy backend in ``_kernels_np``; see that module
for the formula derivations.  All loops run without the GIL so pair-level
thread pools scale.
"""

from libc.math cimport sqrt

__all__ = ["panel_sums_same", "panel_sums_disjoint", "panel_sums_adjacent"]

DEF COLLINEAR_EPS = 1e-12
DEF TINY = 1e-300


cdef inline double _clamp1(double x) nogil:
    if x > 1.0:
        return 1.0
    if x < -1.0:
        return -1.0
    return x


def panel_sums_same(double[:, :, ::1] p1, double[:, :, ::1] d1,
                    double[:, :, ::1] p2, double[:, :, ::1] d2,
                    double[:, ::1] wx, double[:, ::1] wy, double[::1] out):
    """Same-edge integrand (1 - cos theta) |g1'||g2'| / |D|^2."""
    cdef Py_ssize_t n = p1.shape[0], nx = p1.shape[1], ny = p2.shape[1]
    cdef Py_ssize_t k, a, b
    cdef double acc, row, dx, dy, dz, r2, n1, n2, dd1, dd2, d12, cth
    with nogil:
        for k in range(n):
            acc = 0.0
            for a in range(nx):
                n1 = sqrt(d1[k, a, 0] * d1[k, a, 0] + d1[k, a, 1] * d1[k, a, 1]
                          + d1[k, a, 2] * d1[k, a, 2])
                row = 0.0
                for b in range(ny):
                    dx = p2[k, b, 0] - p1[k, a, 0]
                    dy = p2[k, b, 1] - p1[k, a, 1]
                    dz = p2[k, b, 2] - p1[k, a, 2]
                    r2 = dx * dx + dy * dy + dz * dz
                    n2 = sqrt(d2[k, b, 0] * d2[k, b, 0]
                              + d2[k, b, 1] * d2[k, b, 1]
                              + d2[k, b, 2] * d2[k, b, 2])
                    dd1 = d1[k, a, 0] * dx + d1[k, a, 1] * dy + d1[k, a, 2] * dz
                    dd2 = d2[k, b, 0] * dx + d2[k, b, 1] * dy + d2[k, b, 2] * dz
                    d12 = (d1[k, a, 0] * d2[k, b, 0] + d1[k, a, 1] * d2[k, b, 1]
                           + d1[k, a, 2] * d2[k, b, 2])
                    cth = _clamp1((2.0 * dd1 * dd2 / r2 - d12) / (n1 * n2))
                    row += wy[k, b] * (1.0 - cth) * n1 * n2 / r2
                acc += wx[k, a] * row
            out[k] = acc


def panel_sums_disjoint(double[:, :, ::1] p1, double[:, :, ::1] d1,
                        double[:, :, ::1] p2, double[:, :, ::1] d2,
                        double[:, ::1] wx, double[:, ::1] wy, double[::1] out):
    """Disjoint-edge integrand |g1'||g2'| / |D|^2."""
    cdef Py_ssize_t n = p1.shape[0], nx = p1.shape[1], ny = p2.shape[1]
    cdef Py_ssize_t k, a, b
    cdef double acc, row, dx, dy, dz, r2, n1, n2
    with nogil:
        for k in range(n):
            acc = 0.0
            for a in range(nx):
                n1 = sqrt(d1[k, a, 0] * d1[k, a, 0] + d1[k, a, 1] * d1[k, a, 1]
                          + d1[k, a, 2] * d1[k, a, 2])
                row = 0.0
                for b in range(ny):
                    dx = p2[k, b, 0] - p1[k, a, 0]
                    dy = p2[k, b, 1] - p1[k, a, 1]
                    dz = p2[k, b, 2] - p1[k, a, 2]
                    r2 = dx * dx + dy * dy + dz * dz
                    n2 = sqrt(d2[k, b, 0] * d2[k, b, 0]
                              + d2[k, b, 1] * d2[k, b, 1]
                              + d2[k, b, 2] * d2[k, b, 2])
                    row += wy[k, b] * n1 * n2 / r2
                acc += wx[k, a] * row
            out[k] = acc


cdef double _cos_beta(double ax, double ay, double az,
                      double bx, double by, double bz,
                      double wwx, double wwy, double wwz,
                      double ux, double uy, double uz, double sign) nogil:
    """cos angle between circle(A,B,C)'s oriented tangent at C and sign*u.

    a = A-C, b = B-C, w = B-A, u unit; collinear triples use the oriented
    line rule (direction A toward B, flipped when C separates them).
    """
    cdef double la2 = ax * ax + ay * ay + az * az
    cdef double lb = sqrt(bx * bx + by * by + bz * bz)
    cdef double lw = sqrt(wwx * wwx + wwy * wwy + wwz * wwz)
    cdef double s = wwx * (ax + bx) + wwy * (ay + by) + wwz * (az + bz)
    cdef double tx = ax * s - wwx * la2
    cdef double ty = ay * s - wwy * la2
    cdef double tz = az * s - wwz * la2
    cdef double tn = sqrt(tx * tx + ty * ty + tz * tz)
    cdef double scale = lw * (la2 + sqrt(la2) * lb)
    cdef double flip
    if tn <= COLLINEAR_EPS * scale:
        flip = -1.0 if (ax * bx + ay * by + az * bz) < 0.0 else 1.0
        return (wwx * ux + wwy * uy + wwz * uz) * sign * flip / (lw + TINY)
    return (tx * ux + ty * uy + tz * uz) * sign / (tn + TINY)


def panel_sums_adjacent(double[:, :, ::1] p1, double[:, :, ::1] d1,
                        double[:, :, ::1] p2, double[:, :, ::1] d2,
                        double[:, ::1] wx, double[:, ::1] wy, double[::1] v,
                        double cos_alpha, double sin_alpha, double[::1] out):
    """Adjacent integrand (1 - cos(theta + 2 beta - alpha - pi)) |g1'||g2'|/|D|^2.

    ``p1``/``d1`` sample the edge oriented toward the shared vertex ``v``,
    ``p2``/``d2`` the edge oriented away; beta is the smaller of the two
    role-swapped angles (larger cosine).
    """
    cdef Py_ssize_t n = p1.shape[0], nx = p1.shape[1], ny = p2.shape[1]
    cdef Py_ssize_t k, a, b
    cdef double acc, row, dx, dy, dz, r2, n1, n2, dd1, dd2, d12, cth, sth
    cdef double u1x, u1y, u1z, u2x, u2y, u2z
    cdef double cb1, cb2, cb, sb, cos2b, sin2b, ctma, stma, one_minus
    cdef double vx = v[0], vy = v[1], vz = v[2]
    with nogil:
        for k in range(n):
            acc = 0.0
            for a in range(nx):
                n1 = sqrt(d1[k, a, 0] * d1[k, a, 0] + d1[k, a, 1] * d1[k, a, 1]
                          + d1[k, a, 2] * d1[k, a, 2])
                u1x = d1[k, a, 0] / n1
                u1y = d1[k, a, 1] / n1
                u1z = d1[k, a, 2] / n1
                row = 0.0
                for b in range(ny):
                    dx = p2[k, b, 0] - p1[k, a, 0]
                    dy = p2[k, b, 1] - p1[k, a, 1]
                    dz = p2[k, b, 2] - p1[k, a, 2]
                    r2 = dx * dx + dy * dy + dz * dz
                    n2 = sqrt(d2[k, b, 0] * d2[k, b, 0]
                              + d2[k, b, 1] * d2[k, b, 1]
                              + d2[k, b, 2] * d2[k, b, 2])
                    u2x = d2[k, b, 0] / n2
                    u2y = d2[k, b, 1] / n2
                    u2z = d2[k, b, 2] / n2
                    dd1 = u1x * dx + u1y * dy + u1z * dz
                    dd2 = u2x * dx + u2y * dy + u2z * dz
                    d12 = u1x * u2x + u1y * u2y + u1z * u2z
                    cth = _clamp1(2.0 * dd1 * dd2 / r2 - d12)
                    sth = sqrt(1.0 - cth * cth)
                    # beta_ij: circle (v, x, y) at y against u2.
                    cb1 = _cos_beta(vx - p2[k, b, 0], vy - p2[k, b, 1],
                                    vz - p2[k, b, 2],
                                    p1[k, a, 0] - p2[k, b, 0],
                                    p1[k, a, 1] - p2[k, b, 1],
                                    p1[k, a, 2] - p2[k, b, 2],
                                    p1[k, a, 0] - vx, p1[k, a, 1] - vy,
                                    p1[k, a, 2] - vz,
                                    u2x, u2y, u2z, 1.0)
                    # beta_ji: circle (v, y, x) at x against -u1.
                    cb2 = _cos_beta(vx - p1[k, a, 0], vy - p1[k, a, 1],
                                    vz - p1[k, a, 2],
                                    p2[k, b, 0] - p1[k, a, 0],
                                    p2[k, b, 1] - p1[k, a, 1],
                                    p2[k, b, 2] - p1[k, a, 2],
                                    p2[k, b, 0] - vx, p2[k, b, 1] - vy,
                                    p2[k, b, 2] - vz,
                                    u1x, u1y, u1z, -1.0)
                    cb = _clamp1(cb1 if cb1 > cb2 else cb2)
                    sb = sqrt(1.0 - cb * cb)
                    cos2b = 2.0 * cb * cb - 1.0
                    sin2b = 2.0 * sb * cb
                    ctma = cth * cos_alpha + sth * sin_alpha
                    stma = sth * cos_alpha - cth * sin_alpha
                    one_minus = 1.0 + ctma * cos2b - stma * sin2b
                    if one_minus < 0.0:
                        one_minus = 0.0
                    row += wy[k, b] * one_minus * n1 * n2 / r2
                acc += wx[k, a] * row
            out[k] = acc
