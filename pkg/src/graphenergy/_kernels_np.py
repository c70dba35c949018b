"""Vectorized quadrature kernels (numpy backend).

Each function consumes a batch of tensor-product panels: node positions and
derivatives on the two axes plus jacobian-scaled Gauss weights, and writes
the per-panel weighted integrand sums into ``out``.  The integrands are the
closed-form equivalents of the constructive circle route in :mod:`geom`:

* ``cos theta = 2 (u1.D)(u2.D)/|D|^2 - u1.u2`` for unit tangents u1, u2 at
  points separated by D,
* the oriented tangent of the circle through A, B, C at the final point C is
  parallel to ``a (w.(a+b)) - w |a|^2`` with a = A-C, b = B-C, w = B-A,

both verified against the constructive route to machine precision.  The
adjacent kernel evaluates 1 - cos(theta + 2 beta - alpha - pi) without any
inverse trigonometry, using the smaller of the two role-swapped beta angles
(equivalently the larger cosine); near-collinear triples fall back to the
oriented-line rule of ``geom.circle_through_points``.
"""

import numpy as np

__all__ = ["panel_sums_same", "panel_sums_disjoint", "panel_sums_adjacent"]

# Relative threshold below which a 3-point-circle tangent is treated as the
# collinear line case (matches the constructive route's degenerate branch).
_COLLINEAR_EPS = 1e-12


def _norms(d):
    return np.sqrt((d * d).sum(axis=-1))


def _pair_geometry(p1, d1, p2, d2):
    """Common broadcast quantities: D, r2, speeds and tangent dots."""
    delta = p2[:, None, :, :] - p1[:, :, None, :]
    r2 = (delta * delta).sum(axis=-1)
    n1 = _norms(d1)
    n2 = _norms(d2)
    dd1 = (d1[:, :, None, :] * delta).sum(axis=-1)
    dd2 = (d2[:, None, :, :] * delta).sum(axis=-1)
    d12 = (d1[:, :, None, :] * d2[:, None, :, :]).sum(axis=-1)
    nn = n1[:, :, None] * n2[:, None, :]
    cth = (2.0 * dd1 * dd2 / r2 - d12) / nn
    return r2, nn, np.clip(cth, -1.0, 1.0)


def _contract(wx, wy, kernel, out):
    np.einsum("na,nb,nab->n", wx, wy, kernel, out=out)


def panel_sums_same(p1, d1, p2, d2, wx, wy, out):
    """Same-edge integrand (1 - cos theta) |g1'||g2'| / |D|^2."""
    r2, nn, cth = _pair_geometry(p1, d1, p2, d2)
    _contract(wx, wy, (1.0 - cth) * nn / r2, out)


def panel_sums_disjoint(p1, d1, p2, d2, wx, wy, out):
    """Disjoint-edge integrand |g1'||g2'| / |D|^2."""
    delta = p2[:, None, :, :] - p1[:, :, None, :]
    r2 = (delta * delta).sum(axis=-1)
    nn = _norms(d1)[:, :, None] * _norms(d2)[:, None, :]
    _contract(wx, wy, nn / r2, out)


def _cos_beta(a, b, w, tangent, sign):
    """cos of the angle between circle(A,B,C)'s oriented tangent at C and
    ``sign * tangent`` (unit).  a = A-C, b = B-C, w = B-A, broadcast over the
    node grid; falls back to the oriented-line rule when nearly collinear."""
    la2 = (a * a).sum(axis=-1)
    t = a * (w * (a + b)).sum(axis=-1)[..., None] - w * la2[..., None]
    tn = _norms(t)
    lw = _norms(w)
    scale = lw * (la2 + np.sqrt(la2) * _norms(b))
    generic = (t * tangent).sum(axis=-1) * sign / (tn + 1e-300)
    # Line branch: direction from A toward B, flipped when C separates them
    # on the line, i.e. (C-A).(C-B) < 0  <=>  (-a).(-b) < 0.
    flip = np.where((a * b).sum(axis=-1) < 0.0, -1.0, 1.0)
    line = (w * tangent).sum(axis=-1) * sign * flip / (lw + 1e-300)
    return np.where(tn <= _COLLINEAR_EPS * scale, line, generic)


def panel_sums_adjacent(p1, d1, p2, d2, wx, wy, v, cos_alpha, sin_alpha, out):
    """Adjacent integrand (1 - cos(theta + 2 beta - alpha - pi)) |g1'||g2'|/|D|^2.

    ``p1``/``d1`` sample the edge oriented toward the shared vertex ``v``,
    ``p2``/``d2`` the edge oriented away; beta is the smaller of the two
    role-swapped angles, hence the larger cosine.
    """
    r2, nn, cth = _pair_geometry(p1, d1, p2, d2)
    n1 = _norms(d1)[:, :, None]
    n2 = _norms(d2)[:, None, :]
    u1 = d1[:, :, None, :]
    u2 = d2[:, None, :, :]
    pg1 = p1[:, :, None, :]
    pg2 = p2[:, None, :, :]

    # beta_ij: circle (v, x, y) measured at y against u2 (away tangent).
    cb1 = _cos_beta(v - pg2, pg1 - pg2, pg1 - v, u2 / n2[..., None], 1.0)
    # beta_ji: circle (v, y, x) measured at x against -u1 (away tangent).
    cb2 = _cos_beta(v - pg1, pg2 - pg1, pg2 - v, u1 / n1[..., None], -1.0)

    cb = np.clip(np.maximum(cb1, cb2), -1.0, 1.0)
    sb = np.sqrt(1.0 - cb * cb)
    cos2b = 2.0 * cb * cb - 1.0
    sin2b = 2.0 * sb * cb
    sth = np.sqrt(1.0 - cth * cth)
    ctma = cth * cos_alpha + sth * sin_alpha
    stma = sth * cos_alpha - cth * sin_alpha
    one_minus = np.maximum(1.0 + ctma * cos2b - stma * sin2b, 0.0)
    _contract(wx, wy, one_minus * nn / r2, out)
