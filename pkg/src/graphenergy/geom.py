"""Oriented circles and lines, conformal angles, Mobius maps of R^3, and
stereographic projection from the unit 3-sphere.

Conventions
-----------
Points and directions are numpy arrays of shape (3,) (or (4,) on the
sphere).  An oriented circle is traversed counterclockwise when viewed from
the tip of its plane normal.  All angle values are returned in [0, pi] as
arccos of a clamped dot product.
"""

import numpy as np

__all__ = [
    "GeometryError",
    "DegenerateInputError",
    "IncidenceError",
    "PoleError",
    "OrientedCircleOrLine",
    "Inversion",
    "Similarity",
    "MobiusMap",
    "circle_through_points",
    "tangent_circle",
    "tangent_at",
    "angle_between_circles_at",
    "conformal_angle_theta",
    "beta_angle",
    "apply_mobius",
    "mobius_differential",
    "random_mobius_map",
    "stereographic_project",
    "stereographic_differential",
]

# Collinearity: a triple is a line when the circumradius would exceed this
# factor times the point-spread diameter (double precision conditioning).
_COLLINEAR_RADIUS_FACTOR = 1e8
# Relative tolerance for incidence checks (point on circle/line).
_INCIDENCE_RTOL = 1e-9
# Floor under which a direction vector cannot be normalized.
_TINY = 1e-300


class GeometryError(ValueError):
    """Base class for geometric construction failures."""


class DegenerateInputError(GeometryError):
    """Coincident or otherwise degenerate input points."""


class IncidenceError(GeometryError):
    """A point does not lie on the object it was claimed to lie on."""


class PoleError(GeometryError):
    """Evaluation at (or too close to) a pole of a conformal map."""


def _unit(v):
    n = np.linalg.norm(v)
    if n < _TINY:
        raise DegenerateInputError("cannot normalize a zero vector")
    return v / n


def _clamped_arccos(x):
    return float(np.arccos(np.clip(x, -1.0, 1.0)))


class OrientedCircleOrLine:
    """An oriented circle (center, radius, plane normal) or oriented line
    (base point, direction).

    Parameters
    ----------
    kind : str
        Either ``"circle"`` or ``"line"``.
    center, radius, normal :
        Circle data; traversal is counterclockwise viewed from the normal.
    base, direction :
        Line data; traversal follows ``direction``.
    """

    __slots__ = ("kind", "center", "radius", "normal", "base", "direction")

    def __init__(self, kind, center=None, radius=None, normal=None,
                 base=None, direction=None):
        self.kind = kind
        if kind == "circle":
            if radius is None or radius <= 0:
                raise DegenerateInputError("circle radius must be positive")
            self.center = np.asarray(center, dtype=float)
            self.radius = float(radius)
            self.normal = _unit(np.asarray(normal, dtype=float))
            self.base = None
            self.direction = None
        elif kind == "line":
            self.base = np.asarray(base, dtype=float)
            self.direction = _unit(np.asarray(direction, dtype=float))
            self.center = None
            self.radius = None
            self.normal = None
        else:
            raise ValueError("kind must be 'circle' or 'line'")

    def contains(self, p, rtol=_INCIDENCE_RTOL):
        """Whether ``p`` lies on the object within a relative tolerance."""
        p = np.asarray(p, dtype=float)
        if self.kind == "circle":
            scale = self.radius
            w = p - self.center
            radial = abs(np.linalg.norm(w - (w @ self.normal) * self.normal)
                         - self.radius)
            planar = abs(w @ self.normal)
            return radial <= rtol * scale + 1e-30 and planar <= rtol * scale + 1e-30
        w = p - self.base
        off = np.linalg.norm(w - (w @ self.direction) * self.direction)
        scale = max(1.0, np.linalg.norm(w))
        return off <= rtol * scale + 1e-30

    def __repr__(self):
        if self.kind == "circle":
            return ("OrientedCircleOrLine(circle, center=%s, radius=%g, "
                    "normal=%s)" % (self.center, self.radius, self.normal))
        return "OrientedCircleOrLine(line, base=%s, direction=%s)" % (
            self.base, self.direction)


def circle_through_points(a, b, c):
    """Oriented circle (or line) through three points.

    The orientation is the traversal that visits ``a``, ``b``, ``c`` in this
    cyclic order.  Collinear triples degrade to an oriented line; the cyclic
    order on the projective line (through infinity when the visit pattern
    requires it) fixes the direction.

    Parameters
    ----------
    a, b, c : array_like, shape (3,)
        Pairwise distinct points.

    Returns
    -------
    OrientedCircleOrLine
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    u = b - a
    w = c - a
    bc = c - b
    lu, lw, lbc = np.linalg.norm(u), np.linalg.norm(w), np.linalg.norm(bc)
    if lu < _TINY or lw < _TINY or lbc < _TINY:
        raise DegenerateInputError("circle_through_points needs distinct points")
    n = np.cross(u, w)
    ln = np.linalg.norm(n)
    diam = max(lu, lw, lbc)
    # circumradius R = |u||w||bc| / (2|u x w|); line when R > factor * diam
    if lu * lw * lbc >= _COLLINEAR_RADIUS_FACTOR * diam * 2.0 * ln:
        # Visit order a -> b -> c on a line: direction is from a toward b,
        # reversed when c lies strictly inside segment (a, b) (the traversal
        # then passes through infinity).
        d = u / lu
        if (c - a) @ (c - b) < 0.0:
            d = -d
        return OrientedCircleOrLine("line", base=a, direction=d)
    nhat = n / ln
    # Circumcenter in the plane basis (e1, e2).
    e1 = u / lu
    e2 = _unit(w - (w @ e1) * e1)
    u2 = np.array([u @ e1, 0.0])
    w2 = np.array([w @ e1, w @ e2])
    mat = 2.0 * np.array([u2, w2])
    rhs = np.array([u2 @ u2, w2 @ w2])
    sol = np.linalg.solve(mat, rhs)
    center = a + sol[0] * e1 + sol[1] * e2
    radius = float(np.linalg.norm(a - center))
    # normal (u x w) makes the counterclockwise traversal visit a, b, c.
    return OrientedCircleOrLine("circle", center=center, radius=radius,
                                normal=nhat)


def tangent_circle(p, d, q):
    """Oriented circle tangent to direction ``d`` at ``p`` and through ``q``.

    The orientation makes the traversal at ``p`` move along ``+d``.  When
    ``q`` lies on the tangent line the construction degrades to the oriented
    line through ``p`` with direction ``d``.

    Parameters
    ----------
    p : array_like, shape (3,)
        Tangency point.
    d : array_like, shape (3,)
        Unit tangent direction at ``p``.
    q : array_like, shape (3,)
        Second point on the circle, distinct from ``p``.

    Returns
    -------
    OrientedCircleOrLine
    """
    p = np.asarray(p, dtype=float)
    d = _unit(np.asarray(d, dtype=float))
    q = np.asarray(q, dtype=float)
    e = q - p
    le = np.linalg.norm(e)
    if le < _TINY:
        raise DegenerateInputError("tangent_circle needs p != q")
    h = e - (e @ d) * d
    lh = np.linalg.norm(h)
    if lh <= 1e-14 * le:
        return OrientedCircleOrLine("line", base=p, direction=d)
    hhat = h / lh
    lam = (le * le) / (2.0 * (hhat @ e))
    center = p + lam * hhat
    # d x hhat orients the traversal along +d at p.
    return OrientedCircleOrLine("circle", center=center, radius=lam,
                                normal=np.cross(d, hhat))


def tangent_at(c, p):
    """Unit tangent of the oriented traversal of ``c`` at point ``p``.

    Parameters
    ----------
    c : OrientedCircleOrLine
    p : array_like, shape (3,)
        Point on ``c``.

    Returns
    -------
    ndarray, shape (3,)
    """
    p = np.asarray(p, dtype=float)
    if not c.contains(p):
        raise IncidenceError("point does not lie on the circle/line")
    if c.kind == "line":
        return c.direction.copy()
    return _unit(np.cross(c.normal, p - c.center))


def angle_between_circles_at(c1, c2, p):
    """Angle in [0, pi] between two oriented circles/lines at a common point."""
    t1 = tangent_at(c1, p)
    t2 = tangent_at(c2, p)
    return _clamped_arccos(t1 @ t2)


def conformal_angle_theta(p1, d1, p2, d2):
    """Conformal angle theta between two points with tangent directions.

    Builds the circle tangent to ``d1`` at ``p1`` through ``p2`` and the
    circle tangent to ``d2`` at ``p2`` through ``p1`` and measures the angle
    between the oriented pair at ``p2`` (the angle is the same at both common
    points).

    Parameters
    ----------
    p1, p2 : array_like, shape (3,)
        Distinct base points.
    d1, d2 : array_like, shape (3,)
        Unit tangents at the base points.

    Returns
    -------
    float
        Angle in [0, pi].
    """
    c1 = tangent_circle(p1, d1, p2)
    c2 = tangent_circle(p2, d2, p1)
    return angle_between_circles_at(c1, c2, np.asarray(p2, dtype=float))


def beta_angle(v, p1, p2, d2):
    """Angle beta between the three-point circle and a tangent circle.

    The three-point circle passes through ``v``, ``p1``, ``p2`` with the
    orientation of that visit order; the tangent circle is tangent to ``d2``
    at ``p2`` and passes through ``p1``.  The angle is measured at ``p2``.

    Parameters
    ----------
    v, p1, p2 : array_like, shape (3,)
        Pairwise distinct points.
    d2 : array_like, shape (3,)
        Unit tangent at ``p2`` (the edge tangent oriented away from ``v``).

    Returns
    -------
    float
        Angle in [0, pi].
    """
    c3 = circle_through_points(v, p1, p2)
    ct = tangent_circle(p2, d2, p1)
    return angle_between_circles_at(c3, ct, np.asarray(p2, dtype=float))


class Inversion:
    """Sphere inversion x -> center + radius^2 (x - center)/|x - center|^2."""

    __slots__ = ("center", "radius")

    def __init__(self, center, radius):
        if radius <= 0:
            raise ValueError("inversion radius must be positive")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def apply(self, p):
        w = p - self.center
        d2 = w @ w
        if d2 < _TINY:
            raise PoleError("evaluation at an inversion center")
        return self.center + (self.radius * self.radius / d2) * w

    def differential(self, p, t):
        w = p - self.center
        d2 = w @ w
        if d2 < _TINY:
            raise PoleError("differential at an inversion center")
        nhat = w / np.sqrt(d2)
        return (self.radius * self.radius / d2) * (t - 2.0 * (t @ nhat) * nhat)

    def inverse(self):
        return Inversion(self.center, self.radius)

    def to_payload(self):
        return {"type": "inversion", "center": list(map(float, self.center)),
                "radius": self.radius}


class Similarity:
    """Euclidean similarity x -> scale * rotation @ x + translation."""

    __slots__ = ("scale", "rotation", "translation")

    def __init__(self, scale=1.0, rotation=None, translation=None):
        if scale <= 0:
            raise ValueError("similarity scale must be positive")
        self.scale = float(scale)
        self.rotation = (np.eye(3) if rotation is None
                         else np.asarray(rotation, dtype=float))
        err = np.abs(self.rotation @ self.rotation.T - np.eye(3)).max()
        if err > 1e-9 or np.linalg.det(self.rotation) < 0:
            raise ValueError("rotation must be proper orthogonal")
        self.translation = (np.zeros(3) if translation is None
                            else np.asarray(translation, dtype=float))

    def apply(self, p):
        return self.scale * (self.rotation @ p) + self.translation

    def differential(self, p, t):
        return self.scale * (self.rotation @ t)

    def inverse(self):
        rt = self.rotation.T
        return Similarity(1.0 / self.scale, rt,
                          -(rt @ self.translation) / self.scale)

    def to_payload(self):
        return {"type": "similarity", "scale": self.scale,
                "rotation": [list(map(float, row)) for row in self.rotation],
                "translation": list(map(float, self.translation))}


class MobiusMap:
    """Ordered composition of inversions and similarities.

    Primitives are applied in list order: ``apply([f, g], x) = g(f(x))``.
    """

    __slots__ = ("primitives",)

    def __init__(self, primitives=()):
        self.primitives = list(primitives)

    def apply(self, p):
        p = np.asarray(p, dtype=float)
        for prim in self.primitives:
            p = prim.apply(p)
        return p

    def differential(self, p, t):
        """Pushforward of tangent ``t`` at point ``p``; returns (image, dt)."""
        p = np.asarray(p, dtype=float)
        t = np.asarray(t, dtype=float)
        for prim in self.primitives:
            t = prim.differential(p, t)
            p = prim.apply(p)
        return p, t

    def inverse(self):
        return MobiusMap([prim.inverse() for prim in reversed(self.primitives)])

    def __repr__(self):
        return "MobiusMap(%d primitives)" % len(self.primitives)


def apply_mobius(m, p):
    """Apply a MobiusMap to a point (composition of primitives in order)."""
    return m.apply(p)


def mobius_differential(m, p, t):
    """Analytic pushforward of the tangent vector ``t`` at ``p`` under ``m``."""
    return m.differential(p, t)


def random_mobius_map(rng, points, margin_frac=0.1, scale_range=(0.6, 1.6)):
    """Random inversion-composed-with-similarity avoiding a point cloud.

    The inversion center is rejection-sampled until its distance to every
    point of the (similarity-transformed) cloud exceeds ``margin_frac`` times
    the cloud diameter, which keeps quadrature error commensurate before and
    after the map.

    Parameters
    ----------
    rng : numpy.random.Generator
    points : ndarray, shape (n, 3)
        Samples of the graph image that must stay clear of the pole.
    margin_frac : float
        Minimum center clearance as a fraction of the cloud diameter.
    scale_range : tuple
        Uniform range for the similarity scale factor.

    Returns
    -------
    MobiusMap
    """
    points = np.asarray(points, dtype=float)
    # Random rotation from a quaternion.
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    a, b, c, d = q
    rot = np.array([
        [a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)],
        [2 * (b * c + a * d), a * a - b * b + c * c - d * d, 2 * (c * d - a * b)],
        [2 * (b * d - a * c), 2 * (c * d + a * b), a * a - b * b - c * c + d * d],
    ])
    scale = float(rng.uniform(*scale_range))
    shift = rng.normal(size=3) * 0.2
    sim = Similarity(scale, rot, shift)
    moved = (scale * (points @ rot.T)) + shift
    lo, hi = moved.min(axis=0), moved.max(axis=0)
    diam = float(np.linalg.norm(hi - lo))
    if diam < _TINY:
        diam = 1.0
    for _ in range(1000):
        center = rng.uniform(lo - 0.75 * diam, hi + 0.75 * diam)
        clearance = np.sqrt(((moved - center) ** 2).sum(axis=1).min())
        if clearance >= margin_frac * diam:
            radius = float(rng.uniform(0.5, 1.5)) * diam
            return MobiusMap([sim, Inversion(center, radius)])
    raise GeometryError("failed to sample an inversion center away from the image")


_NORTH4 = np.array([0.0, 0.0, 0.0, 1.0])


def _pole_rotation(pole):
    """Deterministic proper rotation of R^4 taking ``pole`` to (0,0,0,1)."""
    pole = _unit(np.asarray(pole, dtype=float))
    w = pole - _NORTH4
    lw = np.linalg.norm(w)
    if lw < 1e-14:
        return np.eye(4)
    what = w / lw
    h1 = np.eye(4) - 2.0 * np.outer(what, what)
    # Second reflection (flip of the first axis, which is orthogonal to the
    # north pole) restores det = +1 while keeping the pole at north.
    h2 = np.diag([-1.0, 1.0, 1.0, 1.0])
    return h2 @ h1


def stereographic_project(pole, x):
    """Stereographic projection of the unit 3-sphere from ``pole`` to R^3.

    With pole (0,0,0,1) the map is (x, y, z, t) -> (x, y, z)/(1 - t); a
    general pole is first rotated onto (0,0,0,1) by a deterministic proper
    rotation.

    Parameters
    ----------
    pole : array_like, shape (4,)
        Unit projection pole.
    x : array_like, shape (4,)
        Unit point, distinct from the pole.

    Returns
    -------
    ndarray, shape (3,)
    """
    x = np.asarray(x, dtype=float)
    rot = _pole_rotation(pole)
    y = rot @ x
    den = 1.0 - y[3]
    if abs(den) < 1e-14:
        raise PoleError("stereographic projection evaluated at the pole")
    return y[:3] / den


def stereographic_differential(pole, x, t):
    """Pushforward of a sphere tangent ``t`` at ``x`` under the projection."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    rot = _pole_rotation(pole)
    y = rot @ x
    s = rot @ t
    den = 1.0 - y[3]
    if abs(den) < 1e-14:
        raise PoleError("stereographic differential evaluated at the pole")
    return (s[:3] * den + y[:3] * s[3]) / (den * den)
