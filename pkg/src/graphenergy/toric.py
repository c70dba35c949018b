"""Symmetric rectangular toric graphs (p,q;m,n) and their projections.

A spec (p,q;m,n) describes a rectangular lattice on the flat torus
[0,2*pi)^2: m closed geodesics winding in the direction (p,q) and n closed
geodesics in the orthogonal direction (-q,p), equally spaced within each
family.  The lattice is carried onto the symmetric torus x^2+y^2 = 1/2
inside S^3 by the Clifford embedding and then to R^3 by stereographic
projection, which is conformal and so preserves the right lattice angles.

Lattice combinatorics are computed exactly in rational arithmetic on the
unit-turn torus (coordinates U = u/2pi, V = v/2pi wrapped to [0,1)); floats
enter only when the embedding is sampled.  A geodesic with direction (a,b),
gcd(a,b)=1, is the level set of the orthogonal functional b*U - a*V modulo
1, so a family of k parallel geodesics offset by j/k is equally spaced at
2*pi/(k*sqrt(a^2+b^2)) in the flat metric.
"""

import math
from collections import Counter
from fractions import Fraction

import numpy as np

from .geom import PoleError, stereographic_differential, stereographic_project
from .graph import Edge, EmbeddedGraph, HermiteCurve, validate, vertex_angles

__all__ = [
    "ToricError",
    "ToricSpecError",
    "LatticeDegeneracyError",
    "PoleOnImageError",
    "ToricSpec",
    "FlatArc",
    "FlatLattice",
    "parse_spec",
    "validate_spec",
    "build_flat_lattice",
    "clifford_embed",
    "build_toric_graph",
    "convention_audit",
    "render_convention_audit",
]

# Conformality tolerance for projected lattice angles (radians).
_ANGLE_TOL = 1e-6
# Torus-membership and on-geodesic tolerances for the pole test (turns).
_POLE_TOL = 1e-9
_DEFAULT_POLE = (0.0, 0.0, 0.0, 1.0)
_DEFAULT_SAMPLES = 65
_MIN_SAMPLES = 5
_TWO_PI = 2.0 * math.pi
_INV_ROOT2 = 1.0 / math.sqrt(2.0)


class ToricError(ValueError):
    """Base error for toric construction."""


class ToricSpecError(ToricError):
    """A 4-tuple (p,q;m,n) violates the lattice invariants."""


class LatticeDegeneracyError(ToricError):
    """The lattice has loops or repeated arcs and is not a simple graph."""


class PoleOnImageError(ToricError):
    """The projection pole lies on the embedded lattice."""


class ToricSpec:
    """Integer 4-tuple (p,q;m,n) naming a rectangular toric lattice.

    ``(p,q)`` is the winding direction of the horizontal family, ``m`` and
    ``n`` the numbers of horizontal and vertical geodesics.  Validity
    ((gcd(p,q)=1 and p >= q >= 1) or (p,q)=(1,0); m >= n >= 1) is checked
    by :func:`validate_spec`, not by the constructor.
    """

    __slots__ = ("p", "q", "m", "n")

    def __init__(self, p, q, m, n):
        for name, val in (("p", p), ("q", q), ("m", m), ("n", n)):
            if not isinstance(val, (int, np.integer)):
                raise ToricSpecError("%s must be an integer, got %r" % (name, val))
        self.p = int(p)
        self.q = int(q)
        self.m = int(m)
        self.n = int(n)

    def as_tuple(self):
        return (self.p, self.q, self.m, self.n)

    def __eq__(self, other):
        return isinstance(other, ToricSpec) and self.as_tuple() == other.as_tuple()

    def __hash__(self):
        return hash(self.as_tuple())

    def __repr__(self):
        return "ToricSpec(%d,%d;%d,%d)" % self.as_tuple()


def parse_spec(text):
    """Parse and validate a CLI spec string ``"p,q,m,n"``.

    Parameters
    ----------
    text : str

    Returns
    -------
    ToricSpec

    Raises
    ------
    ToricSpecError
        On malformed input or invariant violation.
    """
    parts = [s.strip() for s in str(text).split(",")]
    if len(parts) != 4:
        raise ToricSpecError("spec string must be 'p,q,m,n', got %r" % text)
    try:
        vals = [int(s) for s in parts]
    except ValueError:
        raise ToricSpecError("spec string has a non-integer field: %r" % text)
    s = ToricSpec(*vals)
    validate_spec(s)
    return s


def validate_spec(s):
    """Enforce the (p,q;m,n) invariants, raising a named violation.

    Parameters
    ----------
    s : ToricSpec

    Raises
    ------
    ToricSpecError
        Naming the violated constraint (gcd, winding order, or m >= n).
    """
    p, q, m, n = s.as_tuple()
    if (p, q) != (1, 0):
        if not p >= q >= 1:
            raise ToricSpecError(
                "winding must satisfy p >= q >= 1 or (p,q) = (1,0), got (%d,%d)"
                % (p, q))
        if math.gcd(p, q) != 1:
            raise ToricSpecError(
                "gcd(p, q) must be 1, got gcd(%d, %d) = %d"
                % (p, q, math.gcd(p, q)))
    if not m >= n >= 1:
        raise ToricSpecError("m >= n >= 1 violated, got m=%d, n=%d" % (m, n))


def _bezout(a, b):
    """Extended Euclid: (x, y) with a*x + b*y = gcd(a, b) >= 0."""
    r0, r1, x0, x1, y0, y1 = a, b, 1, 0, 0, 1
    while r1:
        k = r0 // r1
        r0, r1 = r1, r0 - k * r1
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    if r0 < 0:
        return -x0, -y0
    return x0, y0


class FlatArc:
    """One lattice arc between consecutive vertices along a geodesic.

    ``start_uv`` holds the exact wrapped turn coordinates of the start
    vertex; the arc is (U,V)(tau) = start_uv + direction * dt * tau for
    tau in [0,1], without wrapping (the embedding is periodic).
    """

    __slots__ = ("family", "line", "seq", "start", "end", "start_uv",
                 "direction", "dt")

    def __init__(self, family, line, seq, start, end, start_uv, direction, dt):
        self.family = family
        self.line = line
        self.seq = seq
        self.start = start
        self.end = end
        self.start_uv = start_uv
        self.direction = direction
        self.dt = dt

    def __repr__(self):
        return "FlatArc(%s%d.%d: %d -> %d)" % (
            self.family, self.line, self.seq, self.start, self.end)


class FlatLattice:
    """Exact rectangular lattice on the unit-turn flat torus.

    Attributes
    ----------
    spec : ToricSpec
    points : list of (Fraction, Fraction)
        Vertex coordinates (U, V) in turns, wrapped to [0, 1), sorted.
    arcs : list of FlatArc
        Arcs between consecutive vertices along each geodesic, horizontal
        families first, in (line, seq) order.
    """

    def __init__(self, spec, points, arcs):
        self.spec = spec
        self.points = points
        self.arcs = arcs

    def uv(self, i):
        """Flat coordinates of vertex ``i`` in radians."""
        U, V = self.points[i]
        return _TWO_PI * float(U), _TWO_PI * float(V)

    def horizontal_spacing(self):
        """Flat distance between consecutive horizontal geodesics."""
        s = self.spec
        return _TWO_PI / (s.m * math.hypot(s.p, s.q))

    def vertical_spacing(self):
        s = self.spec
        return _TWO_PI / (s.n * math.hypot(s.p, s.q))

    def cells_square(self):
        """All cells are congruent rectangles; squares iff m = n."""
        return self.spec.m == self.spec.n

    def degrees(self):
        """Vertex degrees (loops count twice)."""
        deg = [0] * len(self.points)
        for arc in self.arcs:
            deg[arc.start] += 1
            deg[arc.end] += 1
        return deg

    def degeneracies(self):
        """Loops and repeated vertex pairs, as human-readable strings."""
        problems = []
        pairs = Counter()
        for arc in self.arcs:
            if arc.start == arc.end:
                problems.append("arc %s%d.%d is a loop at vertex %d"
                                % (arc.family, arc.line, arc.seq, arc.start))
            else:
                pairs[(min(arc.start, arc.end), max(arc.start, arc.end))] += 1
        for (i, j), count in sorted(pairs.items()):
            if count > 1:
                problems.append("%d arcs join vertices %d and %d"
                                % (count, i, j))
        return problems


def build_flat_lattice(s, vertical_phase=Fraction(0)):
    """Construct the exact flat lattice of a valid spec.

    Horizontal geodesics are the level sets -q*U + p*V = a/m (a = 0..m-1),
    so one passes through (0,0); vertical geodesics are
    p*U + q*V = b/n + vertical_phase.  All intersections and arc endpoints
    are exact rationals.

    Parameters
    ----------
    s : ToricSpec
    vertical_phase : Fraction, optional
        Offset of the vertical family in turns of its level functional.
        Energies of the projected graphs are phase independent; the
        default 0 puts a vertical geodesic through (0,0) as well.

    Returns
    -------
    FlatLattice
    """
    validate_spec(s)
    p, q, m, n = s.as_tuple()
    P = p * p + q * q
    phase = Fraction(vertical_phase)

    # Base points: -q*xh + p*yh = 1 and p*xv + q*yv = 1 (gcd(p,q) = 1).
    xh, yh = _bezout(-q, p)
    xv, yv = _bezout(p, q)

    def h_base(a):
        c = Fraction(a, m)
        return (xh * c, yh * c)

    def v_base(b):
        c = Fraction(b, n) + phase
        return (xv * c, yv * c)

    index = {}

    def vertex_key(U, V):
        return (U % 1, V % 1)

    # Enumerate all intersections: on horizontal line a, the vertical
    # functional w = p*U + q*V grows linearly with slope P, so line b is
    # met at t = ((b/n + phase - w0) mod 1 + k)/P, k = 0..P-1.
    for a in range(m):
        U0, V0 = h_base(a)
        w0 = p * U0 + q * V0
        for b in range(n):
            r = (Fraction(b, n) + phase - w0) % 1
            for k in range(P):
                t = Fraction(r + k, P)
                index.setdefault(vertex_key(U0 + p * t, V0 + q * t), None)
    if len(index) != m * n * P:
        raise ToricError("intersection count %d != m*n*(p^2+q^2) = %d"
                         % (len(index), m * n * P))
    points = sorted(index)
    index = {key: i for i, key in enumerate(points)}

    def line_arcs(family, line, U0, V0, direction, hits):
        hits.sort()
        arcs = []
        for seq, (t, vid) in enumerate(hits):
            t_next, vid_next = hits[(seq + 1) % len(hits)]
            dt = (t_next - t) % 1 if len(hits) > 1 else Fraction(1)
            arcs.append(FlatArc(family, line, seq, vid, vid_next,
                                points[vid], direction, dt))
        return arcs

    arcs = []
    for a in range(m):
        U0, V0 = h_base(a)
        w0 = p * U0 + q * V0
        hits = []
        for b in range(n):
            r = (Fraction(b, n) + phase - w0) % 1
            for k in range(P):
                t = Fraction(r + k, P)
                hits.append((t, index[vertex_key(U0 + p * t, V0 + q * t)]))
        arcs.extend(line_arcs("h", a, U0, V0, (p, q), hits))
    for b in range(n):
        U0, V0 = v_base(b)
        c0 = -q * U0 + p * V0
        hits = []
        for a in range(m):
            r = (Fraction(a, m) - c0) % 1
            for k in range(P):
                t = Fraction(r + k, P)
                hits.append((t, index[vertex_key(U0 - q * t, V0 + p * t)]))
        arcs.extend(line_arcs("v", b, U0, V0, (-q, p), hits))
    return FlatLattice(s, points, arcs)


def clifford_embed(u, v):
    """Embed flat coordinates onto the symmetric torus in S^3.

    Parameters
    ----------
    u, v : array_like
        Flat torus coordinates in radians, broadcastable.

    Returns
    -------
    ndarray, shape (..., 4)
        (cos u, sin u, cos v, sin v)/sqrt(2); unit vectors with
        x^2 + y^2 = 1/2.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    out = np.stack(np.broadcast_arrays(np.cos(u), np.sin(u),
                                       np.cos(v), np.sin(v)), axis=-1)
    return out * _INV_ROOT2


def _pole_on_image(lat, pole):
    """Exact-up-to-rounding test of the pole against the lattice image.

    The image is the set of torus points whose turn coordinates lie on a
    lattice geodesic, so membership reduces to x^2+y^2 = 1/2 plus a level
    test of the two functionals; no sampling gaps.
    """
    if abs(pole[0] ** 2 + pole[1] ** 2 - 0.5) > _POLE_TOL:
        return False
    U = (math.atan2(pole[1], pole[0]) / _TWO_PI) % 1.0
    V = (math.atan2(pole[3], pole[2]) / _TWO_PI) % 1.0
    p, q, m, n = lat.spec.as_tuple()

    def on_level(value, k):
        # Distance of k*value to the nearest offset j/k, in turns.
        r = (k * value) % 1.0
        return min(r, 1.0 - r) / k < _POLE_TOL

    if on_level(-q * U + p * V, m):
        return True
    phase = 0.0
    for arc in lat.arcs:
        if arc.family == "v":
            U0, V0 = arc.start_uv
            phase = float((p * U0 + q * V0) % Fraction(1, n))
            break
    return on_level(p * U + q * V - phase, n)


def build_toric_graph(s, pole=_DEFAULT_POLE, samples=_DEFAULT_SAMPLES,
                      vertical_phase=Fraction(0)):
    """Build the stereographic projection of a toric lattice in R^3.

    Each flat arc is sampled at ``samples`` uniform parameters, pushed
    through :func:`clifford_embed` and the stereographic projection with
    analytic tangents, and splined into a Hermite edge curve.  The result
    passes :func:`graph.validate` and has all lattice crossing angles
    pi/2 (and straight-through continuations pi) within 1e-6.

    Parameters
    ----------
    s : ToricSpec
    pole : array_like, shape (4,), optional
        Unit projection pole, default (0,0,0,1); must avoid the image.
    samples : int, optional
        Sample nodes per edge arc, default 65.
    vertical_phase : Fraction, optional
        Offset of the vertical family in turns; a torus translation, so the
        energy of the result must not depend on it.

    Returns
    -------
    EmbeddedGraph

    Raises
    ------
    LatticeDegeneracyError
        If the lattice has loops or repeated arcs (e.g. (1,0;1,1)).
    PoleOnImageError
        If the pole lies on (or numerically at) the embedded lattice.
    ToricError
        If the projected graph fails validation or conformality.
    """
    lat = build_flat_lattice(s, vertical_phase=vertical_phase)
    problems = lat.degeneracies()
    if problems:
        raise LatticeDegeneracyError(
            "spec %r does not embed as a simple graph: %s"
            % (s, "; ".join(problems)))
    samples = int(samples)
    if samples < _MIN_SAMPLES:
        raise ToricError("samples per edge must be >= %d" % _MIN_SAMPLES)
    pole = np.asarray(pole, dtype=float)
    if pole.shape != (4,):
        raise ToricError("pole must be a 4-vector")
    nr = np.linalg.norm(pole)
    if nr < 1e-14:
        raise ToricError("pole must be nonzero")
    pole = pole / nr
    if _pole_on_image(lat, pole):
        raise PoleOnImageError("pole %s lies on the embedded lattice"
                               % np.array2string(pole, precision=6))

    width = max(3, len(str(len(lat.points) - 1)))
    vid = lambda i: "w%0*d" % (width, i)
    try:
        vertices = {}
        for i in range(len(lat.points)):
            u, v = lat.uv(i)
            vertices[vid(i)] = stereographic_project(pole, clifford_embed(u, v))
        grid = np.linspace(0.0, 1.0, samples)
        edges = []
        for arc in lat.arcs:
            su, sv = (float(arc.start_uv[0]), float(arc.start_uv[1]))
            du, dv = arc.direction
            dt = float(arc.dt)
            u = _TWO_PI * (su + du * dt * grid)
            v = _TWO_PI * (sv + dv * dt * grid)
            pts4 = clifford_embed(u, v)
            up, vp = _TWO_PI * du * dt, _TWO_PI * dv * dt
            tan4 = np.stack([-np.sin(u) * up, np.cos(u) * up,
                             -np.sin(v) * vp, np.cos(v) * vp],
                            axis=-1) * _INV_ROOT2
            p3 = np.empty((samples, 3))
            t3 = np.empty((samples, 3))
            for j in range(samples):
                p3[j] = stereographic_project(pole, pts4[j])
                t3[j] = stereographic_differential(pole, pts4[j], tan4[j])
            eid = "%s%02d.%03d" % (arc.family, arc.line, arc.seq)
            edges.append(Edge(eid, vid(arc.start), vid(arc.end),
                              HermiteCurve(p3, t3)))
    except PoleError as exc:
        raise PoleOnImageError(str(exc))

    g = EmbeddedGraph(vertices, edges)
    report = validate(g)
    if not report.ok:
        raise ToricError("projected graph failed validation: %r" % report)
    va = vertex_angles(g)
    for w, per in va.angles.items():
        angles = sorted(per.values())
        # Degree 4: four right-angle crossings, two straight continuations.
        bad = (len(angles) != 6
               or any(abs(a - 0.5 * math.pi) > _ANGLE_TOL for a in angles[:4])
               or any(abs(a - math.pi) > _ANGLE_TOL for a in angles[4:]))
        if bad:
            raise ToricError("vertex %s angles deviate from the conformal "
                             "pattern: %s" % (w, angles))
    return g


def convention_audit(s, q=None, pole=_DEFAULT_POLE, alt_pole=(0.0, 0.0, 1.0, 0.0),
                     samples=_DEFAULT_SAMPLES, target=None):
    """Audit the counting, orientation, and pole conventions of a toric energy.

    Computes the literal ordered double-sum total alongside the unordered
    recounting (same-edge terms once, each unordered off-diagonal pair
    once), then demonstrates numerically that neither edge orientation
    declarations nor the projection pole move the value.  Emitted when a
    published toric energy is not reproduced within tolerance, so the
    mismatch can be attributed to a convention rather than to the engine.

    Parameters
    ----------
    s : ToricSpec
    q : energy.QuadratureConfig, optional
    pole, alt_pole : array_like, shape (4,)
        Two admissible projection poles.
    samples : int
    target : float, optional
        Published value to tabulate ratios against.

    Returns
    -------
    dict
        JSON-ready audit table.
    """
    from .energy import total_energy

    g = build_toric_graph(s, pole=pole, samples=samples)
    rep = total_energy(g, q)
    sums = {"same": 0.0, "disjoint": 0.0, "adjacent": 0.0}
    for r in rep.pairs:
        sums[r.kind] += r.value
    ordered = rep.total
    unordered = sums["same"] + 0.5 * (sums["disjoint"] + sums["adjacent"])

    flipped = EmbeddedGraph(
        dict(g.vertices),
        [Edge(e.id, e.v, e.u, e.curve.reversed_()) for e in g.edges])
    flip_total = total_energy(flipped, q).total

    g_alt = build_toric_graph(s, pole=alt_pole, samples=samples)
    alt_total = total_energy(g_alt, q).total

    audit = {
        "spec": list(s.as_tuple()),
        "pole": [float(x) for x in np.asarray(pole, dtype=float)],
        "alt_pole": [float(x) for x in np.asarray(alt_pole, dtype=float)],
        "ordered_total": ordered,
        "total_err": rep.total_err,
        "kind_sums": sums,
        "unordered_total": unordered,
        "orientation_flip_rel_dev": abs(flip_total - ordered) / abs(ordered),
        "pole_rel_dev": abs(alt_total - ordered) / abs(ordered),
        "target": target,
    }
    if target is not None:
        audit["ordered_over_target"] = ordered / target
        audit["unordered_over_target"] = unordered / target
    return audit


def render_convention_audit(audit):
    """Human-readable text form of a :func:`convention_audit` table."""
    a = audit
    lines = [
        "convention audit for toric spec (%d,%d;%d,%d)" % tuple(a["spec"]),
        "  ordered double-sum total   %.10g  (err %.3g)"
        % (a["ordered_total"], a["total_err"]),
        "  kind sums: same %.10g  disjoint %.10g  adjacent %.10g"
        % (a["kind_sums"]["same"], a["kind_sums"]["disjoint"],
           a["kind_sums"]["adjacent"]),
        "  unordered recount          %.10g" % a["unordered_total"],
        "  orientation-flip rel dev   %.3g" % a["orientation_flip_rel_dev"],
        "  pole change rel dev        %.3g  (pole %s -> %s)"
        % (a["pole_rel_dev"], a["pole"], a["alt_pole"]),
    ]
    if a.get("target") is not None:
        lines.append("  published target           %.10g" % a["target"])
        lines.append("  ordered/target %.6g   unordered/target %.6g"
                     % (a["ordered_over_target"], a["unordered_over_target"]))
    return "\n".join(lines) + "\n"
