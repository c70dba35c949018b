"""Embedded graphs in R^3 with smooth parametric edges.

An :class:`EmbeddedGraph` couples combinatorics (vertices, edges, adjacency)
with per-edge parametric curves on [0, 1].  Curves come in three serializable
kinds (circular arc, Hermite spline, point samples) plus an in-memory
reparametrized wrapper.  The module also provides vertex-angle extraction,
alpha-embedding validation, Mobius transformation of whole graphs, and a JSON
file format with PLY/OBJ polyline export.
"""

import json

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from . import geom

__all__ = [
    "GraphError",
    "GraphSchemaError",
    "DegenerateEdgeError",
    "NonMonotoneMapError",
    "PoleProximityError",
    "ArcCurve",
    "HermiteCurve",
    "SampledCurve",
    "ReparamCurve",
    "Edge",
    "EmbeddedGraph",
    "VertexAngles",
    "ValidationPolicy",
    "ValidationReport",
    "vertex_angles",
    "validate",
    "reparametrize",
    "transform",
    "load_graph",
    "save_graph",
    "export_ply",
    "export_obj",
]

# Endpoint coincidence tolerance, relative to max(1, graph diameter).
_ENDPOINT_TOL = 1e-9
# Derivative positivity: norm must exceed this fraction of the edge length.
_DERIV_FLOOR = 1e-9
# Default floor for vertex angles (alpha-embedding condition).
_ANGLE_FLOOR = 1e-6


class GraphError(ValueError):
    """Base class for graph construction and validation failures."""


class GraphSchemaError(GraphError):
    """Malformed graph file; carries the offending field path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__("%s: %s" % (path, message))


class DegenerateEdgeError(GraphError):
    """Zero one-sided derivative where an angle is required."""


class NonMonotoneMapError(GraphError):
    """Reparametrization map is not strictly increasing."""


class PoleProximityError(GraphError):
    """A Mobius pole lies on or too near the graph image."""


def _as_points(a, name):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[1] != 3 or a.shape[0] < 2:
        raise GraphError("%s must be an (n, 3) array with n >= 2" % name)
    return a


class ArcCurve:
    """Circular arc traversed from ``angle0`` to ``angle1``.

    The arc lies in the plane through ``center`` with unit ``normal``; the
    in-plane basis is deterministic (built from the coordinate axis least
    aligned with the normal), so angles are well-defined file data.
    """

    kind = "arc"

    def __init__(self, center, normal, radius, angle0, angle1):
        if radius <= 0:
            raise GraphError("arc radius must be positive")
        if angle0 == angle1:
            raise GraphError("arc must have distinct start and end angles")
        self.center = np.asarray(center, dtype=float)
        self.normal = np.asarray(normal, dtype=float)
        nn = np.linalg.norm(self.normal)
        if nn < 1e-300:
            raise GraphError("arc normal must be nonzero")
        self.normal = self.normal / nn
        self.radius = float(radius)
        self.angle0 = float(angle0)
        self.angle1 = float(angle1)
        k = int(np.argmin(np.abs(self.normal)))
        e1 = np.zeros(3)
        e1[k] = 1.0
        e1 -= (e1 @ self.normal) * self.normal
        self._e1 = e1 / np.linalg.norm(e1)
        self._e2 = np.cross(self.normal, self._e1)

    def position(self, t):
        t = np.asarray(t, dtype=float)
        phi = self.angle0 + (self.angle1 - self.angle0) * t
        c, s = np.cos(phi), np.sin(phi)
        return (self.center
                + self.radius * (np.multiply.outer(c, self._e1)
                                 + np.multiply.outer(s, self._e2)))

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        dphi = self.angle1 - self.angle0
        phi = self.angle0 + dphi * t
        c, s = np.cos(phi), np.sin(phi)
        return self.radius * dphi * (np.multiply.outer(-s, self._e1)
                                     + np.multiply.outer(c, self._e2))

    def reversed_(self):
        return ArcCurve(self.center, self.normal, self.radius,
                        self.angle1, self.angle0)

    def to_payload(self):
        return {"kind": "arc",
                "center": [float(x) for x in self.center],
                "normal": [float(x) for x in self.normal],
                "radius": self.radius,
                "angle0": self.angle0,
                "angle1": self.angle1}


class HermiteCurve:
    """Cubic Hermite interpolant of node positions and node tangents.

    Nodes sit at uniform parameters on [0, 1]; tangents are derivatives with
    respect to the curve parameter (not arclength).  The interpolant is the
    piecewise-cubic C^1 Hermite spline.
    """

    kind = "hermite"

    def __init__(self, points, tangents):
        self.points = _as_points(points, "hermite points")
        self.tangents = _as_points(tangents, "hermite tangents")
        if self.points.shape != self.tangents.shape:
            raise GraphError("hermite points/tangents shape mismatch")
        grid = np.linspace(0.0, 1.0, self.points.shape[0])
        self._spline = CubicHermiteSpline(grid, self.points, self.tangents,
                                          axis=0)
        self._dspline = self._spline.derivative()

    def position(self, t):
        return self._spline(np.asarray(t, dtype=float))

    def derivative(self, t):
        return self._dspline(np.asarray(t, dtype=float))

    def reversed_(self):
        return HermiteCurve(self.points[::-1], -self.tangents[::-1])

    def to_payload(self):
        return {"kind": "hermite",
                "points": [[float(x) for x in p] for p in self.points],
                "tangents": [[float(x) for x in p] for p in self.tangents]}


class SampledCurve:
    """Dense ordered point samples, splined (natural cubic) on construction."""

    kind = "samples"

    def __init__(self, points):
        self.points = _as_points(points, "sample points")
        if self.points.shape[0] < 4:
            raise GraphError("sampled curve needs at least 4 points")
        grid = np.linspace(0.0, 1.0, self.points.shape[0])
        self._spline = CubicSpline(grid, self.points, axis=0, bc_type="natural")
        self._dspline = self._spline.derivative()

    def position(self, t):
        return self._spline(np.asarray(t, dtype=float))

    def derivative(self, t):
        return self._dspline(np.asarray(t, dtype=float))

    def reversed_(self):
        return SampledCurve(self.points[::-1])

    def to_payload(self):
        return {"kind": "samples",
                "points": [[float(x) for x in p] for p in self.points]}


class ReparamCurve:
    """In-memory reparametrization wrapper (exact chain rule).

    Not serializable; :func:`save_graph` resamples it into a Hermite curve.
    """

    kind = "reparam"

    def __init__(self, base, fn, dfn):
        self.base = base
        self.fn = fn
        self.dfn = dfn

    def position(self, t):
        t = np.asarray(t, dtype=float)
        return self.base.position(self.fn(t))

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        d = self.base.derivative(self.fn(t))
        return d * np.expand_dims(np.asarray(self.dfn(t), dtype=float), -1)

    def reversed_(self):
        fn, dfn = self.fn, self.dfn
        return ReparamCurve(self.base,
                            lambda t: fn(1.0 - np.asarray(t, dtype=float)),
                            lambda t: -np.asarray(dfn(1.0 - np.asarray(t, dtype=float))))

    def to_payload(self):
        return _resample_hermite(self, 65).to_payload()


def _resample_hermite(curve, n):
    grid = np.linspace(0.0, 1.0, n)
    return HermiteCurve(curve.position(grid), curve.derivative(grid))


_CURVE_KINDS = {"arc", "hermite", "samples"}


def _curve_from_payload(payload, path="curve"):
    if not isinstance(payload, dict):
        raise GraphSchemaError(path, "curve payload must be an object")
    kind = payload.get("kind")
    if kind not in _CURVE_KINDS:
        raise GraphSchemaError(path + ".kind", "unknown curve kind %r" % (kind,))
    try:
        if kind == "arc":
            return ArcCurve(payload["center"], payload["normal"],
                            payload["radius"], payload["angle0"],
                            payload["angle1"])
        if kind == "hermite":
            return HermiteCurve(payload["points"], payload["tangents"])
        return SampledCurve(payload["points"])
    except KeyError as exc:
        raise GraphSchemaError(path, "missing curve field %s" % exc) from exc
    except (GraphError, ValueError) as exc:
        raise GraphSchemaError(path, str(exc)) from exc


class Edge:
    """Graph edge: endpoint vertex ids plus the parametric curve.

    The curve runs from vertex ``u`` (parameter 0) to vertex ``v``
    (parameter 1); the canonical orientation u < v is enforced by
    :class:`EmbeddedGraph`.
    """

    __slots__ = ("id", "u", "v", "curve")

    def __init__(self, edge_id, u, v, curve):
        self.id = str(edge_id)
        self.u = str(u)
        self.v = str(v)
        self.curve = curve

    def end_at(self, vid):
        """Parameter end (0 or 1) at which vertex ``vid`` sits."""
        if vid == self.u:
            return 0
        if vid == self.v:
            return 1
        raise GraphError("vertex %s is not an endpoint of edge %s" % (vid, self.id))

    def other(self, vid):
        return self.v if vid == self.u else self.u


class EmbeddedGraph:
    """Immutable embedded graph: vertices, edges, adjacency index.

    Construction canonicalizes edge orientation (curve reversed so that the
    lower vertex id sits at parameter 0), sorts edges by id, and rejects
    loops and multiple edges outright.
    """

    def __init__(self, vertices, edges):
        self.vertices = {str(k): np.asarray(p, dtype=float)
                         for k, p in dict(vertices).items()}
        for vid, pos in self.vertices.items():
            if pos.shape != (3,):
                raise GraphError("vertex %s position must have shape (3,)" % vid)
        canon = []
        seen_pairs = set()
        seen_ids = set()
        for e in edges:
            if e.id in seen_ids:
                raise GraphError("duplicate edge id %s" % e.id)
            seen_ids.add(e.id)
            if e.u not in self.vertices or e.v not in self.vertices:
                raise GraphError("edge %s references a missing vertex" % e.id)
            if e.u == e.v:
                raise GraphError("edge %s is a loop" % e.id)
            pair = (min(e.u, e.v), max(e.u, e.v))
            if pair in seen_pairs:
                raise GraphError("multiple edges between %s and %s" % pair)
            seen_pairs.add(pair)
            if e.u > e.v:
                e = Edge(e.id, e.v, e.u, e.curve.reversed_())
            canon.append(e)
        canon.sort(key=lambda e: e.id)
        self.edges = canon
        self.adjacency = {vid: [] for vid in self.vertices}
        for idx, e in enumerate(self.edges):
            self.adjacency[e.u].append((idx, 0))
            self.adjacency[e.v].append((idx, 1))

    def edge_index(self, edge_id):
        for idx, e in enumerate(self.edges):
            if e.id == edge_id:
                return idx
        raise GraphError("no edge with id %s" % edge_id)

    def shared_vertex(self, i, j):
        """Common vertex id of edges i and j, or None."""
        a, b = self.edges[i], self.edges[j]
        ends_a = {a.u, a.v}
        for vid in (b.u, b.v):
            if vid in ends_a:
                return vid
        return None

    def sample_cloud(self, per_edge=33):
        """Point samples of the whole image (vertices plus edge interiors)."""
        chunks = [np.array(list(self.vertices.values()))]
        grid = np.linspace(0.0, 1.0, per_edge)
        for e in self.edges:
            chunks.append(np.atleast_2d(e.curve.position(grid)))
        return np.vstack(chunks)

    def diameter(self):
        cloud = self.sample_cloud()
        lo, hi = cloud.min(axis=0), cloud.max(axis=0)
        return float(np.linalg.norm(hi - lo))


class VertexAngles:
    """Per-vertex angles between one-sided derivatives of adjacent edges.

    ``angles[vid][(eid_i, eid_j)]`` (ids sorted) is alpha_ij in (0, pi];
    ``directions[(vid, eid)]`` is the unit one-sided derivative at ``vid``
    pointing into edge ``eid``.
    """

    def __init__(self, angles, directions):
        self.angles = angles
        self.directions = directions

    def angle(self, vid, eid_i, eid_j):
        key = (eid_i, eid_j) if eid_i <= eid_j else (eid_j, eid_i)
        return self.angles[vid][key]

    def min_angle(self):
        vals = [a for per in self.angles.values() for a in per.values()]
        return min(vals) if vals else np.pi

    def tuple_at(self, vid):
        """Unit direction vectors at ``vid``, ordered by edge id."""
        eids = sorted(eid for (w, eid) in self.directions if w == vid)
        return np.array([self.directions[(vid, eid)] for eid in eids])


def vertex_angles(g):
    """Extract all vertex angles alpha_ij of an embedded graph.

    Parameters
    ----------
    g : EmbeddedGraph

    Returns
    -------
    VertexAngles
    """
    angles = {}
    directions = {}
    for vid, incidences in g.adjacency.items():
        dirs = {}
        for idx, end in incidences:
            e = g.edges[idx]
            d = np.asarray(e.curve.derivative(float(end)), dtype=float)
            if end == 1:
                d = -d
            nd = np.linalg.norm(d)
            if nd < 1e-12:
                raise DegenerateEdgeError(
                    "zero one-sided derivative of edge %s at vertex %s"
                    % (e.id, vid))
            dirs[e.id] = d / nd
            directions[(vid, e.id)] = dirs[e.id]
        per = {}
        eids = sorted(dirs)
        for a in range(len(eids)):
            for b in range(a + 1, len(eids)):
                dot = float(np.clip(dirs[eids[a]] @ dirs[eids[b]], -1.0, 1.0))
                per[(eids[a], eids[b])] = float(np.arccos(dot))
        angles[vid] = per
    return VertexAngles(angles, directions)


class ValidationPolicy:
    """Knobs for the approximate embedding checks."""

    def __init__(self, samples_per_edge=128, derivative_samples=256,
                 min_distance_factor=1e-6, angle_floor=_ANGLE_FLOOR,
                 endpoint_tol=_ENDPOINT_TOL, vertex_exclusion=0.08):
        self.samples_per_edge = samples_per_edge
        self.derivative_samples = derivative_samples
        self.min_distance_factor = min_distance_factor
        self.angle_floor = angle_floor
        self.endpoint_tol = endpoint_tol
        self.vertex_exclusion = vertex_exclusion


class ValidationReport:
    """List of violations; empty means the graph passed."""

    def __init__(self, violations):
        self.violations = violations

    @property
    def ok(self):
        return not self.violations

    def __repr__(self):
        if self.ok:
            return "ValidationReport(ok)"
        lines = ["%s at %s: %s" % v for v in self.violations]
        return "ValidationReport(\n  " + "\n  ".join(lines) + "\n)"


def _segment_dist_matrix(p, q):
    """Pairwise minimum distances between the segments of two polylines.

    Clamped closest-point computation between every segment of ``p`` and
    every segment of ``q``; returns an (len(p)-1, len(q)-1) matrix.  Unlike
    a point-sample comparison this catches transversal crossings whose
    intersection point falls between samples.
    """
    a0, d1 = p[:-1], np.diff(p, axis=0)
    b0, d2 = q[:-1], np.diff(q, axis=0)
    a = (d1 * d1).sum(axis=1)[:, None]
    e = (d2 * d2).sum(axis=1)[None, :]
    b = d1 @ d2.T
    r = a0[:, None, :] - b0[None, :, :]
    c = (d1[:, None, :] * r).sum(axis=2)
    f = (d2[None, :, :] * r).sum(axis=2)
    tiny = 1e-30
    denom = np.maximum(a * e - b * b, tiny)
    s = np.clip((b * f - c * e) / denom, 0.0, 1.0)
    t = (b * s + f) / np.maximum(e, tiny)
    low, high = t < 0.0, t > 1.0
    t = np.clip(t, 0.0, 1.0)
    a_safe = np.maximum(a, tiny)
    s = np.where(low, np.clip(-c / a_safe, 0.0, 1.0), s)
    s = np.where(high, np.clip((b - c) / a_safe, 0.0, 1.0), s)
    w = (a0[:, None, :] + s[..., None] * d1[:, None, :]
         - b0[None, :, :] - t[..., None] * d2[None, :, :])
    return np.sqrt((w * w).sum(axis=2))


def validate(g, policy=None):
    """Check the alpha-embedding invariants of a graph.

    Runs endpoint coincidence, derivative positivity, approximate injectivity
    (per edge and pairwise), and the vertex angle floor.  Violations are
    collected into a report rather than raised.

    Parameters
    ----------
    g : EmbeddedGraph
    policy : ValidationPolicy, optional

    Returns
    -------
    ValidationReport
    """
    pol = policy or ValidationPolicy()
    bad = []
    diam = max(g.diameter(), 1e-30)
    scale = max(1.0, diam)

    mids = (np.arange(pol.derivative_samples) + 0.5) / pol.derivative_samples
    grid = np.linspace(0.0, 1.0, pol.samples_per_edge)
    samples = {}
    for idx, e in enumerate(g.edges):
        p0 = np.asarray(e.curve.position(0.0), dtype=float)
        p1 = np.asarray(e.curve.position(1.0), dtype=float)
        if np.linalg.norm(p0 - g.vertices[e.u]) > pol.endpoint_tol * scale:
            bad.append(("endpoint-mismatch", "edge %s start" % e.id,
                        "curve start differs from vertex %s" % e.u))
        if np.linalg.norm(p1 - g.vertices[e.v]) > pol.endpoint_tol * scale:
            bad.append(("endpoint-mismatch", "edge %s end" % e.id,
                        "curve end differs from vertex %s" % e.v))
        pts = np.atleast_2d(e.curve.position(grid))
        samples[idx] = pts
        length = float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())
        speeds = np.linalg.norm(np.atleast_2d(e.curve.derivative(mids)), axis=1)
        if speeds.min() <= _DERIV_FLOOR * max(length, 1e-30):
            bad.append(("zero-derivative", "edge %s" % e.id,
                        "parameter speed drops below the floor"))
        # Approximate self-injectivity: distant parameters, close images
        # (segment-level, so crossings between samples are caught too).
        gap = max(4, pol.samples_per_edge // 16)
        dmat = _segment_dist_matrix(pts, pts)
        ii, jj = np.triu_indices(len(pts) - 1, k=gap)
        if len(ii) and dmat[ii, jj].min() < pol.min_distance_factor * diam:
            bad.append(("self-intersection", "edge %s" % e.id,
                        "distant parameters map to coincident points"))

    seg_grid = 0.5 * (grid[:-1] + grid[1:])
    for i in range(len(g.edges)):
        for j in range(i + 1, len(g.edges)):
            vshared = g.shared_vertex(i, j)
            pi, pj = samples[i], samples[j]
            keep_i = np.ones(len(seg_grid), dtype=bool)
            keep_j = np.ones(len(seg_grid), dtype=bool)
            if vshared is not None:
                # Excise a parameter collar around the shared vertex.
                for e_idx, keep in ((i, keep_i), (j, keep_j)):
                    end = g.edges[e_idx].end_at(vshared)
                    texcl = pol.vertex_exclusion
                    if end == 0:
                        keep &= seg_grid > texcl
                    else:
                        keep &= seg_grid < 1.0 - texcl
            dmat = _segment_dist_matrix(pi, pj)[np.ix_(keep_i, keep_j)]
            if dmat.size and dmat.min() < pol.min_distance_factor * diam:
                bad.append(("intersection", "edges %s,%s"
                            % (g.edges[i].id, g.edges[j].id),
                            "images approach away from shared vertices"))

    try:
        va = vertex_angles(g)
        for vid, per in va.angles.items():
            for (ei, ej), ang in per.items():
                if ang <= pol.angle_floor:
                    bad.append(("zero-angle", "vertex %s edges %s,%s"
                                % (vid, ei, ej),
                                "alpha = %.3e below floor" % ang))
    except DegenerateEdgeError as exc:
        bad.append(("zero-derivative", "vertex angles", str(exc)))

    return ValidationReport(bad)


def reparametrize(e, fn, dfn=None):
    """Reparametrize an edge curve by a strictly increasing smooth map.

    Parameters
    ----------
    e : EdgeCurve
    fn : callable
        Monotone map [0,1] -> [0,1] fixing the endpoints (vectorized).
    dfn : callable, optional
        Derivative of ``fn``; central differences are used when omitted.

    Returns
    -------
    ReparamCurve
        Same image and orientation with rescaled parameter speed.
    """
    if dfn is None:
        def dfn(t, _f=fn, _h=1e-6):
            t = np.asarray(t, dtype=float)
            lo = np.clip(t - _h, 0.0, 1.0)
            hi = np.clip(t + _h, 0.0, 1.0)
            return (np.asarray(_f(hi)) - np.asarray(_f(lo))) / (hi - lo)
    if abs(float(fn(0.0))) > 1e-12 or abs(float(fn(1.0)) - 1.0) > 1e-12:
        raise NonMonotoneMapError("map must fix the endpoints 0 and 1")
    mids = (np.arange(64) + 0.5) / 64.0
    if np.min(np.asarray(dfn(mids), dtype=float)) <= 0.0:
        raise NonMonotoneMapError("map derivative must stay positive")
    return ReparamCurve(e, fn, dfn)


def transform(g, m, samples=65, margin_frac=1e-3):
    """Map a graph through a MobiusMap, resampling edges into Hermite curves.

    Positions map through ``m`` and node tangents through its analytic
    differential.  Raises :class:`PoleProximityError` when any inversion
    center of ``m`` comes within ``margin_frac`` of the (stage-transformed)
    image diameter.

    Parameters
    ----------
    g : EmbeddedGraph
    m : geom.MobiusMap
    samples : int
        Hermite nodes per edge in the output graph.
    margin_frac : float
        Pole clearance as a fraction of the current image diameter.

    Returns
    -------
    EmbeddedGraph
    """
    cloud = g.sample_cloud()
    for prim in m.primitives:
        if isinstance(prim, geom.Inversion):
            lo, hi = cloud.min(axis=0), cloud.max(axis=0)
            diam = max(float(np.linalg.norm(hi - lo)), 1e-30)
            clearance = np.sqrt(((cloud - prim.center) ** 2).sum(axis=1).min())
            if clearance < margin_frac * diam:
                raise PoleProximityError(
                    "inversion center within %.2e of the graph image"
                    % clearance)
        cloud = np.array([prim.apply(p) for p in cloud])

    new_vertices = {vid: m.apply(pos) for vid, pos in g.vertices.items()}
    grid = np.linspace(0.0, 1.0, samples)
    new_edges = []
    for e in g.edges:
        pts = np.atleast_2d(e.curve.position(grid))
        ders = np.atleast_2d(e.curve.derivative(grid))
        mpts = np.empty_like(pts)
        mders = np.empty_like(ders)
        for k in range(samples):
            mpts[k], mders[k] = m.differential(pts[k], ders[k])
        new_edges.append(Edge(e.id, e.u, e.v, HermiteCurve(mpts, mders)))
    return EmbeddedGraph(new_vertices, new_edges)


def load_graph(data):
    """Parse the JSON graph format into an EmbeddedGraph.

    Parameters
    ----------
    data : bytes or str

    Returns
    -------
    EmbeddedGraph

    Raises
    ------
    GraphSchemaError
        With the offending field path for malformed input.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise GraphSchemaError("<document>", "invalid JSON: %s" % exc) from exc
    if not isinstance(obj, dict):
        raise GraphSchemaError("<document>", "top level must be an object")
    vspec = obj.get("vertices")
    espec = obj.get("edges")
    if not isinstance(vspec, list) or not vspec:
        raise GraphSchemaError("vertices", "must be a non-empty list")
    if not isinstance(espec, list):
        raise GraphSchemaError("edges", "must be a list")
    vertices = {}
    for k, item in enumerate(vspec):
        path = "vertices[%d]" % k
        if not isinstance(item, dict) or "id" not in item or "pos" not in item:
            raise GraphSchemaError(path, "needs 'id' and 'pos'")
        vid = str(item["id"])
        if vid in vertices:
            raise GraphSchemaError(path + ".id", "duplicate vertex id %s" % vid)
        pos = item["pos"]
        if (not isinstance(pos, list) or len(pos) != 3
                or not all(isinstance(x, (int, float)) for x in pos)):
            raise GraphSchemaError(path + ".pos", "must be [x, y, z]")
        vertices[vid] = np.array(pos, dtype=float)
    edges = []
    seen_ids = set()
    seen_pairs = set()
    for k, item in enumerate(espec):
        path = "edges[%d]" % k
        if not isinstance(item, dict):
            raise GraphSchemaError(path, "must be an object")
        for field in ("id", "from", "to", "curve"):
            if field not in item:
                raise GraphSchemaError(path, "missing field %r" % field)
        eid = str(item["id"])
        if eid in seen_ids:
            raise GraphSchemaError(path + ".id", "duplicate edge id %s" % eid)
        seen_ids.add(eid)
        u, v = str(item["from"]), str(item["to"])
        for vid in (u, v):
            if vid not in vertices:
                raise GraphSchemaError(path, "unknown vertex %s" % vid)
        if u == v:
            raise GraphSchemaError(path, "loop edge at vertex %s" % u)
        pair = (min(u, v), max(u, v))
        if pair in seen_pairs:
            raise GraphSchemaError(path, "multiple edges between %s and %s" % pair)
        seen_pairs.add(pair)
        curve = _curve_from_payload(item["curve"], path + ".curve")
        edges.append(Edge(eid, u, v, curve))
    return EmbeddedGraph(vertices, edges)


def save_graph(g):
    """Serialize a graph to the JSON format (UTF-8 bytes, deterministic).

    Reparametrized curves are resampled into Hermite curves; the three
    serializable kinds round-trip losslessly (floats use shortest repr).
    """
    obj = {
        "vertices": [{"id": vid, "pos": [float(x) for x in g.vertices[vid]]}
                     for vid in sorted(g.vertices)],
        "edges": [{"id": e.id, "from": e.u, "to": e.v,
                   "curve": e.curve.to_payload()} for e in g.edges],
    }
    return json.dumps(obj, indent=1, sort_keys=True).encode("utf-8")


def _polyline_points(g, samples_per_edge):
    grid = np.linspace(0.0, 1.0, samples_per_edge)
    chains = []
    for e in g.edges:
        chains.append(np.atleast_2d(e.curve.position(grid)))
    return chains


def export_ply(g, samples_per_edge=32):
    """ASCII PLY export: edge polylines as vertex + edge elements."""
    chains = _polyline_points(g, samples_per_edge)
    nverts = sum(len(c) for c in chains)
    nsegs = sum(len(c) - 1 for c in chains)
    lines = ["ply", "format ascii 1.0",
             "element vertex %d" % nverts,
             "property double x", "property double y", "property double z",
             "element edge %d" % nsegs,
             "property int vertex1", "property int vertex2",
             "end_header"]
    for chain in chains:
        for p in chain:
            lines.append("%.17g %.17g %.17g" % (p[0], p[1], p[2]))
    base = 0
    for chain in chains:
        for k in range(len(chain) - 1):
            lines.append("%d %d" % (base + k, base + k + 1))
        base += len(chain)
    return ("\n".join(lines) + "\n").encode("ascii")


def export_obj(g, samples_per_edge=32):
    """Wavefront OBJ export: one 'l' polyline per edge (1-based indices)."""
    chains = _polyline_points(g, samples_per_edge)
    lines = ["# polyline export of an embedded graph"]
    for chain in chains:
        for p in chain:
            lines.append("v %.17g %.17g %.17g" % (p[0], p[1], p[2]))
    base = 1
    for chain in chains:
        idx = " ".join(str(base + k) for k in range(len(chain)))
        lines.append("l " + idx)
        base += len(chain)
    return ("\n".join(lines) + "\n").encode("ascii")
