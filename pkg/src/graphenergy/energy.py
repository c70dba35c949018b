"""Mobius energy of embedded graphs: integrands, quadrature, asymptotics.

The energy M(gamma, G) is a double sum over ordered edge pairs of double
integrals in the three pair cases (same edge, disjoint edges, edges adjacent
at a vertex).  Integration uses tensor Gauss panels with dyadic refinement
toward the singular set (the parameter diagonal, or the shared-vertex
corner), a deterministic summation order, and an error estimate from the two
finest refinement levels.  The truncated principal term of the adjacent case
and its logarithmic slope extraction live here as well.

Pointwise integrand values from :func:`integrand` go through the
constructive circle route in :mod:`geom`; the quadrature engine itself uses
the closed-form kernels in :mod:`kernels`.  The two routes are independent
implementations of the same formulas and are compared in the test suite.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.special import roots_legendre

from . import geom, graph, kernels

__all__ = [
    "EnergyError",
    "ToleranceNotMetError",
    "TruncationDomainError",
    "PairKind",
    "QuadratureConfig",
    "PairResult",
    "EnergyReport",
    "classify_pairs",
    "integrand",
    "pair_energy",
    "total_energy",
    "truncated_principal",
    "log_slope_fit",
    "wedge_oracle_slope",
]

# Absolute floor under the relative tolerance when judging convergence.
_ABS_TOL = 1e-8
# Panel bound comparisons (bounds are exact binary fractions; the slack is
# pure defensiveness).
_BOUND_EPS = 1e-12


class EnergyError(ValueError):
    """Base class for energy computation failures."""


class ToleranceNotMetError(EnergyError):
    """Quadrature did not converge at max depth; carries the best value."""

    def __init__(self, message, value, err):
        super().__init__(message)
        self.value = value
        self.err = err


class TruncationDomainError(EnergyError):
    """The epsilon-truncated domain V_eps is empty or ill-posed."""


class PairKind:
    """Ordered edge-pair classification: same / disjoint / adjacent.

    ``i`` and ``j`` are edge indices into ``g.edges``; for the adjacent kind
    the pair is ordered (edge i oriented toward the shared vertex, edge j
    away) and ``vertex`` holds the shared vertex id.
    """

    __slots__ = ("kind", "i", "j", "vertex")

    def __init__(self, kind, i, j, vertex=None):
        self.kind = kind
        self.i = i
        self.j = j
        self.vertex = vertex

    @classmethod
    def same_edge(cls, i):
        return cls("same", i, i)

    @classmethod
    def disjoint(cls, i, j):
        return cls("disjoint", i, j)

    @classmethod
    def adjacent(cls, i, j, vertex):
        return cls("adjacent", i, j, vertex)

    def __repr__(self):
        if self.kind == "adjacent":
            return "PairKind(adjacent, %d, %d, at %s)" % (self.i, self.j,
                                                          self.vertex)
        return "PairKind(%s, %d, %d)" % (self.kind, self.i, self.j)


def classify_pairs(g):
    """All ordered edge pairs of a graph, classified.

    Diagonal pairs appear once (same edge); every unordered pair of distinct
    edges appears as both ordered variants, disjoint or adjacent according to
    whether the edges share a vertex.
    """
    pairs = []
    n = len(g.edges)
    for i in range(n):
        pairs.append(PairKind.same_edge(i))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            v = g.shared_vertex(i, j)
            if v is None:
                pairs.append(PairKind.disjoint(i, j))
            else:
                pairs.append(PairKind.adjacent(i, j, v))
    return pairs


class QuadratureConfig:
    """Quadrature engine parameters.

    Parameters
    ----------
    base_panels : int
        Uniform panels per axis before refinement (default 16).
    nodes : (int, int)
        Gauss nodes per panel axis; deliberately unequal by default (8, 9)
        so no tensor node ever lands on the same-edge diagonal.
    depth : int
        Dyadic refinement generations toward the singular set (default 6).
    rel_tol : float
        Target relative tolerance for pair energies (default 1e-4).
    deterministic : bool
        Use exact compensated summation in a fixed order (default True).
    """

    def __init__(self, base_panels=16, nodes=(8, 9), depth=6, rel_tol=1e-4,
                 deterministic=True):
        if base_panels <= 0 or depth < 0:
            raise ValueError("panel counts and depth must be positive")
        if not (0.0 < rel_tol < 1.0):
            raise ValueError("rel_tol must lie in (0, 1)")
        nx, ny = nodes
        if nx <= 0 or ny <= 0:
            raise ValueError("node counts must be positive")
        self.base_panels = int(base_panels)
        self.nodes = (int(nx), int(ny))
        self.depth = int(depth)
        self.rel_tol = float(rel_tol)
        self.deterministic = bool(deterministic)

    def to_payload(self):
        return {"base_panels": self.base_panels, "nodes": list(self.nodes),
                "depth": self.depth, "rel_tol": self.rel_tol,
                "deterministic": self.deterministic}


class PairResult:
    """One ordered pair's contribution to the energy."""

    __slots__ = ("i", "j", "kind", "value", "err")

    def __init__(self, i, j, kind, value, err):
        self.i = i
        self.j = j
        self.kind = kind
        self.value = value
        self.err = err


class EnergyReport:
    """Energy of a graph: ordered pair table, total, error, metadata.

    ``wall_time`` (seconds) and ``backend`` are in-memory run metadata and
    are not serialized, keeping CSV/JSON output byte-stable across machines.
    """

    def __init__(self, pairs, total, total_err, config, wall_time, backend):
        self.pairs = pairs
        self.total = total
        self.total_err = total_err
        self.config = config
        self.wall_time = wall_time
        self.backend = backend

    def to_csv(self):
        lines = ["pair_i,pair_j,kind,value,err"]
        for r in self.pairs:
            lines.append("%d,%d,%s,%.17g,%.17g"
                         % (r.i, r.j, r.kind, r.value, r.err))
        lines.append("total,,,%.17g,%.17g" % (self.total, self.total_err))
        return "\n".join(lines) + "\n"

    def to_json_obj(self):
        return {
            "config": self.config.to_payload(),
            "pairs": [{"i": r.i, "j": r.j, "kind": r.kind,
                       "value": r.value, "err": r.err} for r in self.pairs],
            "total": self.total,
            "total_err": self.total_err,
        }


def _fsum(values):
    return math.fsum(values)


def _reduce(out, mult, deterministic):
    contrib = out * mult
    if deterministic:
        return _fsum(contrib.tolist())
    return float(contrib.sum())


_GAUSS_CACHE = {}


def _gauss(n):
    if n not in _GAUSS_CACHE:
        x, w = roots_legendre(n)
        _GAUSS_CACHE[n] = (np.asarray(x, dtype=float),
                           np.asarray(w, dtype=float))
    return _GAUSS_CACHE[n]


class _Side:
    """One integration axis: an edge curve, optionally direction-flipped.

    The flip maps the oriented parameter t to the natural parameter 1 - t
    and negates derivatives, so that adjacent pairs can always be integrated
    in coordinates with the shared vertex at (x, y) = (1, 0).
    """

    def __init__(self, curve, flip=False):
        self.curve = curve
        self.flip = flip

    def eval(self, params):
        t = 1.0 - params if self.flip else params
        flat = t.ravel()
        pos = np.ascontiguousarray(
            np.atleast_2d(self.curve.position(flat)), dtype=float)
        der = np.ascontiguousarray(
            np.atleast_2d(self.curve.derivative(flat)), dtype=float)
        if self.flip:
            der = -der
        shape = params.shape + (3,)
        return pos.reshape(shape), der.reshape(shape)


# Panels per kernel batch; bounds transient array sizes on deep refinements.
_EVAL_CHUNK = 4096


def _eval_panels(side_x, side_y, panels, cfg, kfun, extra=()):
    """Evaluate the kernel's weighted sums on a batch of panels.

    ``panels`` is (n, 5): x0, x1, y0, y1, multiplicity.  Returns the raw
    per-panel sums (n,) without multiplicities applied.
    """
    n = len(panels)
    if n > _EVAL_CHUNK:
        out = np.empty(n)
        for k in range(0, n, _EVAL_CHUNK):
            out[k:k + _EVAL_CHUNK] = _eval_panels(
                side_x, side_y, panels[k:k + _EVAL_CHUNK], cfg, kfun, extra)
        return out
    nx, ny = cfg.nodes
    xi_x, w_x = _gauss(nx)
    xi_y, w_y = _gauss(ny)
    x0, x1, y0, y1 = panels[:, 0], panels[:, 1], panels[:, 2], panels[:, 3]
    xh = 0.5 * (x1 - x0)
    yh = 0.5 * (y1 - y0)
    xparams = (x0 + xh)[:, None] + xh[:, None] * xi_x[None, :]
    yparams = (y0 + yh)[:, None] + yh[:, None] * xi_y[None, :]
    wx = np.ascontiguousarray(xh[:, None] * w_x[None, :])
    wy = np.ascontiguousarray(yh[:, None] * w_y[None, :])
    p1, d1 = side_x.eval(xparams)
    p2, d2 = side_y.eval(yparams)
    p1 = np.ascontiguousarray(p1)
    d1 = np.ascontiguousarray(d1)
    p2 = np.ascontiguousarray(p2)
    d2 = np.ascontiguousarray(d2)
    out = np.empty(len(panels))
    kfun(p1, d1, p2, d2, wx, wy, *extra, out)
    return out


def _split4(panels):
    """Parent-major quadrisection: panel k yields children 4k .. 4k+3."""
    x0, x1, y0, y1, m = (panels[:, k] for k in range(5))
    xm = 0.5 * (x0 + x1)
    ym = 0.5 * (y0 + y1)
    kids = np.empty((len(panels), 4, 5))
    for q, (xa, xb, ya, yb) in enumerate(((x0, xm, y0, ym), (x0, xm, ym, y1),
                                          (xm, x1, y0, ym), (xm, x1, ym, y1))):
        kids[:, q, 0] = xa
        kids[:, q, 1] = xb
        kids[:, q, 2] = ya
        kids[:, q, 3] = yb
        kids[:, q, 4] = m
    return kids.reshape(-1, 5)


def _base_grid(b):
    edges = np.linspace(0.0, 1.0, b + 1)
    cells = []
    for i in range(b):
        for j in range(b):
            cells.append((edges[i], edges[i + 1], edges[j], edges[j + 1], 1.0))
    return np.array(cells)


# Extra adaptive generations allowed past the mandatory chain depth.
_ADAPT_EXTRA = 8
# Absolute floor of the per-pair refinement budget.
_BUDGET_FLOOR = 1e-12
# Hard cap on refined-panel evaluations per pair (safety valve; normal runs
# stay one to two orders of magnitude below it).
_MAX_PANEL_EVALS = 400000
# Share of rel_tol * |rough| granted to the acceptance bank, and the safety
# factor on the reported error: two-level deltas are an optimistic estimator,
# so the reported error is doubled while the bank is kept small enough that
# the doubled estimate still meets the configured tolerance.
_BUDGET_SHARE = 0.4
_ERR_SAFETY = 2.0


def _integrate(side_x, side_y, base, cfg, kfun, extra, touching, mirror):
    """Budgeted greedy panel refinement with mandatory chain descent.

    Every active panel is compared against its four children (the two-level
    difference ``delta`` is both the refinement driver and the error
    estimate).  Panels are accepted smallest-delta first while the accepted
    deltas fit the remaining half of a global budget proportional to
    rel_tol * |rough|; the rest descend.  This concentrates work on genuine
    features (in particular the narrow ridge the adjacent-case integrand
    develops along the locus where the two beta branches cross near the
    shared vertex) instead of spreading it by panel area.  Panels whose closure meets the
    singular set (``touching``) always descend to the configured chain
    depth, reproducing the dyadic diagonal/corner grading; generation
    ``depth + _ADAPT_EXTRA`` and the evaluation cap force acceptance, with
    the residual deltas reported honestly in the error.  ``mirror`` enables
    the same-edge upper-triangle bookkeeping (strictly-lower children
    dropped, multiplicity 2 off the diagonal).
    """

    def evaluate(panels):
        return _eval_panels(side_x, side_y, panels, cfg, kfun, extra)

    out0 = evaluate(base)
    rough = _reduce(out0, base[:, 4], cfg.deterministic)
    budget = max(_BUDGET_SHARE * cfg.rel_tol * abs(rough), _BUDGET_FLOOR)
    cap = cfg.depth + _ADAPT_EXTRA

    value_parts = []
    err_parts = []
    active = base
    active_out = out0
    gen = 0
    evals = len(base)
    while len(active):
        kids = _split4(active)
        parent_of = np.repeat(np.arange(len(active)), 4)
        if mirror:
            lower = kids[:, 3] <= kids[:, 0] + _BOUND_EPS
            kids = kids[~lower]
            parent_of = parent_of[~lower]
            diag = np.abs(kids[:, 0] - kids[:, 2]) <= _BOUND_EPS
            kids[:, 4] = np.where(diag, 1.0, 2.0)
        kid_out = evaluate(kids)
        evals += len(kids)
        kid_sums = np.bincount(parent_of, weights=kid_out * kids[:, 4],
                               minlength=len(active))
        delta = np.abs(kid_sums - active_out * active[:, 4])

        chained = touching(active) & (gen < cfg.depth)
        forced = (gen + 1 >= cap) | (evals >= _MAX_PANEL_EVALS)
        if forced:
            accept = np.ones(len(active), dtype=bool)
        else:
            accept = np.zeros(len(active), dtype=bool)
            eligible = np.flatnonzero(~chained)
            if eligible.size:
                # Cheapest-first prefix within half the remaining budget.
                bank = max(budget - _fsum(err_parts), 0.0)
                order = eligible[np.argsort(delta[eligible], kind="stable")]
                fits = np.cumsum(delta[order]) <= 0.5 * bank
                accept[order[fits]] = True
        if accept.any():
            value_parts.extend(kid_sums[accept].tolist())
            err_parts.extend(delta[accept].tolist())
        keep = ~accept[parent_of]
        active = kids[keep]
        active_out = kid_out[keep]
        gen += 1
    return _fsum(value_parts), _ERR_SAFETY * _fsum(err_parts)


def _never_touching(panels):
    return np.zeros(len(panels), dtype=bool)


def _same_edge_value(curve, cfg):
    """Same-edge pair: mirror-symmetric upper-triangle panel scheme.

    The integrand is symmetric under (x, y) swap, so strictly-upper panels
    carry multiplicity 2 and diagonal cells multiplicity 1; the singular set
    is the parameter diagonal.
    """
    b = cfg.base_panels
    edges = np.linspace(0.0, 1.0, b + 1)
    cells = []
    for i in range(b):
        for j in range(i, b):
            cells.append((edges[i], edges[i + 1], edges[j], edges[j + 1],
                          1.0 if i == j else 2.0))
    side = _Side(curve)

    def touching(p):
        return (p[:, 2] <= p[:, 1] + _BOUND_EPS) & (p[:, 3] >= p[:, 0] - _BOUND_EPS)

    return _integrate(side, side, np.array(cells), cfg,
                      kernels.panel_sums_same, (), touching, mirror=True)


def _adjacent_value(g, pair, cfg, va):
    """Adjacent pair in oriented coordinates (shared vertex at (1, 0))."""
    ei, ej = g.edges[pair.i], g.edges[pair.j]
    vid = pair.vertex
    side_x = _Side(ei.curve, flip=ei.end_at(vid) == 0)
    side_y = _Side(ej.curve, flip=ej.end_at(vid) == 1)
    alpha = va.angle(vid, ei.id, ej.id)
    v = np.ascontiguousarray(g.vertices[vid], dtype=float)
    extra = (v, math.cos(alpha), math.sin(alpha))

    def touching(p):
        return (p[:, 1] >= 1.0 - _BOUND_EPS) & (p[:, 2] <= _BOUND_EPS)

    return _integrate(side_x, side_y, _base_grid(cfg.base_panels), cfg,
                      kernels.panel_sums_adjacent, extra, touching,
                      mirror=False)


def _disjoint_value(g, pair, cfg):
    """Disjoint pair: smooth integrand, purely error-driven refinement."""
    side_x = _Side(g.edges[pair.i].curve)
    side_y = _Side(g.edges[pair.j].curve)
    return _integrate(side_x, side_y, _base_grid(cfg.base_panels), cfg,
                      kernels.panel_sums_disjoint, (), _never_touching,
                      mirror=False)


def integrand(g, pair, t1, t2):
    """Pointwise integrand of an ordered pair, by the constructive route.

    Parameters are the natural curve parameters of the two edges (for the
    same-edge kind, of that one edge twice).  Circles, tangents and angles
    are built explicitly through :mod:`geom`; this is the reference
    implementation against which the quadrature kernels are validated.

    Returns
    -------
    float
        Nonnegative integrand value (per unit parameter squared).
    """
    e1 = g.edges[pair.i]
    p1 = np.asarray(e1.curve.position(float(t1)), dtype=float)
    d1 = np.asarray(e1.curve.derivative(float(t1)), dtype=float)
    if pair.kind == "same":
        if t1 == t2:
            raise EnergyError("same-edge integrand is undefined on the diagonal")
        p2 = np.asarray(e1.curve.position(float(t2)), dtype=float)
        d2 = np.asarray(e1.curve.derivative(float(t2)), dtype=float)
        n1, n2 = np.linalg.norm(d1), np.linalg.norm(d2)
        theta = geom.conformal_angle_theta(p1, d1 / n1, p2, d2 / n2)
        r2 = float(((p1 - p2) ** 2).sum())
        return (1.0 - math.cos(theta)) * n1 * n2 / r2
    e2 = g.edges[pair.j]
    p2 = np.asarray(e2.curve.position(float(t2)), dtype=float)
    d2 = np.asarray(e2.curve.derivative(float(t2)), dtype=float)
    n1, n2 = np.linalg.norm(d1), np.linalg.norm(d2)
    r2 = float(((p1 - p2) ** 2).sum())
    if pair.kind == "disjoint":
        return n1 * n2 / r2
    v = g.vertices[pair.vertex]
    u1 = d1 / n1
    if e1.end_at(pair.vertex) == 0:
        u1 = -u1  # orient edge i toward the common vertex
    u2 = d2 / n2
    if e2.end_at(pair.vertex) == 1:
        u2 = -u2  # orient edge j away from the common vertex
    va = graph.vertex_angles(g)
    alpha = va.angle(pair.vertex, e1.id, e2.id)
    theta = geom.conformal_angle_theta(p1, u1, p2, u2)
    beta_ij = geom.beta_angle(v, p1, p2, u2)
    beta_ji = geom.beta_angle(v, p2, p1, -u1)
    beta = min(beta_ij, beta_ji)
    c = theta + 2.0 * beta - alpha - math.pi
    return max(1.0 - math.cos(c), 0.0) * n1 * n2 / r2


def _pair_value(g, pair, cfg, va):
    if pair.kind == "same":
        return _same_edge_value(g.edges[pair.i].curve, cfg)
    if pair.kind == "disjoint":
        return _disjoint_value(g, pair, cfg)
    return _adjacent_value(g, pair, cfg, va)


def pair_energy(g, pair, q=None):
    """Energy contribution of one ordered edge pair.

    Parameters
    ----------
    g : graph.EmbeddedGraph
    pair : PairKind
    q : QuadratureConfig, optional

    Returns
    -------
    (float, float)
        Value and estimated quadrature error.

    Raises
    ------
    ToleranceNotMetError
        When the two finest refinement levels disagree beyond the target
        tolerance; the exception carries the best value and error.
    """
    cfg = q or QuadratureConfig()
    va = graph.vertex_angles(g) if pair.kind == "adjacent" else None
    value, err = _pair_value(g, pair, cfg, va)
    if err > max(cfg.rel_tol * abs(value), _ABS_TOL):
        raise ToleranceNotMetError(
            "pair (%d, %d) did not converge: err %.3e on value %.10g"
            % (pair.i, pair.j, err, value), value, err)
    return value, err


def total_energy(g, q=None, threads=1):
    """Total Mobius energy M(gamma, G): literal ordered double sum.

    Same-edge terms enter once, each unordered disjoint pair twice (equal
    values, computed once), and each adjacent pair as both ordered variants
    (generally different integrands).  Pair results are accumulated in a
    fixed lexicographic order with exact compensated summation.

    Parameters
    ----------
    g : graph.EmbeddedGraph
    q : QuadratureConfig, optional
    threads : int
        Worker threads for pair evaluation; results are merged in canonical
        order, so the report is identical for any thread count.

    Returns
    -------
    EnergyReport
    """
    cfg = q or QuadratureConfig()
    t0 = time.perf_counter()
    va = graph.vertex_angles(g)
    n = len(g.edges)

    jobs = []
    for i in range(n):
        jobs.append(PairKind.same_edge(i))
    for i in range(n):
        for j in range(i + 1, n):
            v = g.shared_vertex(i, j)
            if v is None:
                jobs.append(PairKind.disjoint(i, j))
            else:
                jobs.append(PairKind.adjacent(i, j, v))
                jobs.append(PairKind.adjacent(j, i, v))

    def run(pair):
        return _pair_value(g, pair, cfg, va)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(pair) for pair in jobs]

    by_ordered = {}
    for pair, (value, err) in zip(jobs, results):
        if err > max(cfg.rel_tol * abs(value), _ABS_TOL):
            raise ToleranceNotMetError(
                "pair (%d, %d) did not converge: err %.3e on value %.10g"
                % (pair.i, pair.j, err, value), value, err)
        by_ordered[(pair.i, pair.j)] = PairResult(pair.i, pair.j, pair.kind,
                                                  value, err)
        if pair.kind == "disjoint":
            by_ordered[(pair.j, pair.i)] = PairResult(pair.j, pair.i,
                                                      pair.kind, value, err)

    rows = [by_ordered[key] for key in sorted(by_ordered)]
    total = _fsum([r.value for r in rows])
    total_err = _fsum([r.err for r in rows])
    wall = time.perf_counter() - t0
    return EnergyReport(rows, total, total_err, cfg, wall,
                        kernels.backend_name())


def _outside_intervals(curve, center, eps, samples=1024):
    """Parameter intervals where |curve(t) - center| >= eps.

    The distance is sampled on a fine grid; each sign change of d - eps is
    sharpened by bisection.  Near the incident vertex the distance is
    monotone and this reduces to a single clipped interval.
    """
    grid = np.linspace(0.0, 1.0, samples + 1)
    pts = np.atleast_2d(curve.position(grid))
    dist = np.linalg.norm(pts - center, axis=1) - eps

    def refine(lo, hi, flo):
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            fm = float(np.linalg.norm(
                np.asarray(curve.position(mid), dtype=float) - center)) - eps
            if (fm >= 0.0) == (flo >= 0.0):
                lo, flo = mid, fm
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        return 0.5 * (lo + hi)

    intervals = []
    inside = dist[0] >= 0.0
    start = 0.0 if inside else None
    for k in range(samples):
        if (dist[k + 1] >= 0.0) != inside:
            t = refine(grid[k], grid[k + 1], dist[k])
            if inside:
                intervals.append((start, t))
                start = None
            else:
                start = t
            inside = not inside
    if inside:
        intervals.append((start, 1.0))
    return [(a, b) for a, b in intervals if b - a > 1e-13]


def _graded_breaks(a, b, toward_b, target, max_levels=40):
    """Axis breakpoints of [a, b], geometrically graded toward one end."""
    span = b - a
    levels = 1
    while span * 0.5 ** levels > target and levels < max_levels:
        levels += 1
    fracs = [0.5 ** k for k in range(levels, 0, -1)]
    pts = [a] + [a + span * f for f in fracs[:-1]] + [b]
    if toward_b:
        pts = [a + b - p for p in reversed(pts)]
    return pts


def truncated_principal(g, pair, eps):
    """Truncated principal term of an adjacent pair.

    Integrates |g1'||g2'| / |D|^2 over V_eps, the parameter set where both
    edge images lie outside the ball of radius ``eps`` around the shared
    vertex.  The clipped boundary is located by bisection on the distance to
    the vertex; panels are geometrically graded toward the vertex-adjacent
    boundary so the 1/eps^2 peak there is resolved.

    Parameters
    ----------
    g : graph.EmbeddedGraph
    pair : PairKind
        Must be an adjacent pair.
    eps : float

    Returns
    -------
    float

    Raises
    ------
    TruncationDomainError
        When eps exceeds the largest radius both edges leave.
    """
    if pair.kind != "adjacent":
        raise EnergyError("truncated principal term needs an adjacent pair")
    if eps <= 0.0:
        raise TruncationDomainError("eps must be positive")
    ei, ej = g.edges[pair.i], g.edges[pair.j]
    vid = pair.vertex
    v = np.asarray(g.vertices[vid], dtype=float)
    side_x = _Side(ei.curve, flip=ei.end_at(vid) == 0)
    side_y = _Side(ej.curve, flip=ej.end_at(vid) == 1)

    grid = np.linspace(0.0, 1.0, 1025)
    reach = []
    for side in (side_x, side_y):
        pts, _ = side.eval(grid)
        reach.append(float(np.linalg.norm(pts - v, axis=1).max()))
    eps_max = min(reach)
    if eps > eps_max:
        raise TruncationDomainError(
            "eps %.6g exceeds eps_max %.6g (an edge never leaves the ball)"
            % (eps, eps_max))

    class _SideCurve:
        def __init__(self, side):
            self.side = side

        def position(self, t):
            pos, _ = self.side.eval(np.atleast_1d(np.asarray(t, dtype=float)))
            return pos[0] if np.isscalar(t) or np.ndim(t) == 0 else pos

    ax = _outside_intervals(_SideCurve(side_x), v, eps)
    ay = _outside_intervals(_SideCurve(side_y), v, eps)
    if not ax or not ay:
        return 0.0

    cfg = QuadratureConfig()
    target = max(eps * 0.25, 1e-12)
    parts = []
    for xa, xb in ax:
        # Oriented coords put the vertex at x = 1: grade toward the upper end.
        xbreaks = _graded_breaks(xa, xb, True, target)
        for ya, yb in ay:
            ybreaks = _graded_breaks(ya, yb, False, target)
            cells = []
            for k in range(len(xbreaks) - 1):
                for l in range(len(ybreaks) - 1):
                    cells.append((xbreaks[k], xbreaks[k + 1],
                                  ybreaks[l], ybreaks[l + 1], 1.0))
            panels = np.array(cells)
            out = _eval_panels(side_x, side_y, panels, cfg,
                               kernels.panel_sums_disjoint)
            parts.append(_reduce(out, panels[:, 4], cfg.deterministic))
    return _fsum(parts)


def log_slope_fit(eps_values, values):
    """Affine fit of values against ln(1/eps).

    Parameters
    ----------
    eps_values, values : array_like
        At least 4 geometrically spaced eps points and the data at them.

    Returns
    -------
    (float, float, float)
        Slope, intercept (the eps-independent constant), and R^2.
    """
    eps_values = np.asarray(eps_values, dtype=float)
    values = np.asarray(values, dtype=float)
    if eps_values.size < 4:
        raise EnergyError("log-slope fit needs at least 4 points")
    x = np.log(1.0 / eps_values)
    slope, intercept = np.polyfit(x, values, 1)
    fitted = slope * x + intercept
    ss_res = float(((values - fitted) ** 2).sum())
    ss_tot = float(((values - values.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def wedge_oracle_slope(alpha, ladder=None, cells=2000):
    """Log-divergence coefficient of a straight unit wedge, by brute force.

    Riemann midpoint summation of 1 / (s^2 + t^2 - 2 s t cos alpha) over
    [eps, 1]^2 on a geometric grid, for a decreasing eps ladder, followed by
    an affine fit in ln(1/eps).  Fully independent of the panel engine and
    of any closed-form expectation.

    Parameters
    ----------
    alpha : float
        Wedge angle in (0, pi].
    ladder : sequence of float, optional
        Decreasing eps values (default 1e-3 .. 1e-5, 8 points).
    cells : int
        Geometric grid cells per axis.

    Returns
    -------
    float
    """
    if not (0.0 < alpha <= math.pi):
        raise EnergyError("wedge angle must lie in (0, pi]")
    if ladder is None:
        ladder = np.geomspace(1e-3, 1e-5, 8)
    ca = math.cos(alpha)
    totals = []
    for eps in ladder:
        edges = np.geomspace(eps, 1.0, cells + 1)
        mids = np.sqrt(edges[:-1] * edges[1:])
        widths = np.diff(edges)
        s = mids[:, None]
        t = mids[None, :]
        f = 1.0 / (s * s + t * t - 2.0 * ca * s * t)
        totals.append(float(f @ widths @ widths))
    slope, _, _ = log_slope_fit(np.asarray(ladder, dtype=float),
                                np.asarray(totals))
    return slope
