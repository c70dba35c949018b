"""Shared embedded-graph builders for the test suite.

Every builder returns a graph that passes ``graph.validate`` at the default
policy.  The geometry is deliberately mild: bulges small enough that no two
edges approach each other, derivative norms bounded well away from zero, so
the quadrature engine meets its default tolerance everywhere.
"""

import numpy as np

from graphenergy.graph import ArcCurve, Edge, EmbeddedGraph, HermiteCurve

__all__ = [
    "hermite_from",
    "straight_edge",
    "circle3",
    "curved_triangle",
    "bump_triangle",
    "straight_wedge",
    "two_segments",
    "random_graph",
]

# Node count for Hermite resampling of analytic test curves.
_SAMPLES = 33
_TWO_PI = 2.0 * np.pi


def hermite_from(fn, dfn, samples=_SAMPLES):
    """HermiteCurve through analytic positions/derivatives on a uniform grid."""
    grid = np.linspace(0.0, 1.0, samples)
    pts = np.array([fn(t) for t in grid], dtype=float)
    tans = np.array([dfn(t) for t in grid], dtype=float)
    return HermiteCurve(pts, tans)


def straight_edge(eid, u, v, pu, pv):
    """Straight constant-speed segment between two named vertices."""
    pu = np.asarray(pu, dtype=float)
    pv = np.asarray(pv, dtype=float)
    chord = pv - pu
    return Edge(eid, u, v, HermiteCurve([pu, pv], [chord, chord]))


def circle3(radius=1.0):
    """The round circle in the z=0 plane subdivided into a 3-cycle."""
    thetas = {"a": 0.0, "b": _TWO_PI / 3.0, "c": 2.0 * _TWO_PI / 3.0}
    center = np.zeros(3)
    normal = np.array([0.0, 0.0, 1.0])
    verts = {vid: radius * np.array([np.cos(t), np.sin(t), 0.0])
             for vid, t in thetas.items()}
    arcs = [
        Edge("e1", "a", "b",
             ArcCurve(center, normal, radius, 0.0, _TWO_PI / 3.0)),
        Edge("e2", "b", "c",
             ArcCurve(center, normal, radius, _TWO_PI / 3.0,
                      2.0 * _TWO_PI / 3.0)),
        Edge("e3", "c", "a",
             ArcCurve(center, normal, radius, 2.0 * _TWO_PI / 3.0, _TWO_PI)),
    ]
    return EmbeddedGraph(verts, arcs)


# Curved-triangle geometry: vertices spread in 3-space, per-edge sinusoidal
# bulges in fixed perpendicular directions, small enough to keep the edges
# pairwise separated away from the shared vertices.
_TRI_V = {
    "a": np.array([0.0, 0.0, 0.0]),
    "b": np.array([1.0, 0.0, 0.0]),
    "c": np.array([0.35, 0.9, 0.25]),
}
_TRI_BULGE = {
    "e1": 0.18 * np.array([0.0, -0.6, 0.8]),
    "e2": 0.15 * np.array([0.811, 0.586, 0.0]),
    "e3": 0.12 * np.array([0.0, 0.267, -0.964]),
}
_TRI_ENDS = {"e1": ("a", "b"), "e2": ("b", "c"), "e3": ("c", "a")}


def _tri_edge(eid, extra_fn=None, extra_dfn=None):
    ua, ub = _TRI_ENDS[eid]
    pa, pb = _TRI_V[ua], _TRI_V[ub]
    chord = pb - pa
    bulge = _TRI_BULGE[eid]

    def fn(t):
        p = pa + t * chord + np.sin(np.pi * t) * bulge
        if extra_fn is not None:
            p = p + extra_fn(t)
        return p

    def dfn(t):
        d = chord + np.pi * np.cos(np.pi * t) * bulge
        if extra_dfn is not None:
            d = d + extra_dfn(t)
        return d

    return Edge(eid, ua, ub, hermite_from(fn, dfn))


def curved_triangle():
    """Nonplanar triangle with bulged Hermite edges."""
    return EmbeddedGraph(_TRI_V, [_tri_edge(e) for e in _TRI_ENDS])


def bump_triangle(h, direction=(0.0, 0.0, 1.0)):
    """Curved triangle with edge e1 displaced by h sin^2(pi t) in a fixed
    direction; the bump's derivative vanishes at the endpoints, so vertex
    positions and vertex angles are untouched."""
    w = np.asarray(direction, dtype=float)

    def extra_fn(t):
        return h * np.sin(np.pi * t) ** 2 * w

    def extra_dfn(t):
        return h * np.pi * np.sin(2.0 * np.pi * t) * w

    edges = [_tri_edge("e1", extra_fn, extra_dfn),
             _tri_edge("e2"), _tri_edge("e3")]
    return EmbeddedGraph(_TRI_V, edges)


def straight_wedge(alpha, leg=1.0):
    """Two straight unit-speed legs meeting at the origin at angle alpha.

    Vertices: "o" (apex), "p" along +x, "q" at angle alpha in the z=0
    plane.  Edge ids "e1" (o-p) and "e2" (o-q); both curves run away from
    the apex after canonical orientation ("o" sorts first).
    """
    o = np.zeros(3)
    p = leg * np.array([1.0, 0.0, 0.0])
    q = leg * np.array([np.cos(alpha), np.sin(alpha), 0.0])
    verts = {"o": o, "p": p, "q": q}
    edges = [straight_edge("e1", "o", "p", o, p),
             straight_edge("e2", "o", "q", o, q)]
    return EmbeddedGraph(verts, edges)


def two_segments(delta):
    """Two non-adjacent unit segments at closest distance delta.

    Segment A runs along the x axis; segment B is perpendicular (skew),
    offset by delta in y, so the near-contact sits at interior parameters
    of both edges.
    """
    verts = {
        "a1": np.array([0.0, 0.0, 0.0]),
        "a2": np.array([1.0, 0.0, 0.0]),
        "b1": np.array([0.3, delta, -0.5]),
        "b2": np.array([0.3, delta, 0.5]),
    }
    edges = [straight_edge("ea", "a1", "a2", verts["a1"], verts["a2"]),
             straight_edge("eb", "b1", "b2", verts["b1"], verts["b2"])]
    return EmbeddedGraph(verts, edges)


# Topologies for randomized graphs: vertex count and edge endpoint pairs.
_TOPOLOGIES = (
    (3, (("v0", "v1"), ("v1", "v2"))),                    # path
    (4, (("v0", "v1"), ("v1", "v2"), ("v2", "v3"))),      # longer path
    (4, (("v0", "v1"), ("v0", "v2"), ("v0", "v3"))),      # star
    (3, (("v0", "v1"), ("v1", "v2"), ("v0", "v2"))),      # cycle
    (4, (("v0", "v1"), ("v2", "v3"))),                    # disjoint pair
)


def random_graph(rng, max_tries=200):
    """A randomized valid embedded graph drawn with the given generator.

    Vertices are spread points in a ball, edges straight or gently bulged;
    candidates failing validation (edge proximity) are redrawn, so the
    returned graph always validates.
    """
    from graphenergy.graph import validate

    for _ in range(max_tries):
        nv, topo = _TOPOLOGIES[int(rng.integers(len(_TOPOLOGIES)))]
        pts = rng.normal(size=(nv, 3))
        pts *= rng.uniform(0.6, 1.4) / np.linalg.norm(pts, axis=1)[:, None]
        d = np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)
        np.fill_diagonal(d, np.inf)
        if d.min() < 0.5:
            continue
        scale = float(rng.uniform(0.5, 2.0))
        pts *= scale
        verts = {"v%d" % i: pts[i] for i in range(nv)}
        edges = []
        ok = True
        for k, (ua, ub) in enumerate(topo):
            pa, pb = verts[ua], verts[ub]
            chord = pb - pa
            raw = rng.normal(size=3)
            perp = raw - (raw @ chord) * chord / (chord @ chord)
            norm = np.linalg.norm(perp)
            if norm < 1e-12:
                ok = False
                break
            bulge = (float(rng.uniform(0.0, 0.15))
                     * np.linalg.norm(chord) / norm) * perp

            def fn(t, pa=pa, chord=chord, bulge=bulge):
                return pa + t * chord + np.sin(np.pi * t) * bulge

            def dfn(t, chord=chord, bulge=bulge):
                return chord + np.pi * np.cos(np.pi * t) * bulge

            edges.append(Edge("e%d" % k, ua, ub, hermite_from(fn, dfn)))
        if not ok:
            continue
        g = EmbeddedGraph(verts, edges)
        if validate(g).ok:
            return g
    raise RuntimeError("no valid random graph after %d tries" % max_tries)
