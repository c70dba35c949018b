"""Energy tests: classification, integrands, quadrature, asymptotics."""

import math

import numpy as np
import pytest

import shapes
from graphenergy import geom, graph, kernels
from graphenergy.energy import (
    EnergyError,
    PairKind,
    QuadratureConfig,
    ToleranceNotMetError,
    TruncationDomainError,
    classify_pairs,
    integrand,
    log_slope_fit,
    pair_energy,
    total_energy,
    truncated_principal,
    wedge_oracle_slope,
)

_TOL = 1e-9


# ---------------------------------------------------------- classification

def test_classify_pairs_two_segments():
    pairs = classify_pairs(shapes.two_segments(0.5))
    tags = sorted((p.kind, p.i, p.j) for p in pairs)
    assert tags == [("disjoint", 0, 1), ("disjoint", 1, 0),
                    ("same", 0, 0), ("same", 1, 1)]


def test_classify_pairs_triangle():
    pairs = classify_pairs(shapes.circle3())
    kinds = sorted(p.kind for p in pairs)
    assert kinds == ["adjacent"] * 6 + ["same"] * 3
    for p in pairs:
        if p.kind == "adjacent":
            assert p.vertex is not None
            # Ordered variants carry the same shared vertex.
            twin = next(q for q in pairs if (q.i, q.j) == (p.j, p.i))
            assert twin.vertex == p.vertex


# --------------------------------------------------------------- integrand

def test_integrand_straight_same_edge_vanishes():
    g = shapes.straight_wedge(2.0)
    assert integrand(g, PairKind.same_edge(0), 0.2, 0.9) == 0.0


def test_integrand_same_edge_diagonal_raises():
    g = shapes.curved_triangle()
    with pytest.raises(EnergyError, match="diagonal"):
        integrand(g, PairKind.same_edge(0), 0.4, 0.4)


def test_integrand_disjoint_unit_distance():
    # Unit-speed lines, unit separation: |g1'||g2'| / |D|^2 = 1.
    g = shapes.two_segments(1.0)
    val = integrand(g, PairKind.disjoint(0, 1), 0.3, 0.5)
    assert abs(val - 1.0) < _TOL


def test_integrand_circle_arcs_vanish():
    # A round circle is the global minimizer of each term: subarcs of one
    # circle give zero in the same-edge and adjacent cases alike.
    c = shapes.circle3()
    assert integrand(c, PairKind.same_edge(0), 0.3, 0.8) < 1e-12
    v = c.shared_vertex(0, 1)
    assert integrand(c, PairKind.adjacent(0, 1, v), 0.3, 0.6) < 1e-12
    assert integrand(c, PairKind.adjacent(1, 0, v), 0.25, 0.75) < 1e-12


def test_integrand_nonnegative_random_graphs():
    rng = np.random.default_rng(31)
    for _ in range(3):
        g = shapes.random_graph(rng)
        for pair in classify_pairs(g):
            for _ in range(8):
                t1, t2 = rng.uniform(0.05, 0.95, size=2)
                if pair.kind == "same" and abs(t1 - t2) < 0.05:
                    continue
                val = integrand(g, pair, t1, t2)
                assert np.isfinite(val) and val >= 0.0


def test_integrand_bounded_near_diagonal():
    # Smoothness kills the 1/|D|^2 singularity on the diagonal.
    g = shapes.curved_triangle()
    pair = PairKind.same_edge(0)
    vals = [integrand(g, pair, 0.4, 0.4 + sep)
            for sep in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert max(vals) < 1e-2


# ------------------------------------------------------------- quadrature

def test_quadrature_config_rejects_bad_values():
    with pytest.raises(ValueError):
        QuadratureConfig(base_panels=0)
    with pytest.raises(ValueError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(nodes=(8, 0))


def test_pair_energy_straight_same_edge_exactly_zero():
    g = shapes.straight_wedge(2.0)
    value, err = pair_energy(g, PairKind.same_edge(0))
    assert value == 0.0 and err == 0.0


def test_pair_energy_distant_parallel_segments():
    # Unit segments at separation R: the disjoint term approaches
    # len^2 / R^2 = 1e-4 as R grows.
    pa, pb = np.zeros(3), np.array([1.0, 0.0, 0.0])
    qa, qb = np.array([0.0, 100.0, 0.0]), np.array([1.0, 100.0, 0.0])
    g = graph.EmbeddedGraph(
        {"a1": pa, "a2": pb, "b1": qa, "b2": qb},
        [shapes.straight_edge("ea", "a1", "a2", pa, pb),
         shapes.straight_edge("eb", "b1", "b2", qa, qb)])
    value, _ = pair_energy(g, PairKind.disjoint(0, 1))
    assert abs(value - 1e-4) < 0.02 * 1e-4


def test_pair_energy_matches_midpoint_riemann():
    # Independent brute-force route through the pointwise integrand.
    g = shapes.two_segments(0.5)
    pair = PairKind.disjoint(0, 1)
    value, _ = pair_energy(g, pair)
    n = 120
    mids = (np.arange(n) + 0.5) / n
    brute = math.fsum(integrand(g, pair, t1, t2)
                      for t1 in mids for t2 in mids) / (n * n)
    assert abs(brute - value) < 1e-4 * abs(value)


def test_pair_energy_tolerance_not_met():
    g = shapes.two_segments(1e-4)
    cfg = QuadratureConfig(base_panels=4, depth=0, rel_tol=1e-6)
    with pytest.raises(ToleranceNotMetError) as info:
        pair_energy(g, PairKind.disjoint(0, 1), cfg)
    assert info.value.err > 1e-6 * abs(info.value.value)


# ----------------------------------------------------------------- totals

def test_total_energy_report_structure():
    g = shapes.two_segments(0.5)
    rep = total_energy(g)
    keys = [(r.i, r.j) for r in rep.pairs]
    assert keys == sorted(keys) and len(keys) == 4
    assert rep.total == pytest.approx(math.fsum(r.value for r in rep.pairs),
                                      abs=0.0, rel=1e-15)
    assert rep.total_err >= 0.0
    assert rep.backend == kernels.backend_name()
    assert rep.wall_time > 0.0

    lines = rep.to_csv().splitlines()
    assert lines[0] == "pair_i,pair_j,kind,value,err"
    assert len(lines) == len(rep.pairs) + 2
    assert lines[-1].startswith("total,,,")

    obj = rep.to_json_obj()
    assert sorted(obj) == ["config", "pairs", "total", "total_err"]
    assert obj["config"] == rep.config.to_payload()
    assert len(obj["pairs"]) == 4


def test_total_energy_disjoint_symmetry():
    rep = total_energy(shapes.two_segments(0.5))
    by_key = {(r.i, r.j): r for r in rep.pairs}
    assert by_key[(0, 1)].value == by_key[(1, 0)].value


def test_total_energy_thread_count_invariant():
    g = shapes.two_segments(0.5)
    assert total_energy(g).total == total_energy(g, threads=3).total


def test_total_energy_orientation_invariant():
    # Vertex relabel that flips the canonical orientation of every edge.
    g = shapes.curved_triangle()
    ren = {"a": "zz", "b": "b", "c": "c"}
    flipped = graph.EmbeddedGraph(
        {ren[k]: v for k, v in g.vertices.items()},
        [graph.Edge(e.id, ren[e.u], ren[e.v], e.curve) for e in g.edges])
    assert abs(total_energy(g).total - total_energy(flipped).total) < 1e-9


def test_total_energy_mobius_invariant():
    g = shapes.two_segments(0.5)
    rep = total_energy(g)
    rng = np.random.default_rng(5)
    m = geom.random_mobius_map(rng, g.sample_cloud())
    rep2 = total_energy(graph.transform(g, m, samples=129))
    assert abs(rep.total - rep2.total) < 5e-8


# -------------------------------------------------------------- truncation

def test_truncated_principal_domain_errors():
    g = shapes.straight_wedge(np.pi / 2)
    pair = PairKind.adjacent(0, 1, "o")
    with pytest.raises(EnergyError, match="adjacent"):
        truncated_principal(g, PairKind.same_edge(0), 1e-2)
    with pytest.raises(TruncationDomainError):
        truncated_principal(g, pair, 0.0)
    with pytest.raises(TruncationDomainError, match="eps_max"):
        truncated_principal(g, pair, 1.5)


def test_truncated_principal_monotone_in_eps():
    g = shapes.straight_wedge(np.pi / 2)
    pair = PairKind.adjacent(0, 1, "o")
    vals = [truncated_principal(g, pair, eps) for eps in (1e-1, 1e-2, 1e-3)]
    assert vals[0] < vals[1] < vals[2]


@pytest.mark.parametrize("alpha", [np.pi / 2, 2 * np.pi / 3])
def test_truncated_principal_decade_difference(alpha):
    # One decade of eps adds slope * ln 10, slope from the brute oracle.
    g = shapes.straight_wedge(alpha)
    pair = PairKind.adjacent(0, 1, "o")
    diff = (truncated_principal(g, pair, 1e-4)
            - truncated_principal(g, pair, 1e-3))
    expect = wedge_oracle_slope(alpha) * math.log(10.0)
    assert abs(diff - expect) < 2e-3 * expect


# ------------------------------------------------------------- asymptotics

def test_log_slope_fit_exact_affine():
    eps = np.geomspace(1e-2, 1e-5, 6)
    vals = 2.0 * np.log(1.0 / eps) + 5.0
    slope, intercept, r2 = log_slope_fit(eps, vals)
    assert abs(slope - 2.0) < 1e-12
    assert abs(intercept - 5.0) < 1e-12
    assert r2 == pytest.approx(1.0, abs=1e-15)


def test_log_slope_fit_needs_four_points():
    with pytest.raises(EnergyError, match="4 points"):
        log_slope_fit([1e-2, 1e-3, 1e-4], [1.0, 2.0, 3.0])


@pytest.mark.parametrize("alpha", [np.pi / 2, 2 * np.pi / 3, np.pi])
def test_wedge_oracle_slope_analytic(alpha):
    # (pi - alpha) / sin alpha, continued by its limit 1 at alpha = pi.
    expect = 1.0 if alpha == np.pi else (np.pi - alpha) / np.sin(alpha)
    assert abs(wedge_oracle_slope(alpha) - expect) < 1e-3 * expect


def test_wedge_oracle_slope_domain():
    with pytest.raises(EnergyError):
        wedge_oracle_slope(0.0)
    with pytest.raises(EnergyError):
        wedge_oracle_slope(3.5)
