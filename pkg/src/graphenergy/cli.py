"""Batch command-line surface for the graph energy toolkit.

Subcommands
-----------
energy       graph JSON -> ordered pair table and total energy (CSV + JSON)
toric        (p,q;m,n) spec -> graph JSON and/or energy report
invariance   seeded random Mobius maps -> relative deviation table
critical     multi-start local search of the vertex intensity, clustered
asymptotics  truncated principal term of an adjacent pair, affine log fit
export       ASCII PLY/OBJ polyline export

Exit codes: 0 success; 2 parse and spec errors (bad flags, malformed or
missing files, invalid toric specs, unusable argument combinations);
3 validation errors (the graph fails the embedding checks, or geometric
construction fails); 4 tolerance errors (quadrature missed its target).

Reports print every float with 17 significant digits and are written in a
fixed order, so identical run configurations produce byte-identical files;
the seed fully determines all random choices.  Human diagnostics go to
stderr; with --quiet, stdout carries only the machine-readable report.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from .energy import (PairKind, QuadratureConfig, ToleranceNotMetError,
                     TruncationDomainError, log_slope_fit, total_energy,
                     truncated_principal, wedge_oracle_slope)
from .geom import GeometryError, random_mobius_map
from .graph import (GraphError, GraphSchemaError, export_obj, export_ply,
                    load_graph, save_graph, transform, validate,
                    vertex_angles)
from .intensity import BarrierHitError, IntensityError, local_search, psi
from .toric import (LatticeDegeneracyError, ToricError, ToricSpecError,
                    build_toric_graph, parse_spec)

__all__ = ["RunConfig", "UsageError", "main"]

# Cluster width for grouping local-search endpoints by Phi value.
_CLUSTER_TOL = 1e-4
_DEFAULT_EPS_LADDER = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)


class UsageError(ValueError):
    """Semantically unusable arguments (mapped to exit code 2)."""


class RunConfig:
    """Resolved configuration of one CLI run.

    The seed fully determines every random choice, and two runs with equal
    configurations write byte-identical reports (wall-clock and backend
    metadata are never serialized).
    """

    def __init__(self, subcommand, inputs, out_dir, quad, seed, threads,
                 quiet):
        self.subcommand = subcommand
        self.inputs = list(inputs)
        self.out_dir = out_dir
        self.quad = quad
        self.seed = int(seed)
        self.threads = int(threads)
        self.quiet = bool(quiet)

    @classmethod
    def from_args(cls, args):
        defaults = QuadratureConfig()
        quad = QuadratureConfig(
            base_panels=(args.quad_panels if args.quad_panels is not None
                         else defaults.base_panels),
            depth=(args.quad_depth if args.quad_depth is not None
                   else defaults.depth),
            rel_tol=args.tol if args.tol is not None else defaults.rel_tol,
        )
        inputs = [getattr(args, "graph")] if hasattr(args, "graph") else []
        return cls(args.subcommand, inputs, args.out, quad, args.seed,
                   args.threads, args.quiet)

    def to_payload(self):
        return {
            "subcommand": self.subcommand,
            "inputs": self.inputs,
            "quad": self.quad.to_payload(),
            "seed": self.seed,
            "threads": self.threads,
        }


def _json_scalar(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return "%d" % x
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    if isinstance(x, str):
        return json.dumps(x)
    if x is None:
        return "null"
    raise TypeError("unserializable value %r" % (x,))


def _dumps(obj, indent=0):
    """Deterministic JSON with %.17g floats (lossless double round trip)."""
    pad, kid = " " * indent, " " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ["%s%s: %s" % (kid, json.dumps(str(k)), _dumps(obj[k], indent + 1))
                 for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not len(obj):
            return "[]"
        items = ["%s%s" % (kid, _dumps(v, indent + 1)) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _json_scalar(obj)


def _say(cfg, text):
    if not cfg.quiet:
        sys.stdout.write(text + "\n")


def _warn(text):
    sys.stderr.write(text + "\n")


def _emit(cfg, name, data):
    """Write a report file under --out; returns the path."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, name)
    if isinstance(data, str):
        data = data.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(data)
    return path


def _finish(cfg, obj, summary):
    """Standard ending: summary for humans, JSON on stdout when --quiet."""
    if cfg.quiet:
        sys.stdout.write(_dumps(obj) + "\n")
    else:
        _say(cfg, summary)
    return 0


def _load_graph_file(path):
    try:
        with open(path, "rb") as fh:
            return load_graph(fh.read())
    except OSError as exc:
        raise UsageError("cannot read %s: %s" % (path, exc))


def _require_valid(g):
    report = validate(g)
    if not report.ok:
        raise GraphError("graph failed validation: %r" % report)
    return g


def _stem(path):
    return os.path.splitext(os.path.basename(path))[0]


def cmd_energy(cfg, args):
    g = _require_valid(_load_graph_file(args.graph))
    rep = total_energy(g, cfg.quad, threads=cfg.threads)
    stem = _stem(args.graph)
    obj = {"run": cfg.to_payload(), "report": rep.to_json_obj()}
    _emit(cfg, stem + "_energy.csv", rep.to_csv())
    _emit(cfg, stem + "_energy.json", _dumps(obj) + "\n")
    return _finish(cfg, obj, "total %.17g +- %.17g (%d pairs)"
                   % (rep.total, rep.total_err, len(rep.pairs)))


def cmd_toric(cfg, args):
    s = parse_spec(args.spec)
    g = build_toric_graph(s)
    name = "toric_%d_%d_%d_%d" % s.as_tuple()
    emit_graph = args.emit_graph or not args.energy
    summary = ["spec (%d,%d;%d,%d): %d vertices, %d edges"
               % (s.as_tuple() + (len(g.vertices), len(g.edges)))]
    obj = {"run": cfg.to_payload(), "spec": list(s.as_tuple()),
           "vertices": len(g.vertices), "edges": len(g.edges)}
    if emit_graph:
        _emit(cfg, name + ".json", save_graph(g))
    if args.energy:
        rep = total_energy(g, cfg.quad, threads=cfg.threads)
        obj["report"] = rep.to_json_obj()
        _emit(cfg, name + "_energy.csv", rep.to_csv())
        summary.append("total %.17g +- %.17g" % (rep.total, rep.total_err))
    _emit(cfg, name + "_report.json", _dumps(obj) + "\n")
    return _finish(cfg, obj, "; ".join(summary))


def cmd_invariance(cfg, args):
    g = _require_valid(_load_graph_file(args.graph))
    rep0 = total_energy(g, cfg.quad, threads=cfg.threads)
    rows = [{"map": 0, "kind": "identity", "skipped": False,
             "total": rep0.total, "rel_dev": 0.0}]
    rng = np.random.default_rng(cfg.seed)
    cloud = g.sample_cloud()
    for k in range(1, args.count + 1):
        try:
            m = random_mobius_map(rng, cloud)
            g2 = transform(g, m)
        except (GeometryError, GraphError) as exc:
            _warn("map %d skipped: %s" % (k, exc))
            rows.append({"map": k, "kind": "mobius", "skipped": True,
                         "total": 0.0, "rel_dev": 0.0})
            continue
        rep2 = total_energy(g2, cfg.quad, threads=cfg.threads)
        rows.append({"map": k, "kind": "mobius", "skipped": False,
                     "total": rep2.total,
                     "rel_dev": abs(rep2.total - rep0.total) / abs(rep0.total)})
    max_dev = max(r["rel_dev"] for r in rows if not r["skipped"])
    lines = ["map,kind,skipped,total,rel_dev"]
    for r in rows:
        lines.append("%d,%s,%d,%.17g,%.17g" % (r["map"], r["kind"],
                                               r["skipped"], r["total"],
                                               r["rel_dev"]))
    stem = _stem(args.graph)
    obj = {"run": cfg.to_payload(), "rows": rows, "max_rel_dev": max_dev,
           "base_total": rep0.total}
    _emit(cfg, stem + "_invariance.csv", "\n".join(lines) + "\n")
    _emit(cfg, stem + "_invariance.json", _dumps(obj) + "\n")
    return _finish(cfg, obj, "max relative deviation %.17g over %d maps"
                   % (max_dev, args.count))


def _cluster_by_phi(rows):
    """Group converged rows into clusters of width _CLUSTER_TOL in Phi."""
    done = sorted((r for r in rows if r["status"] == "converged"),
                  key=lambda r: r["phi"])
    clusters = []
    for r in done:
        if clusters and r["phi"] - clusters[-1]["members"][-1]["phi"] <= _CLUSTER_TOL:
            clusters[-1]["members"].append(r)
        else:
            clusters.append({"members": [r]})
    out = []
    for c in clusters:
        phis = [r["phi"] for r in c["members"]]
        out.append({
            "phi_mean": math.fsum(phis) / len(phis),
            "count": len(phis),
            "classification": c["members"][0]["classification"],
            "zero_modes": c["members"][0]["zero_modes"],
            "representative_seed": c["members"][0]["seed"],
        })
    return out


def cmd_critical(cfg, args):
    if args.k < 2:
        raise UsageError("k must be >= 2, got %d" % args.k)
    rows = []
    reports = {}
    for i in range(args.starts):
        seed = cfg.seed + i
        try:
            config, report = local_search(args.k, seed=seed, floor=args.floor)
        except BarrierHitError as exc:
            rows.append({"seed": seed, "status": "barrier", "phi": 0.0,
                         "grad_norm": 0.0, "zero_modes": 0,
                         "classification": str(exc)})
            continue
        rows.append({"seed": seed, "status": "converged",
                     "phi": report.phi_value, "grad_norm": report.grad_norm,
                     "zero_modes": report.zero_modes,
                     "classification": report.classification})
        reports[seed] = {"report": report.to_json_obj(),
                         "vectors": [[float(x) for x in v]
                                     for v in config.vectors]}
    clusters = _cluster_by_phi(rows)
    lines = ["seed,status,phi,grad_norm,zero_modes,classification"]
    for r in rows:
        lines.append("%d,%s,%.17g,%.17g,%d,%s"
                     % (r["seed"], r["status"], r["phi"], r["grad_norm"],
                        r["zero_modes"], r["classification"]))
    name = "critical_k%d" % args.k
    obj = {"run": cfg.to_payload(), "k": args.k, "rows": rows,
           "clusters": clusters,
           "reports": {str(k): v for k, v in sorted(reports.items())}}
    _emit(cfg, name + ".csv", "\n".join(lines) + "\n")
    _emit(cfg, name + ".json", _dumps(obj) + "\n")
    summary = "; ".join("phi %.6f x%d (%s)" % (c["phi_mean"], c["count"],
                                               c["classification"])
                        for c in clusters) or "no converged starts"
    return _finish(cfg, obj, summary)


def cmd_asymptotics(cfg, args):
    g = _require_valid(_load_graph_file(args.graph))
    try:
        ladder = [float(s) for s in args.eps.split(",") if s.strip()]
    except ValueError:
        raise UsageError("--eps must be comma-separated floats, got %r"
                         % args.eps)
    if len(ladder) < 4:
        raise UsageError("need at least 4 epsilon values, got %d" % len(ladder))
    eids = [s.strip() for s in args.pair.split(",")]
    if len(eids) != 2:
        raise UsageError("--pair must name two edge ids")
    try:
        i, j = g.edge_index(eids[0]), g.edge_index(eids[1])
    except GraphError as exc:
        raise UsageError(str(exc))
    shared = g.shared_vertex(i, j)
    if shared is None or shared != args.vertex:
        raise UsageError("edges %s,%s are not adjacent at vertex %s"
                         % (eids[0], eids[1], args.vertex))
    pair = PairKind.adjacent(i, j, args.vertex)
    try:
        values = [truncated_principal(g, pair, eps) for eps in ladder]
    except TruncationDomainError as exc:
        raise UsageError(str(exc))
    slope, intercept, r2 = log_slope_fit(ladder, values)
    alpha = vertex_angles(g).angle(args.vertex, eids[0], eids[1])
    psi_alpha = psi(alpha)
    oracle = wedge_oracle_slope(alpha, ladder=ladder)
    lines = ["eps,value"]
    for eps, val in zip(ladder, values):
        lines.append("%.17g,%.17g" % (eps, val))
    stem = _stem(args.graph)
    obj = {"run": cfg.to_payload(), "vertex": args.vertex, "pair": eids,
           "alpha": alpha, "eps": ladder, "values": values,
           "slope": slope, "intercept": intercept, "r_squared": r2,
           "psi_alpha": psi_alpha,
           # (pi - alpha)/sin(alpha), via the identity 1 - psi(alpha).
           "complement_alpha": 1.0 - psi_alpha,
           "oracle_slope": oracle,
           "slope_over_oracle": slope / oracle}
    _emit(cfg, stem + "_asymptotics.csv", "\n".join(lines) + "\n")
    _emit(cfg, stem + "_asymptotics.json", _dumps(obj) + "\n")
    return _finish(cfg, obj,
                   "slope %.17g (oracle %.17g, ratio %.6f), R^2 %.8f"
                   % (slope, oracle, slope / oracle, r2))


def cmd_export(cfg, args):
    g = _require_valid(_load_graph_file(args.graph))
    stem = _stem(args.graph)
    paths = []
    if args.format in ("ply", "both"):
        paths.append(_emit(cfg, stem + ".ply",
                           export_ply(g, args.samples_per_edge)))
    if args.format in ("obj", "both"):
        paths.append(_emit(cfg, stem + ".obj",
                           export_obj(g, args.samples_per_edge)))
    obj = {"run": cfg.to_payload(), "files": [os.path.basename(p)
                                              for p in paths]}
    return _finish(cfg, obj, "wrote " + ", ".join(paths))


def _add_common(sub):
    sub.add_argument("--quad-panels", type=int, default=None,
                     help="base quadrature panels per axis")
    sub.add_argument("--quad-depth", type=int, default=None,
                     help="dyadic refinement depth")
    sub.add_argument("--tol", type=float, default=None,
                     help="target relative tolerance")
    sub.add_argument("--seed", type=int, default=0, help="random seed")
    sub.add_argument("--threads", type=int, default=1, help="worker threads")
    sub.add_argument("--quiet", action="store_true",
                     help="machine-readable stdout only")
    sub.add_argument("--out", default=".", help="output directory")


def build_parser():
    par = argparse.ArgumentParser(prog="graphenergy",
                                  description=__doc__.splitlines()[0])
    subs = par.add_subparsers(dest="subcommand", required=True)

    sub = subs.add_parser("energy", help="energy of a graph JSON file")
    sub.add_argument("graph", help="graph JSON path")
    _add_common(sub)
    sub.set_defaults(func=cmd_energy)

    sub = subs.add_parser("toric", help="build a toric graph, optionally "
                                        "with its energy")
    sub.add_argument("--spec", required=True, help="spec string 'p,q,m,n'")
    sub.add_argument("--emit-graph", action="store_true",
                     help="write the graph JSON (default when --energy "
                          "is absent)")
    sub.add_argument("--energy", action="store_true",
                     help="compute the total energy")
    _add_common(sub)
    sub.set_defaults(func=cmd_toric)

    sub = subs.add_parser("invariance", help="random Mobius map deviations")
    sub.add_argument("graph", help="graph JSON path")
    sub.add_argument("--count", type=int, default=5,
                     help="number of random maps (0: identity only)")
    _add_common(sub)
    sub.set_defaults(func=cmd_invariance)

    sub = subs.add_parser("critical", help="multi-start intensity search")
    sub.add_argument("--k", type=int, required=True, help="vertex degree")
    sub.add_argument("--starts", type=int, default=20,
                     help="number of seeded starts")
    sub.add_argument("--floor", type=float, default=1e-6,
                     help="angle barrier floor")
    _add_common(sub)
    sub.set_defaults(func=cmd_critical)

    sub = subs.add_parser("asymptotics", help="truncated principal term fit")
    sub.add_argument("graph", help="graph JSON path")
    sub.add_argument("--vertex", required=True, help="shared vertex id")
    sub.add_argument("--pair", required=True, help="edge ids 'ei,ej'")
    sub.add_argument("--eps",
                     default=",".join("%g" % e for e in _DEFAULT_EPS_LADDER),
                     help="comma-separated epsilon ladder (>= 4 values)")
    _add_common(sub)
    sub.set_defaults(func=cmd_asymptotics)

    sub = subs.add_parser("export", help="PLY/OBJ polyline export")
    sub.add_argument("graph", help="graph JSON path")
    sub.add_argument("--format", choices=("ply", "obj", "both"),
                     default="both")
    sub.add_argument("--samples-per-edge", type=int, default=32)
    _add_common(sub)
    sub.set_defaults(func=cmd_export)
    return par


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = RunConfig.from_args(args)
    try:
        return args.func(cfg, args)
    except ToleranceNotMetError as exc:
        _warn("tolerance not met: %s" % exc)
        return 4
    except (UsageError, GraphSchemaError, ToricSpecError,
            LatticeDegeneracyError) as exc:
        _warn("error: %s" % exc)
        return 2
    except (ToricError, GraphError, GeometryError, IntensityError) as exc:
        _warn("validation error: %s" % exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
