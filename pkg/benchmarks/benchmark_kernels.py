"""Benchmark of the compiled quadrature kernels against the numpy backend.

Runs the three panel kernels on synthetic smooth-curve panel batches of
growing size, then a full total_energy of a curved triangle under each
backend, and prints a timing table with agreement checks.  Usage:

    python benchmarks/benchmark_kernels.py [--repeat N] [--sizes a,b,c]
"""

import argparse
import math
import time

import numpy as np

from graphenergy import kernels
from graphenergy.energy import QuadratureConfig, total_energy
from graphenergy.graph import Edge, EmbeddedGraph, HermiteCurve

_NODES = (8, 9)


def _curve(t, delta=0.0):
    t = np.asarray(t, dtype=float) + delta
    pos = np.stack([np.cos(2 * np.pi * t), np.sin(2 * np.pi * t),
                    0.3 * np.sin(4 * np.pi * t)], axis=-1)
    der = np.stack([-2 * np.pi * np.sin(2 * np.pi * t),
                    2 * np.pi * np.cos(2 * np.pi * t),
                    1.2 * np.pi * np.cos(4 * np.pi * t)], axis=-1)
    return pos, der


def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _panel_batch(npanels, disjoint_shift):
    """Positions/derivatives/weights for npanels tensor panels."""
    nx, ny = _NODES
    gx, wx = _gauss(nx)
    gy, wy = _gauss(ny)
    lo = np.linspace(0.0, 0.9, npanels)[:, None]
    width = 0.1
    tx = lo + width * gx[None, :]
    ty = lo + width * gy[None, :]
    p1, d1 = _curve(tx)
    p2, d2 = _curve(ty, delta=disjoint_shift)
    wxs = np.broadcast_to(width * wx, (npanels, nx)).copy()
    wys = np.broadcast_to(width * wy, (npanels, ny)).copy()
    return p1, d1, p2, d2, wxs, wys


def _time(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _triangle():
    def arc(eid, u, v, a, b):
        a, b = np.asarray(a, float), np.asarray(b, float)
        chord = b - a
        n = np.array([-chord[1], chord[0], 0.3 * chord[0]])
        n /= np.linalg.norm(n)
        t = np.linspace(0.0, 1.0, 33)
        pts = (1 - t)[:, None] * a + t[:, None] * b \
            + (0.25 * np.sin(np.pi * t))[:, None] * n
        ders = chord[None, :] + (0.25 * np.pi * np.cos(np.pi * t))[:, None] * n
        return Edge(eid, u, v, HermiteCurve(pts, ders))

    V = {"a": [0, 0, 0], "b": [1, 0, 0], "c": [0.4, 0.9, 0.1]}
    return EmbeddedGraph(V, [arc("ab", "a", "b", V["a"], V["b"]),
                             arc("bc", "b", "c", V["b"], V["c"]),
                             arc("ca", "c", "a", V["c"], V["a"])])


def run(sizes, repeat):
    numpy_backend = kernels.get_backend("numpy")
    try:
        compiled = kernels.get_backend("compiled")
    except ImportError:
        print("compiled extension not built; nothing to compare")
        return
    print("%-10s %-9s %10s %10s %8s %12s"
          % ("kernel", "panels", "numpy[ms]", "comp[ms]", "speedup",
             "max |diff|"))
    for name in ("panel_sums_same", "panel_sums_disjoint",
                 "panel_sums_adjacent"):
        for npanels in sizes:
            shift = 0.0 if name == "panel_sums_same" else 0.45
            p1, d1, p2, d2, wx, wy = _panel_batch(npanels, shift)
            extra = ()
            if name == "panel_sums_adjacent":
                v = np.asarray(_curve(0.0)[0], dtype=float)
                extra = (v, math.cos(2.0), math.sin(2.0))
            out_a = np.empty(npanels)
            out_b = np.empty(npanels)
            fn_np = getattr(numpy_backend, name)
            fn_c = getattr(compiled, name)
            t_np = _time(lambda: fn_np(p1, d1, p2, d2, wx, wy, *extra, out_a),
                         repeat)
            t_c = _time(lambda: fn_c(p1, d1, p2, d2, wx, wy, *extra, out_b),
                        repeat)
            diff = float(np.max(np.abs(out_a - out_b)))
            print("%-10s %-9d %10.3f %10.3f %8.2fx %12.3e"
                  % (name.replace("panel_sums_", ""), npanels,
                     1e3 * t_np, 1e3 * t_c, t_np / t_c, diff))

    g = _triangle()
    cfg = QuadratureConfig()
    names = ("panel_sums_same", "panel_sums_disjoint", "panel_sums_adjacent")
    saved = {n: getattr(kernels, n) for n in names}
    results = {}
    try:
        for label, backend in (("numpy", numpy_backend),
                               ("compiled", compiled)):
            for n in names:
                setattr(kernels, n, getattr(backend, n))
            t = _time(lambda: results.setdefault(label, total_energy(g, cfg)),
                      1)
            results[label + "_t"] = t
    finally:
        for n, fn in saved.items():
            setattr(kernels, n, fn)
    rn, rc = results["numpy"], results["compiled"]
    print("\ntotal_energy(triangle): numpy %.3fs, compiled %.3fs "
          "(%.2fx); totals agree to %.3e"
          % (results["numpy_t"], results["compiled_t"],
             results["numpy_t"] / results["compiled_t"],
             abs(rn.total - rc.total)))


def main():
    par = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    par.add_argument("--repeat", type=int, default=5)
    par.add_argument("--sizes", default="256,1024,4096")
    args = par.parse_args()
    run([int(s) for s in args.sizes.split(",")], args.repeat)


if __name__ == "__main__":
    main()
