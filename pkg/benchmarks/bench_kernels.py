"""Time each hot kernel through its numba and pure-numpy paths.

    python benchmarks/bench_kernels.py [--repeat 5]

Both variants are built in one process regardless of SPECMONO_DISABLE_NUMBA,
so the table compares like with like. The first numba call (compile or cache
load) is excluded; results of the two paths are checked against each other.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from specmono import kernels, models, netmat, treecycle
from specmono._accel import HAVE_NUMBA


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases(rng: np.random.Generator):
    n = 8
    M = rng.random((n, n))
    np.fill_diagonal(M, 0.0)
    M -= np.diag(M.sum(axis=0))
    S = np.ascontiguousarray(M + (1.0 + np.abs(np.diag(M)).max()) * np.eye(n))
    x0 = np.full(n, 1.0 / n)
    yield "power_iterate n=8", lambda ns: ns.power_iterate(S, x0, 8000, 1e-12)

    W = rng.random((7, 7))
    np.fill_diagonal(W, 0.0)
    choice, ncho = treecycle._choices(W)
    yield "unicyclic n=7 (complete)", \
        lambda ns: ns.functional_subgraphs(W, choice, ncho, np.int64(-1), False)

    G = netmat.build_network(3, rng.random((3, 3)) * (1 - np.eye(3)))
    spec = models.SIS(G, [2.0, 1.0, 0.5], [1.0, 0.8, 1.2], 0.5, 1.5, 100.0)
    args = models.system(spec).args
    y0 = np.array([30.0, 30.0, 30.0, 5.0, 3.0, 2.0])
    yield "dopri SIS n=3 t=200", lambda ns: ns.dopri_packed(
        args, 0.0, y0, 200.0, 1e-8, 1e-10, 0.0, 1_000_000, True, 0.0, False)


def _same(a, b) -> bool:
    a, b = a[0], b[0]
    return bool(np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float),
                            rtol=1e-9, atol=1e-12))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    opts = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1
    rng = np.random.default_rng(20240601)
    print(f"{'kernel':<28}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}  agree")
    for name, run in cases(rng):
        ref = run(kernels.NUMPY)
        fast = run(kernels.NUMBA)  # compile or load from cache
        t_np = _best(lambda: run(kernels.NUMPY), opts.repeat)
        t_nb = _best(lambda: run(kernels.NUMBA), opts.repeat)
        print(f"{name:<28}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>10.1f}  "
              f"{'yes' if _same(ref, fast) else 'NO'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
