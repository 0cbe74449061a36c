"""Seeded randomized property sweeps, run by ``specmono selftest``.

Each sweep draws its instances from a ``numpy.random.Generator`` and checks
one property against an independent computation. Counts are small by default
so the whole battery finishes in seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import models, netmat, spectral, treecycle
from .odeint import IntegratorConfig, integrate


@dataclass(frozen=True)
class SweepResult:
    name: str
    trials: int
    failures: int
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0


# ---------------------------------------------------------------------------
# instance generators
# ---------------------------------------------------------------------------


def random_strong_weights(rng: np.random.Generator, n: int, density: float = 0.5,
                          low: float = 0.05, high: float = 1.0) -> np.ndarray:
    """Weights ``w[target, source]`` of a strongly connected digraph.

    A random Hamiltonian cycle guarantees strong connectivity; every other
    arc is present with probability ``density``. Present weights lie in
    ``[low, high)`` with ``low > 0``.
    """
    W = np.where(rng.random((n, n)) < density, rng.uniform(low, high, (n, n)), 0.0)
    perm = rng.permutation(n)
    for k in range(n):
        src, tgt = perm[k], perm[(k + 1) % n]
        W[tgt, src] = rng.uniform(low, high)
    np.fill_diagonal(W, 0.0)
    return W


def random_laplacian_network(rng, n, density=0.5) -> netmat.DispersalNetwork:
    W = random_strong_weights(rng, n, density)
    return netmat.build_network(n, W)


def random_quasi_positive(rng, n, density=0.6) -> np.ndarray:
    A = random_strong_weights(rng, n, density)
    A[np.diag_indices(n)] = rng.uniform(-2.0, 1.0, n)
    return A


def random_stochastic(rng, n) -> np.ndarray:
    W = random_strong_weights(rng, n)
    W[np.diag_indices(n)] = rng.uniform(0.0, 1.0, n)
    return W / W.sum(axis=0)


def nonconstant(rng, n, low=-1.0, high=1.0) -> np.ndarray:
    while True:
        q = rng.uniform(low, high, n)
        if np.ptp(q) > 1e-3 * (high - low):
            return q


def log_uniform(rng, lo, hi, size) -> np.ndarray:
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def sweep_monotonicity(rng, instances=20, points=5, max_n=6) -> SweepResult:
    fails = 0
    for _ in range(instances):
        n = int(rng.integers(2, max_n + 1))
        A = random_quasi_positive(rng, n)
        A = A - spectral.spectral_bound(A) * np.eye(n)
        q = nonconstant(rng, n)
        for mu in log_uniform(rng, 0.01, 100.0, points):
            h = 0.1 * mu
            s = [spectral.spectral_bound(spectral.pencil(A, q, m)) for m in (mu - h, mu, mu + h)]
            if not (s[2] - s[0] < 0 and s[2] - 2 * s[1] + s[0] > 0):
                fails += 1
    return SweepResult("monotonicity", instances * points, fails)


def sweep_karlin(rng, instances=20, max_n=5) -> SweepResult:
    fails = 0
    grid = np.arange(1, 10) / 10
    for _ in range(instances):
        n = int(rng.integers(2, max_n + 1))
        P = random_stochastic(rng, n)
        R = nonconstant(rng, n, 0.5, 3.0)
        vals = [spectral.karlin_map(P, R, mu) for mu in grid]
        if not all(b < a for a, b in zip(vals, vals[1:])):
            fails += 1
    return SweepResult("karlin", instances, fails)


def sweep_matrix_tree(rng, instances=20, max_n=5) -> SweepResult:
    fails = 0
    for _ in range(instances):
        n = int(rng.integers(2, max_n + 1))
        W = random_strong_weights(rng, n, 0.5, 0.05, 2.0)
        L = netmat.laplacian_of(W)
        cof = treecycle.principal_cofactors(L)
        ok = np.allclose(cof.C, cof.tree_sums, rtol=1e-9, atol=0)
        null = spectral.principal_eigen(-L).right
        if not (ok and np.max(np.abs(cof.alpha - null)) <= 1e-10):
            fails += 1
    return SweepResult("matrix_tree", instances, fails)


def sweep_tree_cycle(rng, instances=20, max_n=4) -> SweepResult:
    fails = 0
    for _ in range(instances):
        n = int(rng.integers(2, max_n + 1))
        W = random_strong_weights(rng, n, 0.5, 0.05, 2.0)
        F = rng.normal(size=(n, n))
        chk = treecycle.tree_cycle_residual(W, F)
        if chk.residual > 1e-9 * (1 + abs(chk.lhs)) or not treecycle.bijection_holds(W):
            fails += 1
    return SweepResult("tree_cycle", instances, fails)


def sweep_k_vector(rng, instances=50, max_n=8) -> SweepResult:
    fails = 0
    for _ in range(instances):
        n = int(rng.integers(1, max_n + 1))
        u = rng.uniform(0.1, 10.0, n)
        kv = treecycle.construct_k_vector(u, *log_uniform(rng, 0.01, 100.0, 2))
        fails += not treecycle.verify_k_vector(kv)
    return SweepResult("k_vector", instances, fails)


def sweep_collatz_wielandt(rng, instances=20, max_n=6) -> SweepResult:
    fails = 0
    for _ in range(instances):
        n = int(rng.integers(2, max_n + 1))
        A = random_quasi_positive(rng, n)
        e = spectral.principal_eigen(A)
        u = rng.uniform(0.1, 1.0, n)
        if spectral.collatz_wielandt(A, u) < e.value - 1e-9 or \
                abs(spectral.collatz_wielandt(A, e.right) - e.value) > 1e-9:
            fails += 1
    return SweepResult("collatz_wielandt", instances, fails)


def sweep_r0_sign(rng, instances=20, max_n=4) -> SweepResult:
    fails = 0
    for _ in range(instances):
        n = int(rng.integers(2, max_n + 1))
        G = random_laplacian_network(rng, n)
        beta, gamma = rng.uniform(0.1, 3.0, n), rng.uniform(0.1, 3.0, n)
        mu_I = float(log_uniform(rng, 0.01, 100.0, 1)[0])
        spec = models.SIS(G, beta, gamma, 1.0, mu_I, 1.0)
        r0 = models.sis_r0(spec, mu_I).r0
        s = spectral.spectral_bound(spectral.pencil(G.a, beta - gamma, mu_I))
        sign_r = 0 if abs(r0 - 1) < 1e-9 else int(np.sign(r0 - 1))
        sign_s = 0 if abs(s) < 1e-9 else int(np.sign(s))
        fails += sign_r != sign_s
    return SweepResult("r0_sign", instances, fails)


def sweep_sis_mass(rng, instances=5, n=3) -> SweepResult:
    fails = 0
    for _ in range(instances):
        G = random_laplacian_network(rng, n)
        N = float(rng.uniform(10, 1000))
        spec = models.SIS(G, rng.uniform(0.5, 3.0, n), rng.uniform(0.1, 1.0, n),
                          float(rng.uniform(0.1, 2)), float(rng.uniform(0.1, 2)), N)
        y0 = rng.dirichlet(np.ones(2 * n)) * N
        tr = integrate(models.system(spec), y0, (0.0, 100.0), IntegratorConfig())
        drift = np.max(np.abs(tr.states.sum(axis=1) - N))
        fails += not drift < 1e-6 * N
    return SweepResult("sis_mass", instances, fails)


SWEEPS: dict[str, Callable[..., SweepResult]] = {
    "monotonicity": sweep_monotonicity,
    "karlin": sweep_karlin,
    "matrix_tree": sweep_matrix_tree,
    "tree_cycle": sweep_tree_cycle,
    "k_vector": sweep_k_vector,
    "collatz_wielandt": sweep_collatz_wielandt,
    "r0_sign": sweep_r0_sign,
    "sis_mass": sweep_sis_mass,
}


def run_all(seed: int) -> list[SweepResult]:
    """Every sweep, each from its own child stream of ``seed``."""
    streams = np.random.SeedSequence(seed).spawn(len(SWEEPS))
    return [fn(np.random.default_rng(ss)) for fn, ss in zip(SWEEPS.values(), streams)]
