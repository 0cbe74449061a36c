"""The acceptance criteria, one test each, at their stated tolerances.

Every test records a PASS/FAIL line that is printed in the terminal summary
(and immediately with ``-s``).
"""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from specmono import models, netmat, spectral, sweeps, treecycle
from specmono.odeint import IntegratorConfig, integrate

from conftest import ACCEPTANCE, FIXTURES

A2 = np.array([[-0.5, 1.0], [0.5, -1.0]])
Q2 = np.array([1.0, 2.0])
SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])
SYM = SWAP - np.eye(2)


def closed_form(mu):
    return (6 - 3 * mu + math.sqrt(9 * mu * mu - 4 * mu + 4)) / 4


def record(k, ok, detail=""):
    ACCEPTANCE[k] = (bool(ok), detail)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'} {detail}", flush=True)
    assert ok, detail


def s_of(A, q, mu):
    return spectral.spectral_bound(spectral.pencil(A, q, mu))


def test_criterion_01_closed_form():
    t0 = time.perf_counter()
    err = max(abs(s_of(A2, Q2, mu) - closed_form(mu)) for mu in (0.1, 0.5, 1, 2, 5, 10))
    s1 = s_of(A2, Q2, 1.0)
    ds, _ = spectral.bound_derivative(A2, Q2, 1.0)
    dt = time.perf_counter() - t0
    ok = err <= 1e-9 and abs(s1 - 1.5) <= 1e-6 and abs(ds + 1 / 6) <= 1e-6 and dt < 1.0
    record(1, ok, f"max err {err:.2e}, s(1)={s1!r}, s'(1)={ds!r}, {dt:.3f}s")


def test_criterion_02_limits():
    lim = spectral.asymptotic_limits(A2, Q2)
    far = s_of(A2, Q2, 1e6)
    ok = (abs(lim.at_zero - 2) <= 1e-12 and abs(lim.at_infinity - 4 / 3) <= 1e-12
          and abs(far - 4 / 3) <= 1e-5)
    record(2, ok, f"limits ({lim.at_zero!r}, {lim.at_infinity!r}), s(1e6)={far!r}")


def test_criterion_03_third_derivative_sign_change():
    h = 0.05
    mus = np.arange(1, 101) * h  # (0, 5]
    s = np.array([s_of(A2, Q2, mu) for mu in mus])
    d3 = np.diff(s, 3) / h**3
    exact = np.diff([closed_form(mu) for mu in mus], 3) / h**3
    noise = 8 * 1e-12 / h**3
    clear = d3[np.abs(d3) > 10 * noise]
    ok = clear.size > 0 and clear.min() < 0 < clear.max() and np.allclose(d3, exact, atol=1e-4)
    flips = int(np.sum(np.diff(np.sign(clear)) != 0))
    record(3, ok, f"third difference range [{d3.min():.3g}, {d3.max():.3g}], {flips} sign change(s)")


def test_criterion_04_monotone_convex():
    t0 = time.perf_counter()
    res = sweeps.sweep_monotonicity(np.random.default_rng(4), instances=500, points=20, max_n=8)
    rng = np.random.default_rng(40)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 9))
        A = sweeps.random_quasi_positive(rng, n)
        A = A - spectral.spectral_bound(A) * np.eye(n)
        c = float(rng.uniform(-1, 1))
        for mu in sweeps.log_uniform(rng, 0.01, 100.0, 20):
            worst = max(worst, abs(spectral.bound_derivative(A, np.full(n, c), mu)[0]))
    dt = time.perf_counter() - t0
    ok = res.passed and worst < 1e-9 and dt < 60
    record(4, ok, f"{res.failures}/{res.trials} failures, constant-Q |slope| <= {worst:.1e}, "
                  f"{dt:.1f}s")


def test_criterion_05_karlin():
    res = sweeps.sweep_karlin(np.random.default_rng(5), instances=100, max_n=6)
    rng = np.random.default_rng(50)
    spread = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 7))
        P = sweeps.random_stochastic(rng, n)
        c = float(rng.uniform(0.5, 3))
        vals = [spectral.karlin_map(P, np.full(n, c), mu) for mu in np.arange(1, 10) / 10]
        spread = max(spread, max(vals) - min(vals))
    ok = res.passed and spread <= 1e-12
    record(5, ok, f"{res.failures}/{res.trials} failures, R=cI spread {spread:.1e}")


def test_criterion_06_matrix_tree():
    res = sweeps.sweep_matrix_tree(np.random.default_rng(6), instances=200, max_n=6)
    record(6, res.passed, f"{res.failures}/{res.trials} failures")


def test_criterion_07_tree_cycle():
    res = sweeps.sweep_tree_cycle(np.random.default_rng(7), instances=100, max_n=5)
    hand = treecycle.tree_cycle_residual(np.array([[0, 2.0], [3.0, 0]]),
                                         np.array([[0, 5.0], [7.0, 0]]))
    ok = res.passed and hand.lhs == hand.rhs == 72.0
    record(7, ok, f"{res.failures}/{res.trials} failures, hand case {hand.lhs!r} = {hand.rhs!r}")


def test_criterion_08_k_vector():
    res = sweeps.sweep_k_vector(np.random.default_rng(8), instances=500, max_n=10)
    kv = treecycle.construct_k_vector([1.0, 2.0], 1.0, 1.0)
    ratio = float(kv.k[1] / kv.k[0])
    ok = res.passed and 2 / 3 < ratio < 3 / 4 and treecycle.verify_k_vector(kv)
    record(8, ok, f"{res.failures}/{res.trials} failures, hand ratio {ratio!r}")


def test_criterion_09_threshold():
    q = np.array([1.0, -2.0])
    mu_star = spectral.threshold_mu(SYM, q)
    spec = models.SingleSpecies(netmat.build_network(2, SWAP), 1.0, "linear", p=q)
    rep = models.classify_regime(spec)
    ok = abs(mu_star - 2) <= 1e-8 and rep.verdict is models.Verdict.THRESHOLD_AT \
        and abs(rep.mu_star - 2) <= 1e-8
    record(9, ok, f"mu* = {mu_star!r}, regime {rep.describe()}")


def sis_2x2():
    return models.SIS(netmat.build_network(2, SWAP), [4.0, 1.0], [1.0, 1.0], 1.0, 1.0, 100.0)


def test_criterion_10_sis_r0():
    spec = sis_2x2()
    reps = models.r0_sweep(spec, [0.1, 1.0, 10.0, 100.0])
    r1 = reps[1].r0
    decreasing = all(b.r0 < a.r0 for a, b in zip(reps, reps[1:]))
    limits_ok = abs(reps[0].limit_zero - 4) <= 1e-12 and abs(reps[0].limit_infinity - 2.5) <= 1e-12
    sign = sweeps.sweep_r0_sign(np.random.default_rng(10), instances=100)
    ok = abs(r1 - (10 + math.sqrt(52)) / 6) <= 1e-9 and decreasing and limits_ok and sign.passed
    record(10, ok, f"r0(1) = {r1!r}, decreasing {decreasing}, limits "
                   f"({reps[0].limit_zero!r}, {reps[0].limit_infinity!r}), "
                   f"sign mismatches {sign.failures}/{sign.trials}")


def _competition_spec(rng):
    n = int(rng.integers(2, 4))
    G = sweeps.random_laplacian_network(rng, n, density=0.7)
    alpha = spectral.principal_eigen(G.a).right
    while True:
        p = rng.uniform(-0.5, 2.0, n)
        # exclusion slows without bound as p approaches span(alpha); keep clear of it
        off = p - (p @ alpha) / (alpha @ alpha) * alpha
        if p @ alpha > 0.05 and np.abs(off).max() >= 0.3 * np.abs(p).max():
            break
    mu_u = float(sweeps.log_uniform(rng, 0.1, 2.0, 1)[0])
    return models.Competition(G, p, mu_u, mu_u * float(rng.uniform(2.0, 4.0)))


def test_criterion_11_competition():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    worst_v = worst_u = 0.0
    for _ in range(20):
        spec = _competition_spec(rng)
        for _ in range(5):
            y0 = rng.uniform(0.1, 2.0, 2 * spec.n)
            rep = models.competition_outcome(spec, 1e4, tol=1e-8, y0=y0)
            worst_v, worst_u = max(worst_v, rep.v_norm), max(worst_u, rep.u_distance)
    dt = time.perf_counter() - t0
    ok = worst_v < 1e-5 and worst_u < 1e-4 and dt < 120
    record(11, ok, f"max |v| {worst_v:.1e}, max |u-u*| {worst_u:.1e} over 100 runs, {dt:.1f}s "
                   "(finite-sample check, not a stability proof)")


def _predprey(mu_v):
    G = netmat.build_network(2, SWAP)
    return models.PredatorPrey(G, G, [1.0, 1.0], [1.0, 1.0], [2.0, 1.0], [1.0, 3.0], 1.0, mu_v)


def test_criterion_12_predprey():
    rep = models.predprey_threshold(_predprey(3.0))
    dist = {}
    for mu_v in (3.0, 1.0):
        spec = _predprey(mu_v)
        E1 = models.prey_only_state(spec)
        y0 = E1 + np.array([0.0, 0.0, 1e-3, 1e-3])
        tr = integrate(models.system(spec), y0, (0.0, 400.0))
        gap = np.max(np.abs(tr.states - E1), axis=1)
        dist[mu_v] = (float(gap[-1]), float(gap.max()))
    ok = (rep.verdict is models.PredPreyVerdict.THRESHOLD_AT and abs(rep.mu_v_star - 2) <= 1e-8
          and dist[3.0][0] < 1e-6 and dist[1.0][1] > 0.1)
    record(12, ok, f"mu_v* = {rep.mu_v_star!r}, |y-E1| at mu_v=3 ends {dist[3.0][0]:.1e}, "
                   f"at mu_v=1 peaks {dist[1.0][1]:.3g}")


def test_criterion_13_sis_mass():
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(20):
        G = sweeps.random_laplacian_network(rng, 3)
        N = float(rng.uniform(10, 1000))
        spec = models.SIS(G, rng.uniform(0.5, 3.0, 3), rng.uniform(0.1, 1.0, 3),
                          float(rng.uniform(0.1, 2)), float(rng.uniform(0.1, 2)), N)
        y0 = rng.dirichlet(np.ones(6)) * N
        tr = integrate(models.system(spec), y0, (0.0, 100.0), IntegratorConfig())
        worst = max(worst, float(np.max(np.abs(tr.states.sum(axis=1) - N))) / N)
    record(13, worst < 1e-6, f"max relative drift {worst:.1e}")


def test_criterion_14_cli_determinism():
    with open(os.path.join(FIXTURES, "golden.json"), encoding="utf-8") as fh:
        golden = json.load(fh)
    differ = []
    for case in golden:
        argv = [os.path.join(FIXTURES, a) if a.endswith(".json") else a for a in case["argv"]]
        runs = [subprocess.run([sys.executable, "-m", "specmono.cli", *argv],
                               capture_output=True, check=True).stdout for _ in range(2)]
        if runs[0] != runs[1]:
            differ.append(case["name"])
    record(14, not differ, f"{len(golden)} fixtures, differing: {differ or 'none'}")
