import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specmono import models, netmat, spectral, sweeps
from specmono.errors import DegenerateCaseError, DomainError, StructureError, ValidationError
from specmono.models import (SIS, Competition, PredatorPrey, SingleSpecies, Verdict,
                             classify_regime, competition_outcome, disease_free_equilibrium,
                             model_jacobian, model_rhs, predprey_threshold, r0_sweep,
                             single_equilibrium, sis_r0)
from specmono.odeint import IntegratorConfig, integrate

SYM = netmat.build_network(2, [[0, 1], [1, 0]])


def reference_rhs(spec, y):
    """Direct transcription of the model equations, with explicit flow sums."""
    def flow(a, x):
        n = len(x)
        return np.array([sum(a[i, j] * x[j] - a[j, i] * x[i] for j in range(n) if j != i)
                         for i in range(n)])

    if isinstance(spec, SingleSpecies):
        a = spec.network.a
        f = np.where(spec.logistic_mask, spec.r * (1 - y / spec.K), spec.p - y)
        return y * f + spec.mu * flow(a, y) - spec.mu * spec.eps * y
    n = spec.n
    u, v = y[:n], y[n:]
    if isinstance(spec, PredatorPrey):
        g, _ = spec.response_value(u)
        du = spec.r * u * (1 - u / spec.K) - g * v + spec.mu_u * flow(spec.prey.a, u)
        dv = spec.c * g * v - spec.d * v + spec.mu_v * flow(spec.predator.a, v)
    elif isinstance(spec, Competition):
        du = u * (spec.p - u - v) + spec.mu_u * flow(spec.network.a, u)
        dv = v * (spec.p - u - v) + spec.mu_v * flow(spec.network.a, v)
    else:
        inc = spec.beta * u * v / (u + v)
        du = -inc + spec.gamma * v + spec.mu_S * flow(spec.network.a, u)
        dv = inc - spec.gamma * v + spec.mu_I * flow(spec.network.a, v)
    return np.concatenate([du, dv])


def some_specs():
    rng = np.random.default_rng(0)
    G = netmat.build_network(3, sweeps.random_strong_weights(rng, 3, 1.0))
    return [
        SingleSpecies(G, 0.7, ("logistic", "linear", "logistic"), r=[1, 2, 3], K=[1, 2, 3],
                      p=[0.5, 0.5, 0.5], eps=[0.1, 0, 0.2]),
        PredatorPrey(G, G, [1, 2, 3], [1, 2, 3], [1, 1, 1], [0.2, 0.3, 0.4], 0.3, 0.6,
                     ("lotka", "monod", "monod"), [1, 2, 3]),
        Competition(G, [1, 2, -1], 0.3, 0.9),
        SIS(G, [1, 2, 3], [1, 1, 2], 0.5, 0.8, 10),
    ]


@pytest.mark.parametrize("spec", some_specs(), ids=lambda s: s.variant)
def test_rhs_matches_reference(spec):
    y = np.random.default_rng(1).uniform(0.1, 2.0, models.state_size(spec))
    np.testing.assert_allclose(model_rhs(spec, y), reference_rhs(spec, y), rtol=1e-12,
                               atol=1e-12)


@pytest.mark.parametrize("spec", some_specs(), ids=lambda s: s.variant)
def test_jacobian_matches_differences(spec):
    y = np.random.default_rng(2).uniform(0.1, 2.0, models.state_size(spec))
    h = 1e-6
    fd = np.column_stack([(model_rhs(spec, y + h * e) - model_rhs(spec, y - h * e)) / (2 * h)
                          for e in np.eye(y.size)])
    np.testing.assert_allclose(model_jacobian(spec, y), fd, atol=1e-8)


def test_state_size_checked():
    with pytest.raises(ValidationError):
        model_rhs(some_specs()[0], [1.0, 2.0])


def test_spec_validation():
    with pytest.raises(ValidationError):
        SingleSpecies(SYM, 1.0, "logistic", r=[1, 1])  # no K
    with pytest.raises(ValidationError):
        SingleSpecies(SYM, 1.0, "logistic", r=[1, 1], K=[1, 0])
    with pytest.raises(ValidationError):
        SingleSpecies(SYM, 1.0, "quadratic", p=[1, 1])
    with pytest.raises(ValidationError):
        SIS(SYM, [1, 1], [0, 1], 1, 1)
    with pytest.raises(ValidationError):
        PredatorPrey(SYM, SYM, [1, 1], [1, 1], [1, 1], [1, 1], 1, 1, "monod")
    with pytest.raises(ValidationError):
        Competition(SYM, [1, 1], -1.0, 1.0)


def test_regime_threshold():
    rep = classify_regime(SingleSpecies(SYM, 1.0, "linear", p=[1, -2]))
    assert rep.verdict is Verdict.THRESHOLD_AT
    assert rep.mu_star == pytest.approx(2.0, abs=1e-8)
    assert rep.describe().startswith("threshold_at(")


def test_regime_persistence_and_extinction():
    assert classify_regime(SingleSpecies(SYM, 1.0, "linear", p=[1, 2])).verdict \
        is Verdict.PERSISTENCE_ALL_MU
    assert classify_regime(SingleSpecies(SYM, 1.0, "linear", p=[-1, -2])).verdict \
        is Verdict.EXTINCTION_ALL_MU


def test_regime_degenerate():
    with pytest.raises(DegenerateCaseError):
        classify_regime(SingleSpecies(SYM, 1.0, "linear", p=[1, -1]))
    with pytest.raises(DegenerateCaseError):
        classify_regime(SingleSpecies(SYM, 1.0, "linear", p=[0, -1]))


def test_regime_lossy():
    rep = classify_regime(SingleSpecies(SYM, 1.0, "linear", p=[1, 1], eps=[0.5, 0.5]))
    assert rep.lossy and rep.verdict is Verdict.THRESHOLD_AT
    s = spectral.spectral_bound(spectral.pencil(SYM.a - 0.5 * np.eye(2), [1, 1], rep.mu_star))
    assert abs(s) <= 1e-9


def test_regime_needs_connected_network():
    G = netmat.build_network(2, [[0, 1], [0, 0]])
    with pytest.raises(StructureError):
        classify_regime(SingleSpecies(G, 1.0, "linear", p=[1, -2]))


def test_single_equilibrium_is_rest_point():
    spec = SingleSpecies(SYM, 0.5, "logistic", r=[1, 1], K=[1, 3])
    u = single_equilibrium(spec)
    assert np.all(u > 0)
    assert np.max(np.abs(model_rhs(spec, u))) <= 1e-10
    assert np.max(np.linalg.eigvals(model_jacobian(spec, u)).real) < 0


def test_single_equilibrium_absent_in_extinction():
    with pytest.raises(DomainError):
        single_equilibrium(SingleSpecies(SYM, 3.0, "linear", p=[1, -2]))


def test_one_patch_logistic():
    one = netmat.build_network(1, [[0.0]])
    assert single_equilibrium(SingleSpecies(one, 1.0, r=[1], K=[5]))[0] == \
        pytest.approx(5.0, abs=1e-10)


def test_predprey_threshold_two():
    pp = PredatorPrey(SYM, SYM, r=[1, 1], K=[1, 1], c=[2, 1], d=[1, 3], mu_u=1, mu_v=1)
    rep = predprey_threshold(pp)
    assert rep.mu_v_star == pytest.approx(2.0, abs=1e-8)
    np.testing.assert_allclose(rep.u_star, [1, 1], atol=1e-9)
    np.testing.assert_allclose(rep.q, [1, -2], atol=1e-9)


def test_predprey_verdicts():
    stable = PredatorPrey(SYM, SYM, [1, 1], [1, 1], [1, 1], [2, 2], 1, 1)
    assert predprey_threshold(stable).verdict is models.PredPreyVerdict.STABLE_ALL_MU
    unstable = PredatorPrey(SYM, SYM, [1, 1], [1, 1], [3, 3], [1, 1], 1, 1)
    assert predprey_threshold(unstable).verdict is models.PredPreyVerdict.UNSTABLE_ALL_MU


def test_sis_r0_closed_form():
    spec = SIS(SYM, [4, 1], [1, 1], 1, 1, 100)
    rep = sis_r0(spec, 1.0)
    assert rep.r0 == pytest.approx((10 + math.sqrt(52)) / 6, abs=1e-9)
    assert rep.limit_zero == pytest.approx(4.0, abs=1e-12)
    assert rep.limit_infinity == pytest.approx(2.5, abs=1e-12)
    assert rep.next_gen_residual <= 1e-9


def test_sis_r0_sweep_decreasing():
    spec = SIS(SYM, [4, 1], [1, 1], 1, 1, 100)
    r = [x.r0 for x in r0_sweep(spec, [0.1, 1, 10, 100])]
    assert all(b < a for a, b in zip(r, r[1:]))
    with pytest.raises(ValidationError):
        r0_sweep(spec, [1, 0.5])


def test_sis_reducible_next_generation():
    spec = SIS(SYM, [1, 0], [1, 1], 1, 1)
    rep = sis_r0(spec, 1.0)
    assert math.isnan(rep.next_gen_residual)
    dense = float(np.max(np.abs(np.linalg.eigvals(models.next_generation(spec, 1.0)))))
    assert rep.r0 == pytest.approx(dense, abs=1e-10)


def test_dfe():
    spec = SIS(netmat.build_network(2, [[0, 2], [3, 0]]), [1, 1], [1, 1], 1, 1, 10)
    S, I = disease_free_equilibrium(spec)
    np.testing.assert_allclose(S, [4, 6], atol=1e-12)
    np.testing.assert_array_equal(I, 0)


def test_sis_jacobian_singular_state():
    spec = some_specs()[3]
    with pytest.raises(DomainError):
        model_jacobian(spec, np.zeros(6))


@given(st.integers(0, 2**32 - 1))
def test_sis_mass_conserved(seed):
    rng = np.random.default_rng(seed)
    G = sweeps.random_laplacian_network(rng, 3)
    N = float(rng.uniform(10, 1000))
    spec = SIS(G, rng.uniform(0.5, 3, 3), rng.uniform(0.1, 1, 3), 0.5, 1.5, N)
    y0 = rng.dirichlet(np.ones(6)) * N
    tr = integrate(models.system(spec), y0, (0.0, 50.0), IntegratorConfig())
    assert np.max(np.abs(tr.states.sum(axis=1) - N)) < 1e-6 * N


def test_competition_outcomes():
    rep = competition_outcome(Competition(SYM, [2, 1], 0.5, 1.0), 1e4)
    assert rep.outcome is models.Outcome.SLOWER_WINS
    assert rep.v_norm < 1e-8
    rep = competition_outcome(Competition(SYM, [1, -4], 3, 4.0), 1e4)
    assert rep.outcome is models.Outcome.BOTH_EXTINCT


def test_competition_rejects():
    with pytest.raises(DegenerateCaseError):
        competition_outcome(Competition(SYM, [1, 1], 0.5, 1.0), 10.0)
    with pytest.raises(DomainError):
        competition_outcome(Competition(SYM, [2, 1], 1.0, 0.5), 10.0)
