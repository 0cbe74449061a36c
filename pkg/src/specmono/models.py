"""Patch models: single species, predator-prey, competition and SIS.

Dispersal always enters as ``mu * (A @ x)`` with ``A`` the stored network
matrix. For an auto-filled diagonal this is exactly the net-flow sum
``sum_j (a_ij x_j - a_ji x_i)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import kernels
from .errors import (DegenerateCaseError, DomainError, NumericError,
                     StructureError, ValidationError)
from .netmat import DispersalNetwork, strongly_connected
from .odeint import IntegratorConfig, PackedSystem, integrate, integrate_to_equilibrium
from .spectral import DEFAULT_TOL, principal_eigen, spectral_bound, threshold_mu

GROWTH_KINDS = ("logistic", "linear")
RESPONSE_KINDS = ("lotka", "monod")


def _vec(x, n: int, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = np.full(n, float(v))
    if v.shape != (n,):
        raise ValidationError(f"expected {n} entries, got shape {v.shape}", name)
    if not np.all(np.isfinite(v)):
        raise ValidationError("non-finite entry", name)
    v = v.copy()
    v.setflags(write=False)
    return v


def _kinds(x, n: int, allowed: Sequence[str], name: str) -> tuple[str, ...]:
    kinds = (x,) * n if isinstance(x, str) else tuple(x)
    if len(kinds) != n:
        raise ValidationError(f"expected {n} entries, got {len(kinds)}", name)
    for k in kinds:
        if k not in allowed:
            raise ValidationError(f"unknown kind {k!r}; expected one of {allowed}", name)
    return kinds


def _rate(x, name: str) -> float:
    x = float(x)
    if not (math.isfinite(x) and x >= 0):
        raise ValidationError(f"must be finite and non-negative, got {x!r}", name)
    return x


def _network(G, name: str) -> DispersalNetwork:
    if not isinstance(G, DispersalNetwork):
        raise ValidationError("expected a DispersalNetwork", name)
    return G


# ---------------------------------------------------------------------------
# specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SingleSpecies:
    """``u' = u f(u) + mu A u - mu eps u`` with ``f = r(1 - u/K)`` or ``p - u`` per patch."""

    network: DispersalNetwork
    mu: float
    growth: tuple[str, ...] | str = "logistic"
    r: np.ndarray | None = None
    K: np.ndarray | None = None
    p: np.ndarray | None = None
    eps: np.ndarray | None = None
    variant: str = field(default="single", init=False)

    def __post_init__(self):
        G = _network(self.network, "network")
        n = G.n
        kinds = _kinds(self.growth, n, GROWTH_KINDS, "growth")
        logi = np.array([k == "logistic" for k in kinds])
        r = _vec(np.zeros(n) if self.r is None else self.r, n, "r")
        K = _vec(np.ones(n) if self.K is None else self.K, n, "K")
        p = _vec(np.zeros(n) if self.p is None else self.p, n, "p")
        if logi.any() and (self.r is None or self.K is None):
            raise ValidationError("logistic patches need r and K", "growth")
        if (~logi).any() and self.p is None:
            raise ValidationError("linear patches need p", "growth")
        if np.any(K[logi] <= 0):
            raise ValidationError("carrying capacities must be positive", "K")
        eps = _vec(np.zeros(n) if self.eps is None else self.eps, n, "eps")
        if np.any(eps < 0):
            raise ValidationError("leak rates must be non-negative", "eps")
        for name, val in (("growth", kinds), ("r", r), ("K", K), ("p", p), ("eps", eps),
                          ("mu", _rate(self.mu, "mu"))):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.network.n

    @property
    def logistic_mask(self) -> np.ndarray:
        return np.array([k == "logistic" for k in self.growth])

    def growth_at_zero(self) -> np.ndarray:
        return np.where(self.logistic_mask, self.r, self.p)

    def with_mu(self, mu: float) -> "SingleSpecies":
        return SingleSpecies(self.network, mu, self.growth, self.r, self.K, self.p, self.eps)


@dataclass(frozen=True)
class PredatorPrey:
    """Logistic prey on network ``prey``, predators on network ``predator``.

    Response ``g(u) = u`` (lotka) or ``u / (half + u)`` (monod).
    """

    prey: DispersalNetwork
    predator: DispersalNetwork
    r: np.ndarray
    K: np.ndarray
    c: np.ndarray
    d: np.ndarray
    mu_u: float
    mu_v: float
    response: tuple[str, ...] | str = "lotka"
    half: np.ndarray | None = None
    variant: str = field(default="predprey", init=False)

    def __post_init__(self):
        A = _network(self.prey, "prey")
        B = _network(self.predator, "predator")
        if A.n != B.n:
            raise ValidationError("prey and predator networks differ in size", "predator")
        n = A.n
        kinds = _kinds(self.response, n, RESPONSE_KINDS, "response")
        half = _vec(np.ones(n) if self.half is None else self.half, n, "half")
        monod = np.array([k == "monod" for k in kinds])
        if monod.any() and (self.half is None or np.any(half[monod] <= 0)):
            raise ValidationError("monod patches need a positive half-saturation", "half")
        K = _vec(self.K, n, "K")
        if np.any(K <= 0):
            raise ValidationError("carrying capacities must be positive", "K")
        for name, val in (("r", _vec(self.r, n, "r")), ("K", K), ("c", _vec(self.c, n, "c")),
                          ("d", _vec(self.d, n, "d")), ("half", half), ("response", kinds),
                          ("mu_u", _rate(self.mu_u, "mu_u")),
                          ("mu_v", _rate(self.mu_v, "mu_v"))):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.prey.n

    def response_value(self, u):
        u = np.asarray(u, dtype=float)
        monod = np.array([k == "monod" for k in self.response])
        g = np.where(monod, u / (self.half + u), u)
        dg = np.where(monod, self.half / (self.half + u) ** 2, 1.0)
        return g, dg

    def prey_subsystem(self) -> SingleSpecies:
        return SingleSpecies(self.prey, self.mu_u, "logistic", r=self.r, K=self.K)

    def with_mu_v(self, mu_v: float) -> "PredatorPrey":
        return PredatorPrey(self.prey, self.predator, self.r, self.K, self.c, self.d,
                            self.mu_u, mu_v, self.response, self.half)


@dataclass(frozen=True)
class Competition:
    """Two species identical except for dispersal rates ``mu_u`` and ``mu_v``."""

    network: DispersalNetwork
    p: np.ndarray
    mu_u: float
    mu_v: float
    variant: str = field(default="competition", init=False)

    def __post_init__(self):
        G = _network(self.network, "network")
        object.__setattr__(self, "p", _vec(self.p, G.n, "p"))
        object.__setattr__(self, "mu_u", _rate(self.mu_u, "mu_u"))
        object.__setattr__(self, "mu_v", _rate(self.mu_v, "mu_v"))

    @property
    def n(self) -> int:
        return self.network.n


@dataclass(frozen=True)
class SIS:
    network: DispersalNetwork
    beta: np.ndarray
    gamma: np.ndarray
    mu_S: float
    mu_I: float
    N: float = 1.0
    variant: str = field(default="sis", init=False)

    def __post_init__(self):
        G = _network(self.network, "network")
        beta = _vec(self.beta, G.n, "beta")
        gamma = _vec(self.gamma, G.n, "gamma")
        if np.any(beta < 0):
            raise ValidationError("transmission rates must be non-negative", "beta")
        if np.any(gamma <= 0):
            raise ValidationError("recovery rates must be positive", "gamma")
        N = float(self.N)
        if not (math.isfinite(N) and N > 0):
            raise ValidationError(f"total population must be positive, got {N!r}", "N")
        for name, val in (("beta", beta), ("gamma", gamma), ("mu_S", _rate(self.mu_S, "mu_S")),
                          ("mu_I", _rate(self.mu_I, "mu_I")), ("N", N)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.network.n

    def with_mu_I(self, mu_I: float) -> "SIS":
        return SIS(self.network, self.beta, self.gamma, self.mu_S, mu_I, self.N)


ModelSpec = Union[SingleSpecies, PredatorPrey, Competition, SIS]


def state_size(spec: ModelSpec) -> int:
    return spec.n if isinstance(spec, SingleSpecies) else 2 * spec.n


# ---------------------------------------------------------------------------
# right-hand sides and Jacobians
# ---------------------------------------------------------------------------


def system(spec: ModelSpec) -> PackedSystem:
    """The model as a packed right-hand side for the integrator."""
    n = spec.n
    if isinstance(spec, SingleSpecies):
        kinds = [kernels.LOGISTIC if k == "logistic" else kernels.LINEAR_GROWTH
                 for k in spec.growth]
        args = kernels.pack(kernels.SINGLE, mats=[spec.network.a],
                            vecs=[spec.eps, spec.r, spec.K, spec.p], scal=[spec.mu],
                            ints=[kinds], n=n)
    elif isinstance(spec, PredatorPrey):
        kinds = [kernels.LOTKA if k == "lotka" else kernels.MONOD for k in spec.response]
        args = kernels.pack(kernels.PREDPREY, mats=[spec.prey.a, spec.predator.a],
                            vecs=[spec.r, spec.K, spec.half, spec.c, spec.d],
                            scal=[spec.mu_u, spec.mu_v], ints=[kinds], n=n)
    elif isinstance(spec, Competition):
        args = kernels.pack(kernels.COMPETITION, mats=[spec.network.a], vecs=[spec.p],
                            scal=[spec.mu_u, spec.mu_v], n=n)
    elif isinstance(spec, SIS):
        args = kernels.pack(kernels.SIS, mats=[spec.network.a], vecs=[spec.beta, spec.gamma],
                            scal=[spec.mu_S, spec.mu_I], n=n)
    else:
        raise ValidationError(f"unknown model spec {type(spec).__name__}", "spec")
    return PackedSystem(args, n)


def _state(spec: ModelSpec, state) -> np.ndarray:
    y = np.asarray(state, dtype=float).reshape(-1)
    if y.size != state_size(spec):
        raise ValidationError(f"expected {state_size(spec)} entries, got {y.size}", "state")
    if not np.all(np.isfinite(y)):
        raise ValidationError("non-finite entry", "state")
    return y


def model_rhs(spec: ModelSpec, state, t: float = 0.0) -> np.ndarray:
    return system(spec)(t, _state(spec, state))


def model_jacobian(spec: ModelSpec, state) -> np.ndarray:
    y = _state(spec, state)
    n = spec.n
    if isinstance(spec, SingleSpecies):
        u = y
        dgrowth = np.where(spec.logistic_mask, spec.r * (1 - 2 * u / spec.K), spec.p - 2 * u)
        J = spec.mu * spec.network.a.copy()
        J[np.diag_indices(n)] += dgrowth - spec.mu * spec.eps
        return J
    u, v = y[:n], y[n:]
    J = np.zeros((2 * n, 2 * n))
    idx = np.arange(n)
    if isinstance(spec, PredatorPrey):
        g, dg = spec.response_value(u)
        J[:n, :n] = spec.mu_u * spec.prey.a
        J[n:, n:] = spec.mu_v * spec.predator.a
        J[idx, idx] += spec.r * (1 - 2 * u / spec.K) - dg * v
        J[idx, n + idx] = -g
        J[n + idx, idx] = spec.c * dg * v
        J[n + idx, n + idx] += spec.c * g - spec.d
    elif isinstance(spec, Competition):
        A = spec.network.a
        J[:n, :n] = spec.mu_u * A
        J[n:, n:] = spec.mu_v * A
        J[idx, idx] += spec.p - 2 * u - v
        J[idx, n + idx] = -u
        J[n + idx, idx] = -v
        J[n + idx, n + idx] += spec.p - u - 2 * v
    elif isinstance(spec, SIS):
        S, I = u, v
        tot = S + I
        if np.any(tot == 0):
            j = int(np.flatnonzero(tot == 0)[0])
            raise DomainError(f"incidence is singular at patch {j} (S + I = 0)", "state")
        dS = spec.beta * I ** 2 / tot ** 2
        dI = spec.beta * S ** 2 / tot ** 2
        A = spec.network.a
        J[:n, :n] = spec.mu_S * A
        J[n:, n:] = spec.mu_I * A
        J[idx, idx] -= dS
        J[idx, n + idx] = spec.gamma - dI
        J[n + idx, idx] = dS
        J[n + idx, n + idx] += dI - spec.gamma
    else:
        raise ValidationError(f"unknown model spec {type(spec).__name__}", "spec")
    return J


# ---------------------------------------------------------------------------
# single species: regime and equilibrium
# ---------------------------------------------------------------------------


class Verdict(enum.Enum):
    EXTINCTION_ALL_MU = "extinction_all_mu"
    PERSISTENCE_ALL_MU = "persistence_all_mu"
    THRESHOLD_AT = "threshold_at"


@dataclass(frozen=True)
class RegimeReport:
    M: float
    m: float
    mu_star: float | None
    verdict: Verdict
    case: str
    alpha: np.ndarray
    lossy: bool

    def describe(self) -> str:
        if self.verdict is Verdict.THRESHOLD_AT:
            return f"threshold_at({self.mu_star!r})"
        return self.verdict.value


def _require_irreducible(a: np.ndarray, name: str) -> None:
    if a.shape[0] > 1 and not strongly_connected(a):
        raise StructureError("network is not strongly connected", name)


def _is_zero(x: float, scale: float, tol: float) -> bool:
    return abs(x) <= tol * max(1.0, scale)


def classify_regime(spec: SingleSpecies, tol: float = DEFAULT_TOL) -> RegimeReport:
    """Extinction, persistence or a dispersal threshold, from the signs of ``M`` and ``m``.

    ``alpha`` is the sum-one principal eigenvector of ``A - diag(eps)``. The
    loss-free branch needs that matrix to have spectral bound 0; a negative
    bound (leaky dispersal, including a supplied diagonal that loses mass)
    selects the lossy branch.
    """
    A = spec.network.a
    _require_irreducible(A, "network")
    base = A - np.diag(spec.eps)
    e = principal_eigen(base, tol)
    scale = float(np.abs(base).sum(axis=1).max())
    if e.value > 0 and not _is_zero(e.value, scale, tol):
        raise DomainError(f"s(A - diag(eps)) = {e.value!r} > 0: network creates mass",
                          "network")
    lossy = not _is_zero(e.value, scale, tol)
    f0 = spec.growth_at_zero()
    M = float(f0.max())
    m = math.fsum(e.right * f0)
    fscale = float(np.abs(f0).max())
    if M < 0:
        return RegimeReport(M, m, None, Verdict.EXTINCTION_ALL_MU, "i", e.right, lossy)
    if M == 0:
        raise DegenerateCaseError("M = 0: the extinction/persistence classification is silent")
    if lossy:
        mu_star = threshold_mu(base, f0, tol=tol)
        return RegimeReport(M, m, mu_star, Verdict.THRESHOLD_AT, "iii", e.right, lossy)
    if _is_zero(m, fscale, 1e-12):
        raise DegenerateCaseError("m = 0: the extinction/persistence classification is silent")
    if m > 0:
        return RegimeReport(M, m, None, Verdict.PERSISTENCE_ALL_MU, "ii", e.right, lossy)
    mu_star = threshold_mu(base, f0, tol=tol)
    return RegimeReport(M, m, mu_star, Verdict.THRESHOLD_AT, "iii", e.right, lossy)


def extinction_bound(spec: SingleSpecies, tol: float = DEFAULT_TOL) -> float:
    """``s(J)`` at the extinction state, ``J = mu (A - diag(eps)) + diag(f(0))``."""
    return spectral_bound(model_jacobian(spec, np.zeros(spec.n)), tol)


def _newton(spec: ModelSpec, y: np.ndarray, tol: float, max_iter: int = 50) -> np.ndarray:
    sysf = system(spec)
    F = sysf(0.0, y)
    for _ in range(max_iter):
        if np.max(np.abs(F)) <= tol:
            return y
        step = np.linalg.solve(model_jacobian(spec, y), -F)
        # damp only if a full step would leave the positive orthant
        lam = 1.0
        while np.any(y + lam * step <= 0) and lam > 1e-6:
            lam *= 0.5
        y = y + lam * step
        F = sysf(0.0, y)
    if np.max(np.abs(F)) <= tol:
        return y
    raise NumericError(f"Newton polish stalled at |F| = {np.max(np.abs(F)):.3e}",
                       residual=float(np.max(np.abs(F))), last_iterate=y)


def default_interior(spec: SingleSpecies) -> np.ndarray:
    """``K/2`` on logistic patches, ``p+/2`` on linear ones, nudged off zero."""
    start = np.where(spec.logistic_mask, spec.K / 2, np.maximum(spec.p, 0) / 2)
    floor = 1e-2 * max(float(start.max()), 1.0)
    return np.maximum(start, floor)


def single_equilibrium(spec: SingleSpecies, tol: float = DEFAULT_TOL, y0=None,
                       cfg: IntegratorConfig | None = None) -> np.ndarray:
    """The positive equilibrium, by integration then Newton polish."""
    _require_irreducible(spec.network.a, "network")
    s0 = extinction_bound(spec, tol)
    if s0 <= 0:
        raise DomainError(f"no positive equilibrium: s(J(0)) = {s0!r} <= 0 "
                          "(extinction regime at this mu)", "mu")
    y0 = default_interior(spec) if y0 is None else _state(spec, y0)
    cfg = cfg or IntegratorConfig(convergence_norm_tol=math.sqrt(tol))
    eq = integrate_to_equilibrium(system(spec), y0, cfg)
    u = _newton(spec, eq.state.copy(), tol)
    if not np.all(u > 0):
        raise NumericError("equilibrium left the positive orthant", last_iterate=u)
    return u


# ---------------------------------------------------------------------------
# predator-prey
# ---------------------------------------------------------------------------


class PredPreyVerdict(enum.Enum):
    STABLE_ALL_MU = "stable_all_mu"
    UNSTABLE_ALL_MU = "unstable_all_mu"
    THRESHOLD_AT = "threshold_at"


@dataclass(frozen=True)
class PredPreyReport:
    verdict: PredPreyVerdict
    mu_v_star: float | None
    M: float
    m: float
    u_star: np.ndarray
    q: np.ndarray

    def describe(self) -> str:
        if self.verdict is PredPreyVerdict.THRESHOLD_AT:
            return f"threshold_at({self.mu_v_star!r})"
        return self.verdict.value


def predator_growth(spec: PredatorPrey, u_star) -> np.ndarray:
    g, _ = spec.response_value(u_star)
    return spec.c * g - spec.d


def predprey_threshold(spec: PredatorPrey, tol: float = DEFAULT_TOL) -> PredPreyReport:
    """Where the prey-only state ``E1`` changes stability as ``mu_v`` varies."""
    if np.any(spec.r <= 0):
        raise DomainError("prey growth rates must be positive in every patch", "r")
    B = spec.predator.a
    _require_irreducible(B, "predator")
    u_star = single_equilibrium(spec.prey_subsystem(), tol)
    q = predator_growth(spec, u_star)
    alpha = principal_eigen(B, tol).right
    M = float(q.max())
    m = math.fsum(alpha * q)
    if M < 0:
        return PredPreyReport(PredPreyVerdict.STABLE_ALL_MU, None, M, m, u_star, q)
    if M == 0 or _is_zero(m, float(np.abs(q).max()), 1e-12):
        raise DegenerateCaseError("m = 0 or M = 0: the stability classification is silent")
    if m > 0:
        return PredPreyReport(PredPreyVerdict.UNSTABLE_ALL_MU, None, M, m, u_star, q)
    mu_v = threshold_mu(B, q, tol=tol)
    return PredPreyReport(PredPreyVerdict.THRESHOLD_AT, mu_v, M, m, u_star, q)


def prey_only_state(spec: PredatorPrey, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``E1 = (u*, 0)``."""
    return np.concatenate([single_equilibrium(spec.prey_subsystem(), tol), np.zeros(spec.n)])


# ---------------------------------------------------------------------------
# SIS
# ---------------------------------------------------------------------------


def disease_free_equilibrium(spec: SIS, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    A = spec.network.a
    if spec.n > 1 and not strongly_connected(A):
        raise StructureError("network is not strongly connected", "network")
    alpha = principal_eigen(A, tol).right
    return alpha * spec.N, np.zeros(spec.n)


@dataclass(frozen=True)
class R0Report:
    mu_I: float
    r0: float
    limit_zero: float
    limit_infinity: float
    next_gen_residual: float


def next_generation(spec: SIS, mu_I: float) -> np.ndarray:
    """``X = -V^{-1} F`` from linear solves, with ``V = mu_I A - diag(gamma)``."""
    V = mu_I * spec.network.a - np.diag(spec.gamma)
    return np.linalg.solve(V, -np.diag(spec.beta))


def sis_r0(spec: SIS, mu_I: float, tol: float = DEFAULT_TOL) -> R0Report:
    """Basic reproduction number at dispersal rate ``mu_I``.

    ``-V^{-1} F`` has the same spectrum as ``-F V^{-1}``. The residual is NaN
    when some ``beta_j = 0`` makes the next-generation matrix reducible.
    """
    mu_I = float(mu_I)
    if not (math.isfinite(mu_I) and mu_I > 0):
        raise DomainError(f"mu_I must be positive, got {mu_I!r}", "mu_I")
    A = spec.network.a
    _require_irreducible(A, "network")
    X = next_generation(spec, mu_I)
    X = np.where(X < 0, 0.0, X)  # rounding only: -V^{-1} is entrywise non-negative
    if spec.n == 1 or strongly_connected(X):
        e = principal_eigen(X, tol)
        r0, resid = e.value, e.residual
    else:
        r0, resid = spectral_bound(X, tol), float("nan")
    alpha = principal_eigen(A, tol).right
    limit_zero = float(np.max(spec.beta / spec.gamma))
    limit_inf = math.fsum(alpha * spec.beta) / math.fsum(alpha * spec.gamma)
    return R0Report(mu_I, r0, limit_zero, limit_inf, resid)


def r0_sweep(spec: SIS, grid: Sequence[float], tol: float = DEFAULT_TOL) -> list[R0Report]:
    grid = [float(g) for g in grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("grid must be strictly increasing", "grid")
    return [sis_r0(spec, mu, tol) for mu in grid]


# ---------------------------------------------------------------------------
# competition
# ---------------------------------------------------------------------------


class Outcome(enum.Enum):
    SLOWER_WINS = "slower_wins"
    BOTH_EXTINCT = "both_extinct"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class CompetitionReport:
    outcome: Outcome
    state: np.ndarray
    t: float
    u_star: np.ndarray
    v_norm: float
    u_distance: float


def ideal_free(p: np.ndarray, alpha: np.ndarray, rel: float = 1e-12) -> bool:
    """``p`` is a scalar multiple of ``alpha``."""
    c = float(p @ alpha) / float(alpha @ alpha)
    return bool(np.max(np.abs(p - c * alpha)) <= rel * max(1.0, float(np.abs(p).max())))


def default_competition_start(spec: Competition) -> np.ndarray:
    half = np.maximum(spec.p, 0) / 2
    half = np.maximum(half, 1e-2 * max(float(half.max()), 1.0))
    return np.concatenate([half, half])


def competition_outcome(spec: Competition, t_end: float, tol: float = 1e-8, y0=None,
                        cfg: IntegratorConfig | None = None) -> CompetitionReport:
    """Integrate to ``t_end`` and report which exclusion outcome was reached.

    ``slower_wins`` needs ``|v|_inf < tol`` and ``|u - u*|_inf < sqrt(tol)``;
    ``both_extinct`` needs both species below ``tol``. Anything else is
    ``undetermined``. Integration stops early once the vector field vanishes.
    """
    if not spec.mu_u < spec.mu_v:
        raise DomainError(f"need mu_u < mu_v, got {spec.mu_u} >= {spec.mu_v}", "mu_u")
    A = spec.network.a
    _require_irreducible(A, "network")
    alpha = principal_eigen(A, DEFAULT_TOL).right
    if ideal_free(spec.p, alpha):
        raise DegenerateCaseError("p is proportional to alpha (ideal free dispersal): "
                                  "a continuum of coexistence equilibria exists")
    n = spec.n
    single = SingleSpecies(spec.network, spec.mu_u, "linear", p=spec.p)
    if extinction_bound(single) > 0:
        u_star = single_equilibrium(single)
    else:
        u_star = np.zeros(n)
    y0 = default_competition_start(spec) if y0 is None else _state(spec, y0)
    cfg = cfg or IntegratorConfig(convergence_norm_tol=1e-3 * tol)
    traj = integrate(system(spec), y0, (0.0, float(t_end)), cfg, record=False,
                     stop_on_convergence=True)
    if not traj.ok:
        raise NumericError("integration failed before t_end", last_iterate=traj.final)
    y = traj.final
    u, v = y[:n], y[n:]
    v_norm = float(np.max(np.abs(v)))
    u_dist = float(np.max(np.abs(u - u_star)))
    if v_norm < tol and np.max(np.abs(u)) < tol:
        outcome = Outcome.BOTH_EXTINCT
    elif v_norm < tol and u_dist < math.sqrt(tol) and np.any(u_star > 0):
        outcome = Outcome.SLOWER_WINS
    else:
        outcome = Outcome.UNDETERMINED
    return CompetitionReport(outcome, y, float(traj.times[-1]), u_star, v_norm, u_dist)
