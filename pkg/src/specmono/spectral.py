"""Principal eigenpairs and the spectral-bound map ``mu -> s(mu*A + Q)``.

Throughout, ``Q`` may be given either as a vector of diagonal entries or as a
diagonal matrix. Eigenvectors are normalized to sum to one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, NoThresholdError, NumericError, StructureError, ValidationError
from .netmat import as_square, is_quasi_positive, scc_blocks, strongly_connected

DEFAULT_TOL = 1e-10


def as_diag(Q, n: int | None = None, name: str = "Q") -> np.ndarray:
    """Diagonal entries of ``Q`` (vector or diagonal matrix) as a float vector."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim == 2:
        if Q.shape[0] != Q.shape[1]:
            raise ValidationError(f"expected a square diagonal matrix, got {Q.shape}", name)
        if np.any(Q[~np.eye(Q.shape[0], dtype=bool)] != 0):
            raise ValidationError("matrix is not diagonal", name)
        Q = np.diag(Q).copy()
    if Q.ndim != 1:
        raise ValidationError(f"expected a vector or diagonal matrix, got {Q.shape}", name)
    if n is not None and Q.size != n:
        raise ValidationError(f"expected {n} entries, got {Q.size}", name)
    if not np.all(np.isfinite(Q)):
        raise ValidationError("non-finite entry", name)
    return Q


def pencil(A, Q, mu: float) -> np.ndarray:
    """``mu*A + diag(Q)``."""
    A = as_square(A, "A")
    M = mu * A
    M[np.diag_indices_from(M)] += as_diag(Q, A.shape[0])
    return M


# ---------------------------------------------------------------------------
# principal eigenpair
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenTriple:
    value: float
    right: np.ndarray
    left: np.ndarray
    residual: float
    iterations: int = 0
    polished: bool = False


def iteration_cap(n: int, tol: float) -> int:
    return int(math.ceil(100 * n * max(1.0, -math.log10(tol))))


def _residual_scale(M: np.ndarray) -> float:
    return max(1.0, float(np.abs(M).sum(axis=1).max()))


def _residuals(M, lam, u, w) -> float:
    return max(float(np.max(np.abs(M @ u - lam * u))),
               float(np.max(np.abs(w @ M - lam * w))))


def _inverse_polish(M: np.ndarray, x: np.ndarray, target: float, steps: int = 60):
    # shift-invert just above the Collatz-Wielandt upper bound: sigma*I - M is
    # then a nonsingular M-matrix whose inverse is positive
    n = M.shape[0]
    cw = float(np.max((M @ x) / x))
    sigma = cw + 1e-7 * (1.0 + abs(cw))
    K = sigma * np.eye(n) - M
    extra = 2
    for _ in range(steps):
        y = np.linalg.solve(K, x)
        y = np.abs(y)
        x = y / y.sum()
        Mx = M @ x
        lam = float(Mx.sum())
        # two extra solves push well past the target; near-degenerate roots
        # otherwise leave the shared quotient short
        if np.max(np.abs(Mx - lam * x)) <= target:
            extra -= 1
            if extra < 0:
                break
    return x


def principal_eigen(M, tol: float = DEFAULT_TOL) -> EigenTriple:
    """Perron root of an irreducible quasi-positive ``M`` with both eigenvectors.

    Power iteration runs on ``M + cI`` with ``c = 1 + max|m_ii|``. Convergence
    is declared when ``max(|Mu - lam u|, |w'M - lam w'|) <= tol * max(1, |M|_inf)``.
    Both vectors are then refined by shift-invert solves; ``polished`` records
    whether the power iteration hit its cap before that.
    """
    M = as_square(M, "M")
    if not (tol > 0):
        raise ValidationError("tolerance must be positive", "tol")
    if not np.all(np.isfinite(M)):
        raise ValidationError("non-finite entry", "M")
    if not is_quasi_positive(M):
        raise DomainError("matrix has a negative off-diagonal entry", "M")
    n = M.shape[0]
    if n == 1:
        one = np.ones(1)
        return EigenTriple(float(M[0, 0]), one, one.copy(), 0.0)
    if not strongly_connected(M):
        raise StructureError("matrix is reducible", "M")
    c = 1.0 + float(np.max(np.abs(np.diag(M))))
    S = np.ascontiguousarray(M + c * np.eye(n))
    St = np.ascontiguousarray(S.T)
    target = tol * _residual_scale(M)
    cap = iteration_cap(n, tol)
    x0 = np.full(n, 1.0 / n)
    # iterate a little past the target: the final residual uses the shared
    # two-sided quotient, not each side's own estimate
    inner = 0.25 * target
    u, _, it_r, res_r = kernels.power_iterate(S, x0, cap, inner)
    w, _, it_l, res_l = kernels.power_iterate(St, x0, cap, inner)
    polished = not (res_r <= inner and res_l <= inner)
    # a residual of tol only pins the vectors to tol/gap; a few shift-invert
    # solves bring them to working precision either way
    u = _inverse_polish(M, u, inner)
    w = _inverse_polish(M.T.copy(), w, inner)
    lam = float(w @ M @ u) / float(w @ u)
    resid = _residuals(M, lam, u, w)
    if not resid <= target:
        raise NumericError(
            f"principal eigenpair did not converge (residual {resid:.3e} > {target:.3e})",
            residual=resid, last_iterate=u)
    return EigenTriple(lam, u, w, resid, max(it_r, it_l), polished)


def spectral_bound(M, tol: float = DEFAULT_TOL) -> float:
    """Largest real part of the spectrum.

    Quasi-positive input goes through the Perron route, blockwise when
    reducible; anything else falls back to a dense eigensolve.
    """
    M = as_square(M, "M")
    if not np.all(np.isfinite(M)):
        raise ValidationError("non-finite entry", "M")
    if not is_quasi_positive(M):
        return float(np.max(np.linalg.eigvals(M).real))
    if M.shape[0] == 1 or strongly_connected(M):
        return principal_eigen(M, tol).value
    return max(_block_bound(M, b, tol) for b in scc_blocks(M).blocks)


def _block_bound(M: np.ndarray, block, tol: float) -> float:
    idx = np.asarray(block)
    return principal_eigen(M[np.ix_(idx, idx)], tol).value


def collatz_wielandt(A, u) -> float:
    """``max_i (Au)_i / u_i``, an upper bound on ``s(A)`` for positive ``u``."""
    A = as_square(A, "A")
    u = np.asarray(u, dtype=float)
    if u.shape != (A.shape[0],):
        raise ValidationError(f"expected {A.shape[0]} entries", "u")
    if not np.all(u > 0):
        raise DomainError("all entries must be positive", "u")
    return float(np.max((A @ u) / u))


def row_sum_bracket(A, Q, mu: float) -> tuple[float, float]:
    """Row-sum bounds ``min_i (mu*sum_j a_ij + q_i) <= s <= max_i (...)``."""
    A = as_square(A, "A")
    r = mu * A.sum(axis=1) + as_diag(Q, A.shape[0])
    return float(r.min()), float(r.max())


# ---------------------------------------------------------------------------
# derivatives and sampled curves
# ---------------------------------------------------------------------------


def _slope(A: np.ndarray, q: np.ndarray, mu: float, tol: float) -> float:
    e = principal_eigen(pencil(A, q, mu), tol)
    return float(e.left @ A @ e.right) / float(e.left @ e.right)


def derivative_step(mu: float) -> float:
    return min(max(1e-5, 1e-5 * mu), mu / 2)


def bound_derivative(A, Q, mu: float, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """``(s'(mu), s''(mu))`` for ``s(mu) = s(mu*A + Q)``.

    The slope is ``w'Au / w'u`` with ``u, w`` the right and left principal
    eigenvectors; the curvature is a central difference of that slope.
    """
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu!r}", "mu")
    A = as_square(A, "A")
    q = as_diag(Q, A.shape[0])
    ds = _slope(A, q, mu, tol)
    h = derivative_step(mu)
    d2s = (_slope(A, q, mu + h, tol) - _slope(A, q, mu - h, tol)) / (2 * h)
    return ds, d2s


@dataclass(frozen=True)
class SpectralCurve:
    """Rows ``(mu, s, ds, d2s)`` over an equally spaced grid."""

    rows: np.ndarray
    grid: tuple[float, float, int]

    @property
    def mu(self) -> np.ndarray:
        return self.rows[:, 0]

    @property
    def s(self) -> np.ndarray:
        return self.rows[:, 1]

    @property
    def ds(self) -> np.ndarray:
        return self.rows[:, 2]

    @property
    def d2s(self) -> np.ndarray:
        return self.rows[:, 3]


def bound_curve(A, Q, grid: tuple[float, float, int], tol: float = DEFAULT_TOL) -> SpectralCurve:
    mu_min, mu_max, steps = grid
    if not (0 < mu_min < mu_max):
        raise DomainError(f"need 0 < mu_min < mu_max, got ({mu_min}, {mu_max})", "grid")
    if int(steps) != steps or steps < 2:
        raise DomainError(f"need at least 2 steps, got {steps!r}", "grid")
    A = as_square(A, "A")
    q = as_diag(Q, A.shape[0])
    mus = np.linspace(mu_min, mu_max, int(steps))
    rows = np.empty((mus.size, 4))
    for k, mu in enumerate(mus):
        try:
            s = spectral_bound(pencil(A, q, mu), tol)
            ds, d2s = bound_derivative(A, q, mu, tol)
        except NumericError as exc:
            raise NumericError(f"at mu={mu!r}: {exc}", exc.residual, exc.last_iterate,
                               float(mu)) from exc
        rows[k] = (mu, s, ds, d2s)
    rows.setflags(write=False)
    return SpectralCurve(rows, (float(mu_min), float(mu_max), int(steps)))


# ---------------------------------------------------------------------------
# limits as mu -> 0 and mu -> infinity
# ---------------------------------------------------------------------------


class Divergent(enum.Enum):
    """Tag for a limit that is not a finite number."""

    NEG_INF = "-inf"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class LimitPair:
    at_zero: float
    at_infinity: float | Divergent
    weight_vector: np.ndarray | None

    @property
    def finite_infinity(self) -> bool:
        return not isinstance(self.at_infinity, Divergent)

    def infinity_below(self, x: float) -> bool:
        """``at_infinity < x``, treating the sentinel as below every number."""
        return not self.finite_infinity or self.at_infinity < x


def _null_vector(A: np.ndarray) -> np.ndarray:
    # bordered system [[A, 1], [1', 0]] [x; t] = [0; 1]; nonsingular whenever 0
    # is a simple eigenvalue with positive left and right eigenvectors
    n = A.shape[0]
    K = np.zeros((n + 1, n + 1))
    K[:n, :n] = A
    K[:n, n] = 1.0
    K[n, :n] = 1.0
    rhs = np.zeros(n + 1)
    rhs[n] = 1.0
    return np.linalg.solve(K, rhs)[:n]


def similarity_transport(A, side: str = "right", tol: float = DEFAULT_TOL) -> np.ndarray:
    """Rescale ``A`` (with ``s(A) = 0``) by its principal eigenvector.

    ``side="right"`` gives ``U^-1 A U`` with ``u`` the right eigenvector: every
    row sums to zero. ``side="left"`` gives ``-(W A W^-1)`` with ``w`` the left
    eigenvector: a Laplacian with zero column sums.
    """
    A = as_square(A, "A")
    e = principal_eigen(A, tol)
    if side == "right":
        return (A * e.right[None, :]) / e.right[:, None]
    if side == "left":
        return -(A * e.left[:, None]) / e.left[None, :]
    raise ValidationError(f"side must be 'right' or 'left', got {side!r}", "side")


def _is_zero_bound(value: float, A: np.ndarray, tol: float) -> bool:
    return abs(value) <= tol * _residual_scale(A)


def asymptotic_limits(A, Q, tol: float = DEFAULT_TOL) -> LimitPair:
    """Limits of ``s(mu*A + Q)`` as ``mu -> 0`` and ``mu -> infinity``.

    With ``s(A) = 0`` the infinite limit is ``sum_i v_i q_i`` where ``v`` is
    the sum-one left null vector of ``U^-1 A U``; with ``s(A) < 0`` it is the
    :attr:`Divergent.NEG_INF` tag.
    """
    A = as_square(A, "A")
    q = as_diag(Q, A.shape[0])
    at_zero = float(q.max())
    sA = principal_eigen(A, tol).value
    if _is_zero_bound(sA, A, tol):
        u = _null_vector(A)
        At = (A * u[None, :]) / u[:, None]
        v = _null_vector(At.T.copy())
        v.setflags(write=False)
        return LimitPair(at_zero, math.fsum(v * q), v)
    if sA < 0:
        return LimitPair(at_zero, Divergent.NEG_INF, None)
    raise DomainError(f"s(A) = {sA!r} > 0; limits need s(A) <= 0", "A")


# ---------------------------------------------------------------------------
# threshold
# ---------------------------------------------------------------------------

CASE_EXTINCTION = "extinction"  # largest patch rate M <= 0: s < 0 for all mu
CASE_PERSISTENCE = "persistence"  # weighted mean m >= 0: s > 0 for all mu


def threshold_mu(A, Q, bracket_hint: tuple[float, float] = (1e-6, 1.0),
                 tol: float = DEFAULT_TOL, max_iter: int = 200) -> float:
    """The unique ``mu*`` with ``s(mu* A + Q) = 0``, by bisection.

    The bracket grows by a factor 4 on either side until it straddles the
    sign change. Stops as soon as ``|s| <= tol``.
    """
    A = as_square(A, "A")
    q = as_diag(Q, A.shape[0])
    lim = asymptotic_limits(A, q, tol)
    if lim.at_zero <= 0:
        raise NoThresholdError(
            f"max q = {lim.at_zero!r} <= 0: s(mu A + Q) <= 0 for every mu", CASE_EXTINCTION)
    if not lim.infinity_below(0.0):
        raise NoThresholdError(
            f"infinite-mu limit {lim.at_infinity!r} >= 0: s(mu A + Q) > 0 for every mu",
            CASE_PERSISTENCE)

    def s(mu: float) -> float:
        return principal_eigen(pencil(A, q, mu), tol).value

    lo, hi = (float(x) for x in bracket_hint)
    if not 0 < lo < hi:
        raise ValidationError(f"need 0 < lo < hi, got ({lo}, {hi})", "bracket_hint")
    s_lo, s_hi = s(lo), s(hi)
    for _ in range(max_iter):
        if s_lo > 0:
            break
        if abs(s_lo) <= tol:
            return lo
        hi, s_hi = lo, s_lo
        lo /= 4.0
        s_lo = s(lo)
    for _ in range(max_iter):
        if s_hi < 0:
            break
        if abs(s_hi) <= tol:
            return hi
        lo, s_lo = hi, s_hi
        hi *= 4.0
        s_hi = s(hi)
    if not (s_lo > 0 > s_hi):
        raise NumericError(f"could not bracket the root (s={s_lo!r} at {lo}, {s_hi!r} at {hi})",
                           residual=min(abs(s_lo), abs(s_hi)))
    mid, s_mid = hi, s_hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        s_mid = s(mid)
        if abs(s_mid) <= tol:
            return mid
        if s_mid > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    raise NumericError(f"bisection stalled with |s| = {abs(s_mid):.3e} > {tol:.3e}",
                       residual=abs(s_mid), mu=mid)


# ---------------------------------------------------------------------------
# discrete-time mixing
# ---------------------------------------------------------------------------


def _check_stochastic(P: np.ndarray) -> None:
    if np.any(P < 0):
        raise ValidationError("negative entry", "P")
    sums = P.sum(axis=0)
    if np.any(np.abs(sums - 1.0) > 1e-12 * P.shape[0]):
        j = int(np.argmax(np.abs(sums - 1.0)))
        raise ValidationError(f"column {j} sums to {sums[j]!r}, not 1", "P")
    if not strongly_connected(P):
        raise StructureError("matrix is reducible", "P")


def karlin_map(P, R, mu: float, tol: float = DEFAULT_TOL) -> float:
    """Spectral radius of ``((1-mu) I + mu P) R``."""
    P = as_square(P, "P")
    _check_stochastic(P)
    r = as_diag(R, P.shape[0], "R")
    if not np.all(r > 0):
        raise DomainError("growth factors must be positive", "R")
    if not 0 < mu < 1:
        raise DomainError(f"mu must lie in (0, 1), got {mu!r}", "mu")
    n = P.shape[0]
    mixed = ((1.0 - mu) * np.eye(n) + mu * P) * r[None, :]
    return principal_eigen(mixed, tol).value
