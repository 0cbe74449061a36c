"""Adaptive Dormand-Prince 5(4) integration and equilibrium detection.

The stepping loop lives in :mod:`specmono.kernels`. Systems built from the
packed model layout (:class:`PackedSystem`) run through the compiled loop;
any other Python callable ``rhs(t, y)`` runs through the same loop as plain
Python.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import kernels
from .errors import ValidationError


TOL_FLOOR = 1e-13


class Termination(enum.Enum):
    REACHED_T_END = "reached_t_end"
    CONVERGED = "converged"
    STEP_FAILURE = "step_failure"


_STATUS = {
    kernels.STATUS_REACHED: Termination.REACHED_T_END,
    kernels.STATUS_CONVERGED: Termination.CONVERGED,
    kernels.STATUS_FAILED: Termination.STEP_FAILURE,
}


@dataclass(frozen=True)
class IntegratorConfig:
    """Step control settings.

    ``nonnegative`` turns on the orthant guard: components that dip below zero
    by at most ``abs_tol`` are clamped, deeper dips reject the step. Switch it
    off for systems whose solutions legitimately change sign.
    ``time_cap`` and ``first_window`` only matter for equilibrium searches.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_steps: int = 1_000_000
    convergence_norm_tol: float = 1e-10
    nonnegative: bool = True
    time_cap: float = 1e6
    first_window: float = 1.0

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "convergence_norm_tol", "time_cap", "first_window"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValidationError(f"must be positive and finite, got {val!r}", name)
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ValidationError(f"must be a positive integer, got {self.max_steps!r}",
                                  "max_steps")


@dataclass(frozen=True)
class Trajectory:
    """Accepted steps of one integration.

    ``times`` is strictly monotone in the direction of integration.
    """

    times: np.ndarray
    states: np.ndarray
    termination: Termination
    converged_at: float | None = None
    steps: int = 0
    rejected: int = 0
    clamps: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def ok(self) -> bool:
        return self.termination is not Termination.STEP_FAILURE

    def at(self, t: float) -> np.ndarray:
        """Linear interpolation between accepted steps."""
        ts = self.times
        if ts[0] > ts[-1]:
            ts, ys = ts[::-1], self.states[::-1]
        else:
            ys = self.states
        if not ts[0] <= t <= ts[-1]:
            raise ValidationError(f"t = {t!r} outside [{ts[0]}, {ts[-1]}]", "t")
        k = int(np.searchsorted(ts, t, side="right")) - 1
        if k >= ts.size - 1:
            return ys[-1].copy()
        lam = (t - ts[k]) / (ts[k + 1] - ts[k])
        return (1 - lam) * ys[k] + lam * ys[k + 1]


class PackedSystem:
    """A right-hand side stored in the packed kernel layout.

    Calling it evaluates the same function the compiled integrator uses.
    """

    def __init__(self, args, n: int):
        self.args = args
        self.n = n

    def __call__(self, t: float, y) -> np.ndarray:
        return kernels.packed_rhs(float(t), np.asarray(y, dtype=float), self.args)


def linear_system(M) -> PackedSystem:
    """``y' = M y``."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    return PackedSystem(kernels.pack(kernels.LINEAR, mats=[M], n=n), n)


def _generic(rhs: Callable) -> Callable:
    def f(t, y, _args):
        return np.asarray(rhs(t, y), dtype=float)

    return f


def _run(rhs, y0, t0, t1, cfg: IntegratorConfig, stop_tol: float, record: bool):
    y0 = np.array(y0, dtype=float).reshape(-1)
    if not np.all(np.isfinite(y0)):
        raise ValidationError("initial state must be finite", "y0")
    common = (float(cfg.rel_tol), float(cfg.abs_tol), 0.0, int(cfg.max_steps),
              bool(cfg.nonnegative), float(stop_tol), bool(record))
    if isinstance(rhs, PackedSystem):
        if y0.size != rhs.n * (1 if rhs.args[0] in (kernels.SINGLE, kernels.LINEAR) else 2):
            raise ValidationError(f"state has {y0.size} entries, system expects otherwise",
                                  "y0")
        out = kernels.dopri_packed(rhs.args, float(t0), y0, float(t1), *common)
    else:
        out = kernels.dopri_generic(_generic(rhs), None, float(t0), y0, float(t1), *common)
    return out


def integrate(rhs, y0, t_span: tuple[float, float], cfg: IntegratorConfig | None = None,
              record: bool = True, stop_on_convergence: bool = False) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` over ``t_span``.

    Running out of ``max_steps`` is reported through ``termination`` with the
    partial trajectory, not raised. With ``record=False`` only the first and
    last states are kept.
    """
    cfg = cfg or IntegratorConfig()
    t0, t1 = (float(t) for t in t_span)
    if not (np.isfinite(t0) and np.isfinite(t1)):
        raise ValidationError("time span must be finite", "t_span")
    stop = cfg.convergence_norm_tol if stop_on_convergence else 0.0
    ts, ys, status, nst, nrej, ncl, conv_t = _run(rhs, y0, t0, t1, cfg, stop, record)
    term = _STATUS[int(status)]
    return Trajectory(ts, ys, term, float(conv_t) if term is Termination.CONVERGED else None,
                      int(nst), int(nrej), int(ncl))


class Equilibrium(NamedTuple):
    state: np.ndarray
    trajectory: Trajectory

    @property
    def converged(self) -> bool:
        return self.trajectory.termination is Termination.CONVERGED


def integrate_to_equilibrium(rhs, y0, cfg: IntegratorConfig | None = None,
                             t0: float = 0.0) -> Equilibrium:
    """Integrate over windows of doubling length until ``|rhs(y)|_inf`` is small.

    Stops at ``cfg.time_cap`` without raising; check :attr:`Equilibrium.converged`.
    The returned trajectory holds the window endpoints.

    Near a stable equilibrium an explicit method runs at its stability limit
    and the step controller parks the state about one tolerance away from
    the rest point. Each unconverged window therefore tightens both
    tolerances fourfold (down to ``TOL_FLOOR``); the stability-limited step
    size barely changes, so this is cheap.
    """
    cfg = cfg or IntegratorConfig()
    y = np.array(y0, dtype=float).reshape(-1)
    times, states = [float(t0)], [y.copy()]
    t, window = float(t0), cfg.first_window
    rtol, atol = cfg.rel_tol, cfg.abs_tol
    steps = rejected = clamps = 0
    term = Termination.REACHED_T_END
    conv_at = None
    while True:
        t_end = min(t + window, t0 + cfg.time_cap)
        budget = IntegratorConfig(rtol, atol, cfg.max_steps - steps,
                                  cfg.convergence_norm_tol, cfg.nonnegative)
        seg = integrate(rhs, y, (t, t_end), budget, record=False, stop_on_convergence=True)
        steps, rejected, clamps = steps + seg.steps, rejected + seg.rejected, clamps + seg.clamps
        if seg.times[-1] != t:
            times.append(float(seg.times[-1]))
            states.append(seg.final.copy())
        t, y = float(seg.times[-1]), seg.final.copy()
        if seg.termination is not Termination.REACHED_T_END:
            term = seg.termination
            conv_at = seg.converged_at
            break
        if t >= t0 + cfg.time_cap or steps >= cfg.max_steps:
            break
        window *= 2.0
        rtol, atol = max(rtol / 4, TOL_FLOOR), max(atol / 4, TOL_FLOOR * 1e-2)
    traj = Trajectory(np.array(times), np.array(states), term, conv_at, steps, rejected, clamps)
    return Equilibrium(y, traj)
