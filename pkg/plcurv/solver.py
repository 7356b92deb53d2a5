"""Constant-curvature uniformization and one-parameter family scans.

``uniformize`` runs a gauge-fixed modified Newton method on F (or on E when
chi = 0). ``scan_objective`` and ``find_roots`` sample and bracket zeros of a
scalar function of one parameter, as used for the counterexample families.
"""

import asyncio
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.linalg import eigh, null_space
from scipy.optimize import bisect

from .conformal import CurvatureReport, DiscreteMetric, FlipLimitError, as_conformal_factor
from .energy import AreaUnderflowError, EnergyEval, conformal_state, objective_eval
from .geometry import DegenerateTriangleError
from .logging import get_logger, log_with_context
from .surface import FlipError, MarkedSurface

logger = get_logger(__name__)

__all__ = [
    'Gauge', 'SolverOptions', 'SolveResult', 'LineSearchError', 'DivergenceError',
    'ScanError', 'gauge_basis', 'newton_direction', 'uniformize', 'scan_objective',
    'find_roots',
]

# Failures of a trial point that the line search answers by shortening the step.
_TRIAL_FAILURES = (DegenerateTriangleError, FlipLimitError, FlipError, AreaUnderflowError)


class Gauge(str, Enum):
    SUM_ZERO = 'sum-zero'
    PIN = 'pin'


class LineSearchError(RuntimeError):
    """Backtracking shrank the step below the minimum without sufficient decrease."""


class DivergenceError(RuntimeError):
    """Iterate left the box |u| <= divergence_bound."""


class ScanError(RuntimeError):
    """Family evaluation failed at a grid point."""


class SolverOptions(BaseModel):
    """Newton solver settings"""

    grad_tol: float = Field(default=1e-10, gt=0, description="Stop when |grad|_inf <= grad_tol")
    max_iter: int = Field(default=200, ge=1, description="Newton iteration limit")
    gauge: Gauge = Field(default=Gauge.SUM_ZERO, description="How the shift direction (1,...,1) is removed")
    init: Optional[List[float]] = Field(default=None, description="Starting conformal factor, zero if omitted")
    trust_damping: float = Field(default=0.0, ge=0, description="Extra multiple of the identity added to the reduced Hessian")
    divergence_bound: float = Field(default=50.0, gt=0, description="Abort when |u|_inf exceeds this")
    armijo: float = Field(default=1e-4, gt=0, lt=1, description="Sufficient-decrease constant")
    min_step: float = Field(default=1e-12, gt=0, description="Smallest accepted line-search step")


@dataclass
class SolveResult:
    u_star: np.ndarray
    report: CurvatureReport
    iterations: int
    converged: bool
    objective_trace: List[float] = field(default_factory=list)
    grad_norm: float = float('nan')

    @property
    def chi(self) -> int:
        return self.report.chi

    @property
    def lagrange_multiplier(self) -> float:
        """pi chi: multiplier of the unit-area constraint at a critical point."""
        return float(np.pi * self.report.chi)

    def curvature_tolerance(self, grad_tol: float) -> float:
        """Bound on |K_i - 2 pi chi| implied by the gradient tolerance at unit area."""
        return 10.0 * grad_tol / float(np.min(self.report.A))


def gauge_basis(n: int, gauge: Gauge) -> np.ndarray:
    """Columns spanning the admissible search directions."""
    if n == 1:
        return np.zeros((1, 0))
    if Gauge(gauge) is Gauge.PIN:
        return np.eye(n)[:, 1:]
    return null_space(np.ones((1, n)))


def newton_direction(ev: EnergyEval, basis: np.ndarray, damping: float = 0.0) -> Tuple[np.ndarray, float]:
    """Newton step on the gauge subspace with the Hessian shifted to positive definite.

    Returns:
        (direction in u-space, shift mu that was added)
    """
    if basis.shape[1] == 0:
        return np.zeros(basis.shape[0]), 0.0
    hess = basis.T @ ev.hessian.toarray() @ basis
    grad = basis.T @ ev.gradient
    eigvals, eigvecs = eigh(0.5 * (hess + hess.T))
    floor = 1e-10 * max(1.0, float(np.max(np.abs(eigvals))))
    mu = max(0.0, floor - float(eigvals[0]))
    step = -eigvecs @ ((eigvecs.T @ grad) / (eigvals + mu + damping))
    return basis @ step, mu


def _report(state) -> CurvatureReport:
    return CurvatureReport(
        W=state.W, A=state.A, K=state.W / state.A, total_area=state.total_area,
        chi=state.chi, flips=state.flips,
    )


def uniformize(s: MarkedSurface, base_m: DiscreteMetric, opts: Optional[SolverOptions] = None) -> SolveResult:
    """
    Find a conformal factor with constant discrete Gaussian curvature.

    Minimizes F = E - pi chi log A_tot (E itself when chi = 0) by Newton
    steps orthogonal to the gauge direction, with eigenvalue-shifted Hessian
    and Armijo backtracking. The result is shifted to unit total area.

    The sufficient-decrease test allows a rounding slack of
    64 eps max(1, |F|): once F is flat to machine precision an accepted step
    may raise it by at most that much, so ``objective_trace`` is
    non-increasing up to the same slack.

    Raises:
        DegenerateTriangleError: the base metric is invalid
        LineSearchError: no acceptable step was found
        DivergenceError: an iterate left the box |u| <= divergence_bound

    Hitting max_iter is not an error; the result then has converged=False.
    """
    opts = opts or SolverOptions()
    base_m.validate(s)
    u = as_conformal_factor(opts.init, s.n_vertices)
    basis = gauge_basis(s.n_vertices, opts.gauge)

    state = conformal_state(s, base_m, u)
    ev = objective_eval(state)
    trace = [ev.value]
    converged = False
    iteration = 0

    while True:
        grad_norm = float(np.max(np.abs(ev.gradient)))
        if grad_norm <= opts.grad_tol:
            converged = True
            break
        if iteration >= opts.max_iter:
            break

        direction, mu = newton_direction(ev, basis, opts.trust_damping)
        slope = float(ev.gradient @ direction)
        slack = 64.0 * np.finfo(float).eps * max(1.0, abs(ev.value))
        t = 1.0
        while True:
            if t < opts.min_step:
                raise LineSearchError(
                    f'Line search failed at iteration {iteration}: step below {opts.min_step:g} '
                    f'(objective {ev.value:.12g}, gradient norm {grad_norm:.3g})'
                )
            trial = u + t * direction
            try:
                trial_state = conformal_state(s, base_m, trial)
                trial_ev = objective_eval(trial_state)
            except _TRIAL_FAILURES as exc:
                log_with_context(logger, 'debug', 'trial point rejected', iteration=iteration, step=t, reason=str(exc))
                t *= 0.5
                continue
            if trial_ev.value <= ev.value + opts.armijo * t * slope + slack:
                break
            t *= 0.5

        u, state, ev = trial, trial_state, trial_ev
        iteration += 1
        trace.append(ev.value)
        log_with_context(
            logger, 'debug', 'newton step', iteration=iteration, objective=ev.value,
            grad_norm=float(np.max(np.abs(ev.gradient))), step=t, shift=mu, flips=state.flips,
        )
        if float(np.max(np.abs(u))) > opts.divergence_bound:
            raise DivergenceError(
                f'|u| = {np.max(np.abs(u)):.3g} exceeds bound {opts.divergence_bound:g} at iteration {iteration}'
            )

    u_star = u - 0.5 * np.log(state.total_area)
    final = conformal_state(s, base_m, u_star)
    log_with_context(
        logger, 'info', 'uniformize finished', converged=converged, iterations=iteration,
        grad_norm=grad_norm, chi=s.chi,
    )
    return SolveResult(
        u_star=u_star,
        report=_report(final),
        iterations=iteration,
        converged=converged,
        objective_trace=trace,
        grad_norm=grad_norm,
    )


async def _evaluate_concurrently(fn: Callable[[float], float], grid: Sequence[float], workers: int) -> List[float]:
    semaphore = asyncio.Semaphore(workers)

    async def evaluate(v: float) -> float:
        async with semaphore:
            return await asyncio.to_thread(fn, v)

    return await asyncio.gather(*(evaluate(v) for v in grid))


def _guarded(fn: Callable[[float], float]) -> Callable[[float], float]:
    def evaluate(v: float) -> float:
        try:
            return float(fn(v))
        except Exception as exc:
            raise ScanError(f'Evaluation failed at v = {v!r}: {exc}') from exc
    return evaluate


def scan_objective(
    family_eval: Callable[[float], float],
    interval: Tuple[float, float],
    samples: int,
    workers: int = 1,
) -> List[Tuple[float, float]]:
    """
    Evaluate family_eval on a uniform grid over the closed interval.

    Args:
        family_eval: scalar function of the family parameter
        interval: (lo, hi), both endpoints are sampled
        samples: grid size, at least 2
        workers: concurrent evaluations; rows always come back in grid order

    Raises:
        ScanError: evaluation failed at some grid point
    """
    if samples < 2:
        raise ValueError(f'Need at least 2 samples, got {samples}')
    lo, hi = (float(x) for x in interval)
    grid = np.linspace(lo, hi, int(samples)).tolist()
    evaluate = _guarded(family_eval)
    if workers > 1:
        values = asyncio.run(_evaluate_concurrently(evaluate, grid, workers))
    else:
        values = [evaluate(v) for v in grid]
    log_with_context(logger, 'debug', 'scan finished', samples=samples, lo=lo, hi=hi)
    return list(zip(grid, values))


def find_roots(
    family_eval: Callable[[float], float],
    interval: Tuple[float, float],
    samples: int,
    root_tol: float = 1e-12,
    workers: int = 1,
) -> List[float]:
    """
    Zeros of family_eval on the interval, sorted.

    Grid values that vanish up to rounding count as roots; every sign change
    between neighbouring samples is refined by bisection to root_tol. Roots
    of even multiplicity that do not reach a grid point are missed.
    """
    if not root_tol > 0:
        raise ValueError(f'root_tol must be positive, got {root_tol}')
    rows = scan_objective(family_eval, interval, samples, workers)
    grid = np.array([r[0] for r in rows])
    values = np.array([r[1] for r in rows])
    zero = np.abs(values) <= 1e-12 * max(1.0, float(np.max(np.abs(values))))

    roots = grid[zero].tolist()
    evaluate = _guarded(family_eval)
    for i in range(len(grid) - 1):
        if zero[i] or zero[i + 1] or values[i] * values[i + 1] > 0:
            continue
        roots.append(bisect(evaluate, grid[i], grid[i + 1], xtol=root_tol, maxiter=200))

    snapped = sorted(0.0 if abs(r) <= root_tol else float(r) for r in roots)
    log_with_context(logger, 'debug', 'roots found', count=len(snapped))
    return snapped
