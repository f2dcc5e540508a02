"""Full reconstruction: pick a window, solve the dual, test the tail, grow, repeat."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .dual import (
    DualOverflowError,
    LagrangeMultipliers,
    SolverConfig,
    SolverDiverged,
    SolverReport,
    distribution_from,
    minimize,
)
from .moments import FiniteDistribution, MomentSequence, SupportWindow, moments_of
from .support import (
    SupportConfig,
    chebyshev_radius,
    extend_block,
    extend_one,
    initial_window,
    tail_ok,
)

log = logging.getLogger(__name__)


class ReconstructionError(RuntimeError):
    pass


class WindowCapReached(ReconstructionError):
    """The window hit ``max_window`` before the tail test passed.

    The best result so far is available as ``.result``.
    """

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class SolveRecord:
    window: SupportWindow
    report: SolverReport
    warm_start: bool


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    distribution: FiniteDistribution
    multipliers: LagrangeMultipliers
    window: SupportWindow
    report: SolverReport
    outer_iterations: int
    achieved_moments: MomentSequence
    tail_ok: bool
    solves: tuple = ()

    @property
    def converged(self) -> bool:
        return self.report.converged


def _grow(D: SupportWindow, step: int, scfg: SupportConfig, block: float | None) -> SupportWindow:
    if scfg.strategy == "chebyshev":
        return extend_block(D, block)
    return extend_one(D, step, literal=scfg.literal_eq9)


def reconstruct(
    mu: MomentSequence,
    scfg: SupportConfig | None = None,
    dcfg: SolverConfig | None = None,
) -> ReconstructionResult:
    """Reconstruct a distribution on the non-negative integers from ``mu``.

    Each window is solved to convergence; a converged solution warm-starts the
    next window, anything else restarts from zero. The loop stops at the first
    window whose solve converged and whose distribution passes
    :func:`~maxent_moments.support.tail_ok`. If the dual solver diverges
    the window is grown once and the solve retried before giving up.

    Raises
    ------
    WindowCapReached
        The window reached ``scfg.max_window`` states with the tail test still
        failing; ``exc.result`` holds the last reconstruction.
    SolverDiverged, DualOverflowError
        The solver failed on two consecutive windows.
    """
    scfg = scfg or SupportConfig()
    dcfg = dcfg or SolverConfig()
    if mu.order < 1:
        raise ValueError("reconstruction needs at least the first moment")
    M = mu.order

    D = initial_window(mu, scfg)
    block = None
    if scfg.strategy == "chebyshev":
        if M < 2:
            raise ValueError("the chebyshev strategy needs mu_2")
        # never let the block size collapse to zero
        block = max(abs(chebyshev_radius(mu, scfg) - D.right), 2.0)

    lam0 = None
    step = 0
    outer = 0
    solves = []
    failed_once = False
    current = None  # (window, multipliers, report, distribution)

    while True:
        if current is None or current[0] != D:
            try:
                lm, rep = minimize(mu, D, dcfg, lam0)
            except (SolverDiverged, DualOverflowError) as exc:
                if failed_once:
                    raise
                log.info("solver failed on %s (%s); growing and restarting", D, exc)
                failed_once = True
                lam0 = None
                D = _grow(D, step, scfg, block)
                step += 1
                continue
            failed_once = False
            solves.append(SolveRecord(D, rep, lam0 is not None))
            current = (D, lm, rep, distribution_from(lm, D))
            lam0 = lm.lam if rep.converged else None
            log.debug("window %s: %s after %d iterations", D, rep.status, rep.iterations)

        outer += 1
        W, lm, rep, q = current
        # a solve that did not converge says the window cannot carry the
        # moments yet, whatever its edge probabilities look like
        passed = rep.converged and tail_ok(q, scfg)
        result = ReconstructionResult(
            distribution=q,
            multipliers=lm,
            window=W,
            report=rep,
            outer_iterations=outer,
            achieved_moments=moments_of(q, M),
            tail_ok=passed,
            solves=tuple(solves),
        )
        if passed:
            return result
        nxt = _grow(W, step, scfg, block)
        step += 1
        if nxt.size > scfg.max_window:
            raise WindowCapReached(
                f"window cap reached at {W} ({W.size} states)", result
            )
        D = nxt


def max_relative_moment_error(result: ReconstructionResult, mu: MomentSequence) -> float:
    """Largest ``|achieved_k - mu_k| / |mu_k|`` over ``k = 1..M`` (absolute when ``mu_k = 0``)."""
    worst = 0.0
    for k in range(1, mu.order + 1):
        a, t = result.achieved_moments[k], mu[k]
        worst = max(worst, abs(a - t) / abs(t) if t else abs(a - t))
    return worst
