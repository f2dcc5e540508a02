"""Reference computations for checking the dual solver.

Nothing here calls into :mod:`maxent_moments.dual`. The constrained entropy
maximum on a fixed window is found by a primal-dual Newton method on the KKT
system of the *primal* problem, with its own summation; the mean-only case
has a closed form up to a scalar bisection; textbook laws come from
``scipy.stats``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.stats

from .moments import FiniteDistribution, MomentSequence, SupportWindow, moments_of

LAW_KINDS = ("poisson", "binomial", "geometric", "two_point", "uniform")


class InfeasibleOnWindow(ValueError):
    """No distribution on the window reproduces the moments."""


@dataclass(frozen=True)
class ReferenceLaw:
    """A textbook law on the non-negative integers.

    ``params`` per kind: poisson ``(rate,)``; binomial ``(n, p)``; geometric
    ``(p,)`` with pmf ``p (1-p)**x`` on ``x >= 0``; two_point ``(a, b, w)``
    with mass ``w`` at ``a``; uniform ``(lo, hi)``.
    """

    kind: str
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        k, p = self.kind, self.params
        if k == "poisson":
            ok = len(p) == 1 and p[0] > 0
        elif k == "binomial":
            ok = len(p) == 2 and int(p[0]) == p[0] and p[0] >= 0 and 0 <= p[1] <= 1
        elif k == "geometric":
            ok = len(p) == 1 and 0 < p[0] <= 1
        elif k == "two_point":
            ok = len(p) == 3 and 0 <= p[0] and 0 <= p[1] and 0 <= p[2] <= 1
            ok = ok and int(p[0]) == p[0] and int(p[1]) == p[1]
        elif k == "uniform":
            ok = len(p) == 2 and int(p[0]) == p[0] and int(p[1]) == p[1] and 0 <= p[0] <= p[1]
        else:
            raise ValueError(f"unknown law kind {k!r}; expected one of {LAW_KINDS}")
        if not ok:
            raise ValueError(f"invalid parameters {p!r} for {k}")

    def pmf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k, p = self.kind, self.params
        if k == "poisson":
            return scipy.stats.poisson.pmf(x, p[0])
        if k == "binomial":
            return scipy.stats.binom.pmf(x, int(p[0]), p[1])
        if k == "geometric":
            return scipy.stats.geom.pmf(x, p[0], loc=-1)
        if k == "two_point":
            a, b, w = p
            return np.where(x == a, w, 0.0) + np.where(x == b, 1.0 - w, 0.0)
        lo, hi = p
        return np.where((x >= lo) & (x <= hi), 1.0 / (hi - lo + 1), 0.0)

    def truncated(self, window: SupportWindow) -> FiniteDistribution:
        return FiniteDistribution.from_weights(window, self.pmf(window.states()))


def reference_moments(law: ReferenceLaw, window: SupportWindow, order: int) -> MomentSequence:
    """Moments of ``law`` truncated to ``window`` and renormalized."""
    return moments_of(law.truncated(window), order)


def _constraint_system(mu: MomentSequence, D: SupportWindow):
    # Powers of x / s keep every row and right-hand side of order one.
    s = float(max(1, D.right))
    t = D.states() / s
    k = np.arange(mu.order + 1)
    A = t[None, :] ** k[:, None]
    b = mu.values / s**k
    return A, b


def _check_feasible(A, b, tol):
    res = scipy.optimize.linprog(
        np.zeros(A.shape[1]),
        A_eq=A,
        b_eq=b,
        bounds=(0, None),
        method="highs",
    )
    if res.status == 2:
        raise InfeasibleOnWindow("infeasible on window")
    if res.status == 0 and np.max(np.abs(A @ res.x - b)) > 1e3 * tol * max(1.0, np.max(np.abs(b))):
        raise InfeasibleOnWindow("infeasible on window")


def grid_maxent(
    mu: MomentSequence,
    D: SupportWindow,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> FiniteDistribution:
    """Entropy maximizer on ``D`` subject to the moment constraints.

    Infeasible-start Newton iteration on the KKT conditions of
    ``min sum p ln p  s.t.  A p = b``, written in the coordinates
    ``y = ln p`` so that positivity needs no step restriction, with a
    backtracking line search on the residual norm.

    Raises
    ------
    InfeasibleOnWindow
        If a linear feasibility check finds no non-negative solution, or if
        the Newton iteration cannot reach the tolerance (moments on the
        boundary of what the window can realize).
    """
    A, b = _constraint_system(mu, D)
    n = D.size
    _check_feasible(A, b, tol)
    if mu.order == 0:
        return FiniteDistribution.uniform(D)

    y = np.full(n, -math.log(n))
    nu = np.zeros(A.shape[0])

    def residual(y, nu):
        with np.errstate(over="ignore", invalid="ignore"):
            return np.concatenate([1.0 + y + A.T @ nu, A @ np.exp(y) - b])

    r = residual(y, nu)
    for _ in range(max_iter):
        if np.max(np.abs(r)) <= tol:
            break
        p = np.exp(y)
        # eliminate dy = -(r_dual + A^T dnu); least squares covers
        # constraint sets that are dependent on a short window
        S = (A * p) @ A.T
        rhs = r[n:] - A @ (p * r[:n])
        dnu = scipy.linalg.lstsq(S, rhs)[0]
        dy = -(r[:n] + A.T @ dnu)
        rnorm = np.linalg.norm(r)
        step = 1.0
        while True:
            r_new = residual(y + step * dy, nu + step * dnu)
            if np.all(np.isfinite(r_new)) and np.linalg.norm(r_new) <= (1 - 0.01 * step) * rnorm:
                break
            step *= 0.5
            if step < 1e-14:
                raise InfeasibleOnWindow(
                    "entropy maximization stalled; moments may lie on the "
                    "boundary of what the window can realize"
                )
        y, nu, r = y + step * dy, nu + step * dnu, r_new
    else:
        raise InfeasibleOnWindow(
            "entropy maximization did not converge; moments may lie on the "
            "boundary of what the window can realize"
        )
    p = np.exp(y)
    if np.max(np.abs(A @ p - b)) > 1e-8 * max(1.0, float(np.max(np.abs(b)))):
        raise InfeasibleOnWindow("infeasible on window")
    return FiniteDistribution.from_weights(D, p)


def geometric_ratio(mu1: float, D: SupportWindow, xtol: float = 1e-12) -> float:
    """Ratio ``r`` such that ``q(x) ∝ r**x`` on ``{0..x_R}`` has mean ``mu1``."""
    if D.left != 0:
        raise ValueError("closed form needs a window starting at 0")
    if not 0 < mu1 < D.right:
        raise InfeasibleOnWindow(f"mean {mu1!r} is not inside (0, {D.right})")
    x = np.arange(D.right + 1, dtype=float)

    def mean_gap(s):
        # weights r**x = exp(s x), shifted for range
        e = s * x
        w = np.exp(e - e.max())
        return float(np.dot(x, w) / np.sum(w)) - mu1

    lo, hi = -1.0, 1.0
    while mean_gap(lo) > 0:
        lo *= 2
    while mean_gap(hi) < 0:
        hi *= 2
    s = scipy.optimize.bisect(mean_gap, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)
    return math.exp(s)


def analytic_m1(mu1: float, D: SupportWindow) -> FiniteDistribution:
    """Maximum entropy law on ``{0..x_R}`` with mean ``mu1``: a truncated geometric."""
    r = geometric_ratio(mu1, D)
    x = np.arange(D.right + 1, dtype=float)
    logw = x * math.log(r)
    return FiniteDistribution.from_weights(D, np.exp(logw - logw.max()))


def feasible_perturbations(
    dist: FiniteDistribution,
    order: int,
    count: int,
    rng: np.random.Generator,
    max_fraction: float = 1.0,
) -> list[FiniteDistribution]:
    """Random tables on ``dist.window`` with the same moments up to ``order``.

    Each one is ``p + t d`` with ``d`` a random direction in the null space of
    the moment map and ``t`` drawn so that all entries stay non-negative.
    """
    D = dist.window
    A, _ = _constraint_system(MomentSequence(np.ones(order + 1)), D)
    N = scipy.linalg.null_space(A)
    if N.shape[1] == 0:
        return []
    p = dist.probs
    out = []
    for _ in range(count):
        d = N @ rng.standard_normal(N.shape[1])
        neg = d < 0
        t_max = float(np.min(-p[neg] / d[neg])) if np.any(neg) else 1.0
        t = rng.uniform(0.0, max_fraction) * t_max
        q = np.clip(p + t * d, 0.0, None)
        out.append(FiniteDistribution(D, q / math.fsum(q)))
    return out
