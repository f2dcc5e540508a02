"""Dual function of the moment-constrained maximum entropy problem.

On a finite window ``D`` the maximum entropy law has the exponential form
``q(x) = exp(-sum_k lam_k x**k) / Z`` and the multipliers minimize

    Psi(lam) = ln Z(lam) + sum_k lam_k mu_k,

a smooth convex function whose gradient is ``mu - E_q[x**k]`` and whose
Hessian is the covariance of ``(x, x**2, ..., x**M)`` under ``q``. The
minimization uses Levenberg-Marquardt damping ``H + gamma * diag(H)``.

All sums are formed from log-domain weights shifted by their maximum, so only
the ratios ``mu~_i / Z`` are ever needed in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .moments import FiniteDistribution, MomentSequence, SupportWindow
from .numerics import SingularSystemError, solve_damped


class SolverDiverged(RuntimeError):
    """Damping grew past its ceiling without finding a step that lowers the dual."""


class DualOverflowError(OverflowError):
    """A power sum or the dual value is not representable even after shifting."""


@dataclass(frozen=True, eq=False)
class LagrangeMultipliers:
    """Multipliers ``lam_1..lam_M`` with ``lambda0 = ln Z - 1`` and ``log_z = ln Z``."""

    lam: np.ndarray
    lambda0: float
    log_z: float

    def __post_init__(self):
        lam = np.array(self.lam, dtype=float).reshape(-1)
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)

    @property
    def order(self) -> int:
        return self.lam.size


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and damping schedule for :func:`minimize`."""

    delta_lambda: float = 1e-8
    gamma0: float = 1e-3
    gamma_raise: float = 2.0
    gamma_lower: float = 3.0
    max_iters: int = 500
    gamma_max: float = 1e12

    def __post_init__(self):
        if not self.delta_lambda > 0:
            raise ValueError("delta_lambda must be > 0")
        if not self.gamma0 > 0:
            raise ValueError("gamma0 must be > 0")
        if not self.gamma_raise > 1 or not self.gamma_lower > 1:
            raise ValueError("gamma_raise and gamma_lower must be > 1")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError("max_iters must be an integer >= 1")


@dataclass(frozen=True)
class SolverReport:
    converged: bool
    iterations: int
    final_gradient_norm: float
    dual_trace: tuple = field(default=(), repr=False)
    status: str = ""
    gamma: float = float("nan")


# Damping never drops below this; keeps recovery after a rejection short.
_GAMMA_FLOOR = 1e-12


def _as_lambda(lam) -> np.ndarray:
    if isinstance(lam, LagrangeMultipliers):
        return lam.lam
    return np.atleast_1d(np.asarray(lam, dtype=float))


def _as_moments(mu) -> np.ndarray:
    if isinstance(mu, MomentSequence):
        return mu.values
    return np.asarray(mu, dtype=float)


def _exponent(lam: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``-sum_k lam_k x**k`` by Horner's rule."""
    acc = np.zeros_like(x)
    for c in lam[::-1]:
        acc = (acc + c) * x
    return -acc


@dataclass(frozen=True, eq=False)
class _WindowState:
    """Normalized moments ``E_q[x**i]`` and ``ln Z`` at one multiplier vector."""

    x: np.ndarray
    p: np.ndarray
    log_z: float
    shift: float
    scaled_sums: np.ndarray  # sum_x x**i exp(exponent - shift)


def _state(lam, D: SupportWindow, max_order: int) -> _WindowState:
    lam = _as_lambda(lam)
    x = D.states()
    with np.errstate(over="ignore", invalid="ignore"):
        e = _exponent(lam, x)
    if not np.all(np.isfinite(e)):
        raise DualOverflowError("exponent not finite on the window")
    shift = float(e.max())
    w = np.exp(e - shift)
    powers = x[None, :] ** np.arange(max_order + 1)[:, None]
    sums = powers @ w
    total = math.fsum(w)
    return _WindowState(x, w / total, shift + math.log(total), shift, sums)


def power_sums(lam, D: SupportWindow, max_order: int) -> np.ndarray:
    """Truncated sums ``sum_{x in D} x**i exp(-sum_k lam_k x**k)`` for ``i = 0..max_order``.

    Entry 0 is the partition function restricted to ``D``.

    Raises
    ------
    DualOverflowError
        If a sum exceeds double range even though the terms were shifted.
    """
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    st = _state(lam, D, max_order)
    with np.errstate(over="ignore"):
        out = st.scaled_sums * np.exp(st.shift)
    if not np.all(np.isfinite(out)):
        raise DualOverflowError(f"power sums overflow (ln Z = {st.log_z:.6g})")
    return out


def _normalized_moments(st: _WindowState, max_order: int) -> np.ndarray:
    return np.array(
        [math.fsum(st.p * st.x**i) for i in range(max_order + 1)]
    )


def evaluate_dual(lam, D: SupportWindow, mu) -> float:
    """``Psi(lam) = ln Z + sum_k lam_k mu_k`` with ``Z`` summed over ``D``."""
    lam = _as_lambda(lam)
    m = _as_moments(mu)
    _check_orders(lam, m)
    st = _state(lam, D, 0)
    val = st.log_z + math.fsum(lam * m[1:])
    if not math.isfinite(val):
        raise DualOverflowError("dual value not finite")
    return val


def _check_orders(lam, m):
    if lam.size != m.size - 1:
        raise ValueError(
            f"{lam.size} multipliers given for a moment sequence of order {m.size - 1}"
        )


def gradient(lam, D: SupportWindow, mu) -> np.ndarray:
    """``dPsi/dlam_i = mu_i - mu~_i / Z`` for ``i = 1..M``."""
    lam = _as_lambda(lam)
    m = _as_moments(mu)
    _check_orders(lam, m)
    M = lam.size
    st = _state(lam, D, 0)
    return m[1:] - _normalized_moments(st, M)[1:]


def _covariance(st: _WindowState, M: int) -> np.ndarray:
    # Centered form of (Z mu~_{i+j} - mu~_i mu~_j) / Z**2; avoids the cancellation.
    F = st.x[None, :] ** np.arange(1, M + 1)[:, None]
    mean = F @ st.p
    C = F - mean[:, None]
    H = (C * st.p) @ C.T
    return 0.5 * (H + H.T)


def hessian(lam, D: SupportWindow) -> np.ndarray:
    """Covariance matrix of ``(x, ..., x**M)`` under the exponential law on ``D``."""
    lam = _as_lambda(lam)
    st = _state(lam, D, 0)
    return _covariance(st, lam.size)


def lm_step(lam, g, H, gamma: float) -> np.ndarray:
    """One damped Newton update ``lam - (H + gamma diag(H))^{-1} g``."""
    lam = _as_lambda(lam)
    return lam - solve_damped(H, gamma, g)


def multipliers(lam, D: SupportWindow) -> LagrangeMultipliers:
    lam = _as_lambda(lam)
    st = _state(lam, D, 0)
    return LagrangeMultipliers(lam, st.log_z - 1.0, st.log_z)


def distribution_from(lm, D: SupportWindow) -> FiniteDistribution:
    """Exponential-family table ``q(x) ∝ exp(-sum_k lam_k x**k)`` on ``D``."""
    st = _state(_as_lambda(lm), D, 0)
    return FiniteDistribution.from_weights(D, st.p)


def minimize(
    mu,
    D: SupportWindow,
    cfg: SolverConfig | None = None,
    lam0=None,
) -> tuple[LagrangeMultipliers, SolverReport]:
    """Minimize the dual on ``D`` with Levenberg-Marquardt damping.

    A trial step is accepted only if it lowers ``Psi``; then the damping is
    divided by ``cfg.gamma_lower``, otherwise multiplied by ``cfg.gamma_raise``.
    Iteration stops once a step has max-norm below ``cfg.delta_lambda`` and
    every moment is matched to ``10 * delta_lambda`` relative to
    ``max(1, |mu_i|)``.

    Parameters
    ----------
    mu : MomentSequence
        Target moments ``mu_0..mu_M``.
    D : SupportWindow
        Window the sums are truncated to.
    cfg : SolverConfig, optional
    lam0 : array_like, optional
        Starting multipliers, zeros by default.

    Returns
    -------
    LagrangeMultipliers, SolverReport
        ``report.converged`` is False when ``max_iters`` ran out, or when the
        dual became flat to rounding before the moments were matched
        (``status == "stalled"``).

    Raises
    ------
    SolverDiverged
        If the damping exceeds ``cfg.gamma_max`` with no acceptable step.
    DualOverflowError
        If the starting point itself cannot be evaluated.
    """
    cfg = cfg or SolverConfig()
    m = _as_moments(mu)
    M = m.size - 1
    lam = np.zeros(M) if lam0 is None else np.array(_as_lambda(lam0), dtype=float)
    _check_orders(lam, m)
    # moments must match to 10 * delta_lambda, relative to max(1, |mu_i|)
    gtol = 10 * cfg.delta_lambda * np.maximum(np.abs(m[1:]), 1.0)

    def state_at(v):
        st = _state(v, D, 0)
        psi = st.log_z + math.fsum(v * m[1:])
        if not math.isfinite(psi):
            raise DualOverflowError("dual value not finite")
        return st, psi

    st, psi = state_at(lam)
    trace = [psi]
    gamma = cfg.gamma0
    status = "max_iters"
    converged = False
    it = 0

    if M == 0:
        return multipliers(lam, D), SolverReport(True, 0, 0.0, tuple(trace), "converged", gamma)

    g = m[1:] - _normalized_moments(st, M)[1:]
    while it < cfg.max_iters:
        it += 1
        H = _covariance(st, M)
        if np.all(np.diag(H) <= 0):
            # single-state window: no curvature, nothing to move
            converged = bool(np.all(np.abs(g) <= gtol))
            status = "converged" if converged else "degenerate"
            break
        try:
            step = solve_damped(H, gamma, g)
        except SingularSystemError:
            gamma *= cfg.gamma_raise
            if gamma > cfg.gamma_max:
                raise SolverDiverged(f"damping exceeded {cfg.gamma_max:g} (singular system)")
            continue
        small = float(np.max(np.abs(step))) < cfg.delta_lambda
        cand = lam - step
        try:
            st_c, psi_c = state_at(cand)
        except DualOverflowError:
            st_c, psi_c = None, math.inf
        if psi_c < psi:
            lam, st, psi = cand, st_c, psi_c
            trace.append(psi)
            g = m[1:] - _normalized_moments(st, M)[1:]
            gamma = max(gamma / cfg.gamma_lower, _GAMMA_FLOOR)
            if small and np.all(np.abs(g) <= gtol):
                converged, status = True, "converged"
                break
            continue
        if small and np.all(np.abs(g) <= gtol):
            # already within tolerance; the last step is below rounding of Psi
            converged, status = True, "converged"
            break
        if psi_c - psi <= 16 * np.finfo(float).eps * max(1.0, abs(psi)):
            converged = bool(np.all(np.abs(g) <= gtol))
            status = "converged" if converged else "stalled"
            break
        gamma *= cfg.gamma_raise
        if gamma > cfg.gamma_max:
            raise SolverDiverged(
                f"damping exceeded {cfg.gamma_max:g} after {it} iterations"
            )

    report = SolverReport(
        converged=converged,
        iterations=it,
        final_gradient_norm=float(np.max(np.abs(g))),
        dual_trace=tuple(trace),
        status=status,
        gamma=gamma,
    )
    return LagrangeMultipliers(lam, st.log_z - 1.0, st.log_z), report
