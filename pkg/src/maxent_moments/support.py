"""Choosing and growing the finite window the dual sums run over.

The first window comes from the roots of bordered Hankel determinants of the
moments: for a law supported on ``k`` points and ``2k`` known moments these
roots are exactly the support points, and in general they are the nodes of
the ``k``-point Gauss quadrature of the moment functional, which bracket the
bulk of the mass. Growth is either one state at a time, alternating between
the edges, or in blocks sized by a Chebyshev-type radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .moments import FiniteDistribution, MomentSequence, SupportWindow
from .numerics import InsufficientRealRoots, PolyCoeffs, determinant, real_simple_roots

STRATEGIES = ("incremental", "chebyshev")
CHEBYSHEV_VARIANTS = ("printed", "standard")


class DegeneratePolynomial(ArithmeticError):
    """Every coefficient of a determinant polynomial vanishes (singular moment matrix)."""


@dataclass(frozen=True)
class SupportConfig:
    """Settings for the window search.

    ``literal_eq9`` keeps the left edge fixed on even steps instead of moving it
    down by one. ``chebyshev_variant="standard"`` uses the usual variance bound
    ``z = sqrt(var / xi)`` in place of ``z = mu_2 / xi``.
    """

    delta_prob: float = 1e-3
    xi: float = 0.1
    strategy: str = "incremental"
    max_window: int = 100_000
    both_ends: bool = False
    literal_eq9: bool = False
    chebyshev_variant: str = "printed"
    root_tol: float = 1e-8

    def __post_init__(self):
        if not 0 < self.delta_prob < 1:
            raise ValueError("delta_prob must lie in (0, 1)")
        if not 0 < self.xi < 1:
            raise ValueError("xi must lie in (0, 1)")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.chebyshev_variant not in CHEBYSHEV_VARIANTS:
            raise ValueError(f"chebyshev_variant must be one of {CHEBYSHEV_VARIANTS}")
        if int(self.max_window) != self.max_window or self.max_window < 1:
            raise ValueError("max_window must be an integer >= 1")


def _bordered_polynomial(rows: np.ndarray) -> PolyCoeffs:
    """Expand ``det([rows; 1, w, ..., w**n])`` along its last row.

    ``rows`` has shape ``(n, n + 1)``. The coefficient of ``w**j`` is the signed
    minor obtained by deleting the last row and column ``j``.
    """
    n = rows.shape[0]
    coeffs = np.array(
        [(-1) ** (n + j) * determinant(np.delete(rows, j, axis=1)) for j in range(n + 1)]
    )
    # Hadamard's bound on the minors gives the scale for "numerically zero".
    bound = float(np.prod(np.linalg.norm(rows, axis=1))) if n else 1.0
    coeffs[np.abs(coeffs) <= 1e-12 * bound] = 0.0
    if not np.any(coeffs):
        raise DegeneratePolynomial("determinant polynomial vanishes identically")
    poly = PolyCoeffs(coeffs)

    # cross-check the expansion against direct determinants
    pts = np.linspace(-1.0, 1.0, n + 1) * (1.0 + np.abs(rows).max())
    for w in pts:
        border = w ** np.arange(n + 1)
        direct = determinant(np.vstack([rows, border]))
        tol = 1e-9 * bound * np.linalg.norm(border)
        if abs(direct - poly(w)) > tol:
            raise ArithmeticError(
                f"cofactor expansion disagrees with the determinant at w={w:g}"
            )
    return poly


def delta0_polynomial(mu: MomentSequence) -> PolyCoeffs:
    """Bordered Hankel determinant in ``w`` of degree ``k = M // 2``.

    The top ``k`` rows are ``(mu_r, ..., mu_{r+k})`` for ``r = 0..k-1``.
    """
    M = mu.order
    if M < 2:
        raise ValueError("need at least two moments beyond mu_0")
    k = M // 2
    m = mu.values
    rows = np.array([[m[r + j] for j in range(k + 1)] for r in range(k)])
    return _bordered_polynomial(rows)


def delta1_polynomial(mu: MomentSequence, w1: float) -> PolyCoeffs:
    """Bordered determinant of the moments shifted by ``w1``, for odd ``M``.

    With ``z = M // 2 + 1`` the top ``z - 1`` rows are
    ``(mu_{r+1+j} - w1 * mu_{r+j})`` for ``j = 0..z-1``; the polynomial in
    ``eta`` has degree ``z - 1``.
    """
    M = mu.order
    if M % 2 != 1 or M < 3:
        raise ValueError("delta1_polynomial needs an odd order M >= 3")
    z = M // 2 + 1
    m = mu.values
    rows = np.array(
        [[m[r + 1 + j] - w1 * m[r + j] for j in range(z)] for r in range(z - 1)]
    )
    return _bordered_polynomial(rows)


def _simple_roots(poly: PolyCoeffs, tol: float) -> np.ndarray:
    if poly.degree < 1:
        raise InsufficientRealRoots("polynomial reduced to a constant")
    roots, simple = real_simple_roots(poly, tol)
    if not np.all(simple):
        raise InsufficientRealRoots("repeated root")
    return roots


def delta_roots(mu: MomentSequence, tol: float = 1e-8):
    """Roots used for the first window.

    Returns ``(w_roots, eta_roots)``; ``eta_roots`` is empty for even ``M``.

    Raises
    ------
    DegeneratePolynomial, InsufficientRealRoots
        When the roots are not all real and simple.
    """
    w = _simple_roots(delta0_polynomial(mu), tol)
    if mu.order % 2 == 0:
        return w, np.array([])
    eta = _simple_roots(delta1_polynomial(mu, float(w[0])), tol)
    return w, eta


def chebyshev_radius(mu: MomentSequence, cfg: SupportConfig) -> float:
    """Half-width ``z`` of the Chebyshev window.

    ``"printed"``: ``z = mu_2 / xi``. ``"standard"``: ``z = sqrt(var / xi)``,
    which is what Chebyshev's inequality actually guarantees.
    """
    if mu.order < 2:
        raise ValueError("Chebyshev window needs mu_2")
    if cfg.chebyshev_variant == "printed":
        return mu[2] / cfg.xi
    var = max(mu[2] - mu[1] ** 2, 0.0)
    return math.sqrt(var / cfg.xi)


def chebyshev_window(mu: MomentSequence, cfg: SupportConfig) -> SupportWindow:
    """``{max(0, floor(mu_1 - z)) .. ceil(mu_1 + z)}``, at most ``max_window`` states."""
    z = chebyshev_radius(mu, cfg)
    m1 = mu[1]
    left = max(0, math.floor(m1 - z))
    right = max(left, math.ceil(m1 + z))
    if right - left + 1 > cfg.max_window:
        # keep the mean inside while trimming both sides
        half = (cfg.max_window - 1) // 2
        left = max(0, math.floor(m1) - half)
        right = left + cfg.max_window - 1
    return SupportWindow(left, right)


def _snap(r: float, rtol: float = 1e-9) -> float:
    # roots that are integers up to rounding must not floor/ceil one state too far
    n = round(r)
    return float(n) if abs(r - n) <= rtol * max(1.0, abs(r)) else r


def _window_around_mean(mu: MomentSequence) -> SupportWindow:
    m1 = _snap(mu[1])
    return SupportWindow(max(0, math.floor(m1)), max(0, math.ceil(m1)))


def initial_window(mu: MomentSequence, cfg: SupportConfig | None = None) -> SupportWindow:
    """First window: from the determinant roots, else the Chebyshev window.

    Even ``M`` uses ``floor(w_1)..ceil(w_k)``; odd ``M`` takes the extreme roots
    over both polynomials. With ``M == 1`` only the mean is known and the
    window is ``floor(mu_1)..ceil(mu_1)``. The result always contains
    ``floor(mu_1)`` or ``ceil(mu_1)``.
    """
    cfg = cfg or SupportConfig()
    if mu.order < 1:
        raise ValueError("need at least the first moment")
    if mu.order == 1:
        return _window_around_mean(mu)
    try:
        w, eta = delta_roots(mu, cfg.root_tol)
    except (DegeneratePolynomial, InsufficientRealRoots):
        return chebyshev_window(mu, cfg)
    lo = min(w[0], eta[0]) if eta.size else w[0]
    hi = max(w[-1], eta[-1]) if eta.size else w[-1]
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return chebyshev_window(mu, cfg)
    left = max(0, math.floor(_snap(lo)))
    right = max(left, math.ceil(_snap(hi)))
    mean = _window_around_mean(mu)
    if not (mean.left in range(left, right + 1) or mean.right in range(left, right + 1)):
        left, right = min(left, mean.left), max(right, mean.right)
    return SupportWindow(left, right)


def tail_ok(q: FiniteDistribution, cfg: SupportConfig | None = None) -> bool:
    """True when the right edge carries less than ``delta_prob`` times the peak mass.

    With ``cfg.both_ends`` the left edge must pass the same test unless it
    sits at zero.
    """
    cfg = cfg or SupportConfig()
    peak = float(q.probs.max())
    ok = q.probs[-1] < cfg.delta_prob * peak
    if cfg.both_ends and q.window.left > 0:
        ok = ok and q.probs[0] < cfg.delta_prob * peak
    return bool(ok)


def extend_one(D: SupportWindow, step_index: int, literal: bool = False) -> SupportWindow:
    """Add one state: on even steps at the left (clamped at 0), on odd steps at the right.

    ``literal=True`` reproduces the even branch without the decrement, so even
    steps leave the window unchanged.
    """
    if step_index % 2 == 0:
        left = D.left if literal else max(0, D.left - 1)
        return SupportWindow(max(0, left), D.right)
    return SupportWindow(D.left, D.right + 1)


def extend_block(D: SupportWindow, increment: float) -> SupportWindow:
    """Grow by ``ceil(increment / 2)`` on each side, left edge clamped at 0."""
    if increment < 0:
        raise ValueError("increment must be >= 0")
    half = math.ceil(increment / 2)
    return SupportWindow(max(0, D.left - half), D.right + half)
