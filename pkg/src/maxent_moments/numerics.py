"""Small dense numeric kernels shared by the solver and the support estimator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.special


class SingularSystemError(np.linalg.LinAlgError):
    """The damped system could not be solved accurately; raise the damping and retry."""


class InsufficientRealRoots(ArithmeticError):
    """A polynomial has fewer real roots than its degree."""


@dataclass(frozen=True, eq=False)
class PolyCoeffs:
    """Polynomial ``sum_i coeffs[i] * w**i`` with trailing zeros trimmed."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        nz = np.flatnonzero(c)
        if nz.size == 0:
            raise ValueError("zero polynomial has no degree")
        c = c[: nz[-1] + 1]
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, w):
        # numpy.polyval wants the highest power first
        return np.polyval(self.coeffs[::-1], w)

    def derivative(self) -> "PolyCoeffs":
        if self.degree == 0:
            raise ValueError("derivative of a constant is the zero polynomial")
        return PolyCoeffs(self.coeffs[1:] * np.arange(1, self.degree + 1))

    def scale_at(self, w) -> float:
        """Magnitude of the largest term, the natural yardstick for ``|p(w)|``."""
        return float(np.max(np.abs(self.coeffs) * np.abs(w) ** np.arange(self.degree + 1)))


def log_sum_exp(terms) -> float:
    """``ln(sum(exp(terms)))`` without overflow; ``-inf`` if every term is ``-inf``."""
    terms = np.asarray(terms, dtype=float)
    if terms.size == 0:
        raise ValueError("log_sum_exp of an empty sequence")
    return float(scipy.special.logsumexp(terms))


def solve_damped(H, gamma: float, g, rtol: float = 1e-10) -> np.ndarray:
    """Solve ``(H + gamma * diag(H)) s = g`` for symmetric ``H`` with positive diagonal.

    The system is Jacobi-scaled before a Cholesky factorization, which makes the
    solve insensitive to the wildly different magnitudes of the power moments.

    Raises
    ------
    SingularSystemError
        When the diagonal is not positive, the factorization fails, or the
        relative residual stays above ``rtol`` after one refinement step.
    """
    H = np.asarray(H, dtype=float)
    g = np.asarray(g, dtype=float)
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    diag = np.diag(H).copy()
    if np.any(~(diag > 0)) or not np.all(np.isfinite(H)):
        raise SingularSystemError("Hessian diagonal must be positive and finite")
    d = np.sqrt(diag)
    A = H / np.outer(d, d)
    A[np.diag_indices_from(A)] = 1.0 + gamma
    b = g / d
    try:
        factor = scipy.linalg.cho_factor(A, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from None
    y = scipy.linalg.cho_solve(factor, b, check_finite=False)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros_like(g)
    r = b - A @ y
    if np.linalg.norm(r) > rtol * bnorm:
        y = y + scipy.linalg.cho_solve(factor, r, check_finite=False)
        r = b - A @ y
        if not np.linalg.norm(r) <= rtol * bnorm:
            raise SingularSystemError(
                f"relative residual {np.linalg.norm(r) / bnorm:.3g} exceeds {rtol:g}"
            )
    return y / d


def determinant(A) -> float:
    """Determinant by Gaussian elimination with partial pivoting.

    Meant for the small (at most ~8x8) bordered moment matrices; a 1x1 or
    triangular input comes back exactly.
    """
    U = np.array(A, dtype=float)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError("determinant needs a square matrix")
    n = U.shape[0]
    det = 1.0
    for j in range(n):
        piv = j + int(np.argmax(np.abs(U[j:, j])))
        if U[piv, j] == 0.0:
            return 0.0
        if piv != j:
            U[[j, piv]] = U[[piv, j]]
            det = -det
        det *= U[j, j]
        if j + 1 < n:
            f = U[j + 1 :, j] / U[j, j]
            U[j + 1 :, j:] -= np.outer(f, U[j, j:])
    return float(det)


def companion_matrix(p: PolyCoeffs) -> np.ndarray:
    """Frobenius companion matrix of the monic version of ``p``."""
    c = p.coeffs / p.coeffs[-1]
    n = p.degree
    C = np.zeros((n, n))
    C[1:, :-1] = np.eye(n - 1)
    C[:, -1] = -c[:-1]
    return C


def real_simple_roots(p: PolyCoeffs, tol: float = 1e-8):
    """Real roots of ``p`` in ascending order, with simplicity flags.

    Roots are the eigenvalues of the companion matrix, polished by a couple of
    Newton steps. An eigenvalue counts as real when its imaginary part is at
    most ``tol * (1 + |root|)``.

    Returns
    -------
    roots : ndarray
        Real roots, ascending.
    simple : ndarray of bool
        False for roots that coincide with a neighbour to within
        ``sqrt(tol)`` relative, i.e. numerically repeated roots.

    Raises
    ------
    InsufficientRealRoots
        If fewer than ``p.degree`` roots are real.
    """
    if p.degree < 1:
        raise ValueError("need a polynomial of degree >= 1")
    eig = np.linalg.eigvals(companion_matrix(p))
    is_real = np.abs(eig.imag) <= tol * (1.0 + np.abs(eig))
    if np.count_nonzero(is_real) < p.degree:
        raise InsufficientRealRoots(
            f"only {np.count_nonzero(is_real)} of {p.degree} roots are real"
        )
    roots = np.sort(eig.real[is_real])
    dp = p.derivative()
    for _ in range(2):
        slope = dp(roots)
        step = np.zeros_like(roots)
        np.divide(p(roots), slope, out=step, where=slope != 0)
        # near a repeated root both p and p' are rounding noise; keep a step
        # only when it actually lowers the residual
        cand = roots - step
        roots = np.where(np.abs(p(cand)) < np.abs(p(roots)), cand, roots)
    roots = np.sort(roots)
    simple = np.ones(roots.size, dtype=bool)
    close = np.diff(roots) <= np.sqrt(tol) * (1.0 + np.abs(roots[1:]))
    simple[1:] &= ~close
    simple[:-1] &= ~close
    return roots, simple
