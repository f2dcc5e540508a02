"""Moment sequences, support windows and explicit finite distributions.

Also holds the two on-disk formats used by the command line tool:

* moments JSON: ``{"moments": [mu_0, mu_1, ..., mu_M]}``
* distribution CSV: header ``x,p`` followed by one row per state, states
  contiguous and ascending.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class MomentError(ValueError):
    """Raised when a moment sequence violates a basic realizability check."""


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MomentSequence:
    """Raw moments ``mu_0..mu_M`` of a non-negative integer random variable.

    Build through :func:`validate_moments` unless the values are known to be
    valid already.
    """

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    @property
    def order(self) -> int:
        return len(self.values) - 1

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]

    def tolist(self) -> list[float]:
        return [float(v) for v in self.values]

    def __repr__(self):
        return f"MomentSequence({self.tolist()!r})"


@dataclass(frozen=True, order=True)
class SupportWindow:
    """Contiguous integer window ``{left, ..., right}`` with ``0 <= left <= right``."""

    left: int
    right: int

    def __post_init__(self):
        if int(self.left) != self.left or int(self.right) != self.right:
            raise ValueError("window edges must be integers")
        object.__setattr__(self, "left", int(self.left))
        object.__setattr__(self, "right", int(self.right))
        if not 0 <= self.left <= self.right:
            raise ValueError(
                f"invalid window {{{self.left}..{self.right}}}: need 0 <= left <= right"
            )

    @property
    def size(self) -> int:
        return self.right - self.left + 1

    def states(self) -> np.ndarray:
        return np.arange(self.left, self.right + 1, dtype=float)

    def __contains__(self, x):
        return self.left <= x <= self.right

    def __str__(self):
        return f"{{{self.left}..{self.right}}}"


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """Probability table over a :class:`SupportWindow`."""

    window: SupportWindow
    probs: np.ndarray = field(repr=False)

    # Absolute tolerance on the total mass.
    SUM_TOL = 1e-12

    def __post_init__(self):
        probs = _frozen(self.probs)
        if probs.ndim != 1 or probs.size != self.window.size:
            raise ValueError(
                f"expected {self.window.size} probabilities for window {self.window}, "
                f"got {probs.size}"
            )
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("probabilities must be finite and non-negative")
        total = math.fsum(probs)
        if abs(total - 1.0) > self.SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_weights(cls, window: SupportWindow, weights) -> "FiniteDistribution":
        """Normalize non-negative ``weights`` into a distribution on ``window``."""
        w = np.asarray(weights, dtype=float)
        total = math.fsum(w)
        if not total > 0 or not math.isfinite(total):
            raise ValueError("weights must have a positive finite sum")
        p = w / total
        # A second pass removes the residual rounding left by the first division.
        p = p / math.fsum(p)
        return cls(window, p)

    @classmethod
    def point_mass(cls, x: int) -> "FiniteDistribution":
        return cls(SupportWindow(x, x), [1.0])

    @classmethod
    def uniform(cls, window: SupportWindow) -> "FiniteDistribution":
        return cls.from_weights(window, np.ones(window.size))

    def states(self) -> np.ndarray:
        return self.window.states()

    def pmf(self, x) -> float:
        if x not in self.window:
            return 0.0
        return float(self.probs[int(x) - self.window.left])

    def on_window(self, window: SupportWindow) -> np.ndarray:
        """Probabilities of the states of ``window``, zero outside this support."""
        out = np.zeros(window.size)
        lo = max(window.left, self.window.left)
        hi = min(window.right, self.window.right)
        if lo <= hi:
            out[lo - window.left : hi - window.left + 1] = self.probs[
                lo - self.window.left : hi - self.window.left + 1
            ]
        return out


def validate_moments(raw) -> MomentSequence:
    """Check ``raw`` and wrap it as a :class:`MomentSequence`.

    Only three conditions are enforced: ``mu_0 == 1``, non-negativity, and
    ``mu_2 >= mu_1**2``. Use :func:`hankel_psd` for a fuller (optional)
    realizability diagnostic.

    Raises
    ------
    MomentError
        If any of the checks fails.
    """
    values = [float(v) for v in raw]
    if not values:
        raise MomentError("moment sequence is empty")
    if not all(math.isfinite(v) for v in values):
        raise MomentError("moments must be finite")
    if values[0] != 1.0:
        raise MomentError(f"μ₀ must equal 1 (got {values[0]!r})")
    for k, v in enumerate(values):
        if v < 0:
            raise MomentError(f"μ{_sub(k)} is negative ({v!r})")
    if len(values) > 2 and values[2] < values[1] ** 2:
        raise MomentError(f"μ₂ < μ₁² ({values[2]!r} < {values[1] ** 2!r})")
    return MomentSequence(values)


def _sub(k: int) -> str:
    return str(k).translate(str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉"))


def hankel_psd(mu: MomentSequence, rtol: float = 1e-10) -> bool:
    """Return True when the moment Hankel matrices are positive semidefinite.

    For a variable on the non-negative integers both ``[mu_{i+j}]`` and the
    shifted ``[mu_{i+j+1}]`` must be PSD. Not enforced by
    :func:`validate_moments`.
    """
    m = mu.values
    n0 = len(m) // 2 + (len(m) % 2)
    blocks = [np.array([[m[i + j] for j in range(n0)] for i in range(n0)])]
    n1 = len(m) // 2
    if n1 >= 1:
        blocks.append(np.array([[m[i + j + 1] for j in range(n1)] for i in range(n1)]))
    for h in blocks:
        d = np.sqrt(np.maximum(np.diag(h), np.finfo(float).tiny))
        eig = np.linalg.eigvalsh(h / np.outer(d, d))
        if eig.min() < -rtol:
            return False
    return True


def moments_of(dist: FiniteDistribution, order: int) -> MomentSequence:
    """Raw moments ``sum_x x**k p(x)`` for ``k = 0..order``."""
    if order < 0:
        raise ValueError("order must be >= 0")
    x = dist.states()
    p = dist.probs
    values = [math.fsum(p * x**k) for k in range(order + 1)]
    values[0] = 1.0
    return MomentSequence(values)


def entropy(dist: FiniteDistribution) -> float:
    """Shannon entropy in nats, with ``0 ln 0 = 0``."""
    p = dist.probs[dist.probs > 0]
    return float(-math.fsum(p * np.log(p)))


def total_variation(a: FiniteDistribution, b: FiniteDistribution) -> float:
    """Half the L1 distance between two tables, states outside a support count as zero."""
    w = SupportWindow(min(a.window.left, b.window.left), max(a.window.right, b.window.right))
    return 0.5 * math.fsum(np.abs(a.on_window(w) - b.on_window(w)))


# --- file formats -----------------------------------------------------------


def parse_moments_json(text: str) -> MomentSequence:
    """Parse the moments JSON format and validate the result."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MomentError(f"malformed JSON: {exc}") from None
    if not isinstance(doc, dict) or "moments" not in doc:
        raise MomentError('field "moments" is missing')
    raw = doc["moments"]
    if not isinstance(raw, list) or not raw:
        raise MomentError('field "moments" must be a non-empty array of numbers')
    for i, v in enumerate(raw):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise MomentError(f'field "moments"[{i}] is not a number: {v!r}')
    return validate_moments(raw)


def load_moments(path) -> MomentSequence:
    return parse_moments_json(Path(path).read_text())


def dump_moments(mu: MomentSequence) -> str:
    return json.dumps({"moments": mu.tolist()})


def parse_distribution_csv(text: str, sum_tol: float = 1e-9) -> FiniteDistribution:
    """Read an ``x,p`` table. Total mass must be within ``sum_tol`` of one.

    Tables off by more than 1e-12 are renormalized after the check so the
    result satisfies the tighter :class:`FiniteDistribution` invariant.
    """
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows or [c.strip() for c in rows[0]] != ["x", "p"]:
        raise ValueError('distribution CSV must start with the header "x,p"')
    xs, ps = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ValueError(f"line {lineno}: expected 2 columns, got {len(row)}")
        try:
            x = int(row[0])
            p = float(row[1])
        except ValueError:
            raise ValueError(f"line {lineno}: cannot parse {row!r}") from None
        xs.append(x)
        ps.append(p)
    if not xs:
        raise ValueError("distribution CSV has no rows")
    if any(b - a != 1 for a, b in zip(xs, xs[1:])):
        raise ValueError("states must be contiguous and ascending")
    ps = np.array(ps)
    if np.any(ps < 0) or not np.all(np.isfinite(ps)):
        raise ValueError("probabilities must be finite and non-negative")
    total = math.fsum(ps)
    if abs(total - 1.0) > sum_tol:
        raise ValueError(f"probabilities sum to {total!r}, not 1 within {sum_tol:g}")
    window = SupportWindow(xs[0], xs[-1])
    if abs(total - 1.0) <= FiniteDistribution.SUM_TOL:
        return FiniteDistribution(window, ps)
    return FiniteDistribution.from_weights(window, ps)


def format_distribution_csv(dist: FiniteDistribution) -> str:
    # 17 significant digits round-trip doubles exactly.
    lines = ["x,p"]
    for x, p in zip(range(dist.window.left, dist.window.right + 1), dist.probs):
        lines.append(f"{x},{p:.17g}")
    return "\n".join(lines) + "\n"
