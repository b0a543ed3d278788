"""Discrete probabilistic sequences and dependent discrete convolution.

A :class:`Dps` is a probability mass function on the lattice
``origin + i * step``. Dependent sums reweight the plain convolution by the
copula density evaluated at the cumulative masses of the two operands.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .copula import U_CLAMP, GaussianCopula, _density_scores
from .copula import negate as negate_copula
from .errors import NormalizationWarning, ProbabilityOutOfRange, StepMismatch, StepTooCoarse
from .kde import KdeModel
from .normal import norm_ppf

TRIM = 1e-12
TAIL_Q = 1e-5
SUM_TOL = 1e-9
WARN_DEFICIT = 0.05

Cumulative = Literal["right", "mid"]


@dataclass(frozen=True, eq=False)
class Dps:
    origin: float
    step: float
    masses: np.ndarray

    def __post_init__(self):
        m = np.array(self.masses, dtype=float).ravel()
        if not self.step > 0:
            raise ValueError(f"step must be > 0, got {self.step}")
        if m.size == 0:
            raise ValueError("Dps needs at least one mass")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValueError("masses must be finite and nonnegative")
        if abs(m.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"masses sum to {m.sum()!r}, expected 1")
        if m[0] <= 0 or m[-1] <= 0:
            raise ValueError("first and last mass must be positive (trimmed support)")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "origin", float(self.origin))
        object.__setattr__(self, "step", float(self.step))

    @classmethod
    def from_masses(cls, origin: float, step: float, masses, trim: float = TRIM) -> "Dps":
        """Normalize, trim end masses below ``trim`` and build a Dps."""
        m = np.asarray(masses, dtype=float)
        total = m.sum()
        if not total > 0:
            raise ValueError("masses sum to zero")
        m = m / total
        keep = np.flatnonzero(m >= trim)
        if keep.size == 0:
            keep = np.array([int(np.argmax(m))])
        first, last = keep[0], keep[-1]
        m = m[first:last + 1]
        return cls(origin + first * step, step, m / m.sum())

    @classmethod
    def point_mass(cls, value: float, step: float) -> "Dps":
        return cls(value, step, np.ones(1))

    def __len__(self) -> int:
        return self.masses.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dps):
            return NotImplemented
        return (self.origin == other.origin and self.step == other.step
                and np.array_equal(self.masses, other.masses))

    @property
    def values(self) -> np.ndarray:
        return self.origin + self.step * np.arange(self.masses.size)

    @property
    def top(self) -> float:
        return self.origin + (self.masses.size - 1) * self.step

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.masses)

    def mean(self) -> float:
        return mean(self)

    def variance(self) -> float:
        mu = self.mean()
        return float(np.dot(self.masses, (self.values - mu) ** 2))

    def quantile(self, q):
        return quantile(self, q)

    def shift(self, delta: float) -> "Dps":
        return Dps(self.origin + delta, self.step, self.masses)

    def to_dict(self) -> dict:
        return {"origin_mw": self.origin, "step_mw": self.step,
                "masses": [float(x) for x in self.masses]}

    @classmethod
    def from_dict(cls, data: dict) -> "Dps":
        return cls(data["origin_mw"], data["step_mw"], np.asarray(data["masses"], dtype=float))


def _bin_of(x: float, step: float) -> int:
    """Index ``k`` of the lattice bin ``[(k - 1/2) step, (k + 1/2) step)`` holding ``x``."""
    return math.floor(x / step + 0.5)


def discretize(model: KdeModel, step: float, lower: float | None = None,
               strict: bool = True) -> Dps:
    """Discretize a KDE marginal onto the lattice ``k * step``.

    Bin ``k`` receives ``cdf((k + 1/2) step) - cdf((k - 1/2) step)``. The
    support runs from the bin holding the 1e-5 quantile to the bin holding
    the 1 - 1e-5 quantile; the residual tails go to the end bins. With
    ``lower`` set, mass below the bin holding ``lower`` is folded into that
    bin (PV cannot be negative).

    ``strict`` raises :class:`StepTooCoarse` when a non-degenerate model
    covers fewer than 3 bins.
    """
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step}")
    q_lo, q_hi = model.inverse_cdf(np.array([TAIL_Q, 1.0 - TAIL_Q]))
    k_lo, k_hi = _bin_of(q_lo, step), _bin_of(q_hi, step)
    if lower is not None:
        k_floor = _bin_of(lower, step)
        k_lo = max(k_lo, k_floor)
        k_hi = max(k_hi, k_lo)
    n_bins = k_hi - k_lo + 1
    if strict and n_bins < 3 and not model.degenerate:
        raise StepTooCoarse(f"step {step} MW leaves {n_bins} bin(s) in the support")
    edges = (np.arange(k_lo - 1, k_hi + 1) + 0.5) * step
    cum = model.cdf(edges)
    masses = np.diff(cum)
    masses[0] += cum[0]
    masses[-1] += 1.0 - cum[-1]
    return Dps.from_masses(k_lo * step, step, np.clip(masses, 0.0, None))


def _scores(d: Dps, cumulative: Cumulative) -> np.ndarray:
    cum = np.cumsum(d.masses)
    if cumulative == "mid":
        cum = cum - 0.5 * d.masses
    elif cumulative != "right":
        raise ValueError(f"unknown cumulative rule {cumulative!r}")
    return norm_ppf(np.clip(cum, U_CLAMP, 1.0 - U_CLAMP))


def _check_steps(a: Dps, b: Dps):
    if not math.isclose(a.step, b.step, rel_tol=1e-12, abs_tol=0.0):
        raise StepMismatch(f"steps differ: {a.step} vs {b.step}")


def ddc_add(a: Dps, b: Dps, c: GaussianCopula, cumulative: Cumulative = "mid") -> Dps:
    """Distribution of ``x + y`` for ``x ~ a``, ``y ~ b`` coupled by ``c``.

    Each product ``a(i) b(j)`` is weighted by the copula density at the
    cumulative masses of ``i`` and ``j``, then the result is renormalized.
    ``cumulative="mid"`` evaluates at the bin midpoint ``F(i) - a(i)/2``;
    ``"right"`` uses the right-closed ``F(i)``, which overweights the top
    corner cell badly under strong dependence and is kept for comparison.
    """
    _check_steps(a, b)
    # a constant summand shifts the other operand whatever the copula
    if len(b) == 1:
        return a.shift(b.origin)
    if len(a) == 1:
        return b.shift(a.origin)
    weights = np.outer(a.masses, b.masses)
    if c.rho != 0.0:
        weights *= _density_scores(c.rho, _scores(a, cumulative)[:, None],
                                   _scores(b, cumulative)[None, :])
    out = _antidiagonal_sums(weights)
    total = out.sum()
    if abs(total - 1.0) > WARN_DEFICIT:
        warnings.warn(f"dependent convolution mass {total:.4f} before renormalization",
                      NormalizationWarning, stacklevel=2)
    return Dps.from_masses(a.origin + b.origin, a.step, out)


def _antidiagonal_sums(w: np.ndarray) -> np.ndarray:
    n_a, n_b = w.shape
    out = np.zeros(n_a + n_b - 1)
    if n_a <= n_b:
        for i in range(n_a):
            out[i:i + n_b] += w[i]
    else:
        for j in range(n_b):
            out[j:j + n_a] += w[:, j]
    return out


def negate_dps(a: Dps) -> Dps:
    """Distribution of ``-x``: reversed masses on the mirrored lattice."""
    return Dps(-a.top, a.step, a.masses[::-1].copy())


def ddc_sub(a: Dps, b: Dps, c: GaussianCopula, cumulative: Cumulative = "mid") -> Dps:
    """Distribution of ``x - y`` where ``c`` couples ``x`` and ``y``."""
    _check_steps(a, b)
    return ddc_add(a, negate_dps(b), negate_copula(c), cumulative)


def convolve(a: Dps, b: Dps) -> Dps:
    """Plain (independent) discrete convolution."""
    _check_steps(a, b)
    return Dps.from_masses(a.origin + b.origin, a.step, np.convolve(a.masses, b.masses))


def mean(a: Dps) -> float:
    return float(np.dot(a.masses, a.values))


def quantile(a: Dps, q):
    """Smallest lattice value whose cumulative mass reaches ``q``."""
    q_arr = np.asarray(q, dtype=float)
    if np.any(~(q_arr > 0.0) | ~(q_arr < 1.0)):
        raise ProbabilityOutOfRange("quantile needs 0 < q < 1")
    cum = np.cumsum(a.masses)
    idx = np.searchsorted(cum, q_arr - 1e-12, side="left")
    idx = np.minimum(idx, a.masses.size - 1)
    out = a.origin + a.step * idx
    return float(out) if q_arr.ndim == 0 else out


def expected_shortfall_below(a: Dps, level: float) -> float:
    """``E[max(0, level - x)]``: probability-weighted gap below ``level``."""
    gap = level - a.values
    below = gap > 0
    return float(np.dot(a.masses[below], gap[below]))


def cdf_at(a: Dps, x) -> np.ndarray:
    """Right-continuous CDF of the lattice distribution."""
    cum = np.cumsum(a.masses)
    idx = np.searchsorted(a.values, np.asarray(x, dtype=float), side="right")
    return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
