"""Bivariate Gaussian copula fitted through Kendall's tau."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import stats

from .errors import DegenerateWarning, LengthMismatch
from .normal import norm_cdf, norm_ppf

U_CLAMP = 1e-10
RHO_LIMIT = 0.9999


class CopulaFamily(str, Enum):
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class GaussianCopula:
    tau: float
    rho: float
    degenerate: bool = False
    family: CopulaFamily = CopulaFamily.GAUSSIAN

    def __post_init__(self):
        if not -1.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must lie in [-1, 1], got {self.tau}")
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho}")

    @classmethod
    def from_tau(cls, tau: float, degenerate: bool = False) -> "GaussianCopula":
        rho = math.sin(math.pi * tau / 2.0)
        return cls(float(tau), float(np.clip(rho, -RHO_LIMIT, RHO_LIMIT)), degenerate)

    @classmethod
    def independent(cls) -> "GaussianCopula":
        return cls(0.0, 0.0)

    def density(self, u, v):
        return density(self, u, v)

    def negate(self) -> "GaussianCopula":
        return negate(self)

    def to_dict(self) -> dict:
        return {"tau": self.tau, "rho": self.rho}


def tau_b(xs, ys) -> tuple[float, bool]:
    """Kendall's tau-b and a flag set when it is undefined (returned as 0)."""
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if xs.size != ys.size:
        raise LengthMismatch(f"{xs.size} vs {ys.size} samples")
    if xs.size < 2:
        raise LengthMismatch("kendall tau needs at least 2 pairs")
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        return 0.0, True
    tau = stats.kendalltau(xs, ys, variant="b").statistic
    return float(np.clip(tau, -1.0, 1.0)), False


def kendall_tau(xs, ys) -> float:
    """Kendall rank correlation, tie-adjusted (tau-b).

    When every x or every y is equal the statistic is undefined; 0 is
    returned and a :class:`DegenerateWarning` is emitted.
    """
    tau, degenerate = tau_b(xs, ys)
    if degenerate:
        warnings.warn("kendall tau undefined for constant samples; using 0",
                      DegenerateWarning, stacklevel=2)
    return tau


def fit_copula(xs, ys) -> GaussianCopula:
    """Gaussian copula with ``rho = sin(pi * tau / 2)``, clamped to +-0.9999."""
    tau, degenerate = tau_b(xs, ys)
    return GaussianCopula.from_tau(tau, degenerate)


def density(c: GaussianCopula, u, v):
    """Copula density c(u, v); inputs are clamped to [1e-10, 1 - 1e-10]."""
    g1 = norm_ppf(np.clip(u, U_CLAMP, 1.0 - U_CLAMP))
    g2 = norm_ppf(np.clip(v, U_CLAMP, 1.0 - U_CLAMP))
    out = _density_scores(c.rho, g1, g2)
    return float(out) if np.ndim(out) == 0 else out


def _density_scores(rho: float, g1, g2):
    """Density in terms of normal scores; broadcasts ``g1`` against ``g2``."""
    one_m = 1.0 - rho * rho
    expo = -(rho * rho * (g1 * g1 + g2 * g2) - 2.0 * rho * g1 * g2) / (2.0 * one_m)
    return np.exp(expo) / math.sqrt(one_m)


def negate(c: GaussianCopula) -> GaussianCopula:
    """Copula of (x, -y) given the copula of (x, y)."""
    return GaussianCopula(-c.tau, -c.rho, c.degenerate, c.family)


def sample(c: GaussianCopula, n: int, rng: np.random.Generator):
    """Draw ``n`` pairs of correlated uniforms."""
    z1 = rng.standard_normal(n)
    z2 = c.rho * z1 + math.sqrt(1.0 - c.rho * c.rho) * rng.standard_normal(n)
    return norm_cdf(z1), norm_cdf(z2)


def sample_pair(c: GaussianCopula, rng: np.random.Generator) -> tuple[float, float]:
    u, v = sample(c, 1, rng)
    return float(u[0]), float(v[0])
