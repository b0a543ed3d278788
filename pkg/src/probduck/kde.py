"""Gaussian kernel density marginals.

A :class:`KdeModel` is the pair (samples, bandwidth); everything else is
evaluated exactly by O(L) summation over the samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteInput, ProbabilityOutOfRange, TooFewSamples
from .normal import norm_cdf

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)
# evaluation points per chunk, bounds the (points x samples) work matrix
_CHUNK = 4096


def floor_bandwidth(samples: np.ndarray) -> float:
    spread = float(np.max(samples) - np.min(samples))
    return max(1e-6, 1e-3 * (spread + 1e-6))


def silverman_bandwidth(samples: np.ndarray) -> float:
    """``0.9 * min(std, IQR / 1.34) * L ** (-1/5)`` with the floor applied.

    ``std`` uses the unbiased (n - 1) estimator. When the IQR collapses to
    zero but the samples still spread, ``std`` alone is used.
    """
    x = np.asarray(samples, dtype=float)
    n = x.size
    sigma = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75.0, 25.0])
    iqr = float(q75 - q25) / 1.34
    spread = min(sigma, iqr) if iqr > 0 else sigma
    return max(0.9 * spread * n ** (-0.2), floor_bandwidth(x))


@dataclass(frozen=True, eq=False)
class KdeModel:
    samples: np.ndarray
    bandwidth: float

    def __post_init__(self):
        x = np.array(self.samples, dtype=float).ravel()
        if x.size < 1:
            raise TooFewSamples("KdeModel needs at least one sample")
        if not np.all(np.isfinite(x)):
            raise NonFiniteInput("KdeModel samples must be finite")
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "bandwidth", float(self.bandwidth))

    @property
    def sample_count(self) -> int:
        return self.samples.size

    @property
    def degenerate(self) -> bool:
        """True when the bandwidth sits at the floor (near-constant samples)."""
        return self.bandwidth <= floor_bandwidth(self.samples) * (1 + 1e-12)

    @property
    def mean(self) -> float:
        return float(self.samples.mean())

    @property
    def variance(self) -> float:
        return float(self.samples.var() + self.bandwidth ** 2)

    def support(self, k: float = 8.0) -> tuple[float, float]:
        """Interval ``[min - k*h, max + k*h]`` holding essentially all mass."""
        return (float(self.samples.min() - k * self.bandwidth),
                float(self.samples.max() + k * self.bandwidth))

    def pdf(self, x):
        return _evaluate(self, x, _kernel)

    def cdf(self, x):
        return _evaluate(self, x, norm_cdf)

    def inverse_cdf(self, p):
        return inverse_cdf(self, p)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Exact draws: a random sample point plus Gaussian kernel noise."""
        idx = rng.integers(0, self.sample_count, size=n)
        return self.samples[idx] + self.bandwidth * rng.standard_normal(n)

    def to_dict(self) -> dict:
        return {"bandwidth_mw": self.bandwidth, "sample_count": self.sample_count}


def _kernel(u):
    return _INV_SQRT_2PI * np.exp(-0.5 * u * u)


def _evaluate(model: KdeModel, x, fn):
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    if not np.all(np.isfinite(flat)):
        raise NonFiniteInput("evaluation points must be finite")
    h = model.bandwidth
    out = np.empty(flat.size)
    for lo in range(0, flat.size, _CHUNK):
        chunk = flat[lo:lo + _CHUNK]
        u = (chunk[:, None] - model.samples[None, :]) / h
        out[lo:lo + _CHUNK] = fn(u).mean(axis=1)
    if fn is _kernel:
        out /= h
    return out.reshape(x.shape) if x.ndim else float(out[0])


def fit_kde(samples) -> KdeModel:
    """Fit a Gaussian KDE with the Silverman rule-of-thumb bandwidth."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise TooFewSamples(f"need at least 2 samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("samples must be finite")
    return KdeModel(x, silverman_bandwidth(x))


def pdf(model: KdeModel, x):
    return model.pdf(x)


def cdf(model: KdeModel, x):
    return model.cdf(x)


def inverse_cdf(model: KdeModel, p, tol: float = 1e-10):
    """Solve ``cdf(x) = p`` by vectorized bracketed bisection."""
    p = np.asarray(p, dtype=float)
    flat = p.ravel()
    if np.any(~(flat > 0.0) | ~(flat < 1.0)):
        raise ProbabilityOutOfRange("inverse_cdf needs 0 < p < 1")
    h = model.bandwidth
    lo = np.full(flat.shape, model.samples.min() - 40.0 * h)
    hi = np.full(flat.shape, model.samples.max() + 40.0 * h)
    mid = 0.5 * (lo + hi)
    active = np.ones(flat.shape, dtype=bool)
    for _ in range(200):
        mid[active] = 0.5 * (lo[active] + hi[active])
        err = model.cdf(mid[active]) - flat[active]
        idx = np.flatnonzero(active)
        below = err < 0
        lo[idx[below]] = mid[idx[below]]
        hi[idx[~below]] = mid[idx[~below]]
        width = hi[idx] - lo[idx]
        done = (np.abs(err) <= tol) & (width <= 1e-12 * (1.0 + np.abs(mid[idx])))
        done |= width <= 4 * np.finfo(float).eps * (1.0 + np.abs(mid[idx]))
        active[idx[done]] = False
        if not active.any():
            break
    return mid.reshape(p.shape) if p.ndim else float(mid[0])
