"""Monte Carlo ground truth for the lattice computations.

The fitted model is sampled directly: KDE marginals are drawn exactly
(random sample point plus kernel noise) and every pairwise Gaussian copula
is imposed by rank-reordering the two sample sets against a correlated
normal pair. This reproduces the same fold structure as the curve builder
without touching any lattice arithmetic, so distances between the two
measure discretization and convolution error only.

Randomness comes from Philox counter-based streams spawned from one 64-bit
seed; each period and quantity owns a fixed sub-stream.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .copula import GaussianCopula
from .curves import FleetModel, NetLoadModel, ProbCurve
from .dps import Dps
from .errors import TooFewSamples
from .ingest import SeriesKind

MIN_SAMPLES = 1000


def make_rng(seed: int, *path: int) -> np.random.Generator:
    """Philox generator for the sub-stream ``path`` under ``seed``."""
    seq = np.random.SeedSequence(seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(seq))


def _arrange(values: np.ndarray, latent: np.ndarray) -> np.ndarray:
    """Permute ``values`` so that their ranks match the ranks of ``latent``."""
    out = np.empty_like(values)
    out[np.argsort(latent)] = np.sort(values)
    return out


def couple(x: np.ndarray, y: np.ndarray, c: GaussianCopula,
           rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Reorder two independent samples so their ranks follow copula ``c``."""
    n = x.size
    z1 = rng.standard_normal(n)
    z2 = c.rho * z1 + math.sqrt(1.0 - c.rho * c.rho) * rng.standard_normal(n)
    return _arrange(x, z1), _arrange(y, z2)


def sample_fleet(fleet: FleetModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draws of the fleet total along the same fold as the lattice sum."""
    def draw(marginal):
        if marginal is None:
            return np.zeros(n)
        x = marginal.sample(n, rng)
        # PV mass below 0 sits at 0, as in the discretization
        return np.maximum(x, 0.0) if fleet.kind is SeriesKind.PV else x

    total = draw(fleet.marginals[0])
    for marginal, cop in zip(fleet.marginals[1:], fleet.fold):
        total, nxt = couple(total, draw(marginal), cop, rng)
        total = total + nxt
    return total


def sample_net_load(model: NetLoadModel, t: int, n: int, seed: int) -> np.ndarray:
    """Independent draws of net load at period ``t``."""
    rng = make_rng(seed, 0, t)
    pm = model.periods[t]
    load = sample_fleet(pm.load, n, rng)
    pv = sample_fleet(pm.pv, n, rng)
    load, pv = couple(load, pv, pm.pv_load, rng)
    return load - pv


def sample_joint_days(model: NetLoadModel, n: int, seed: int) -> np.ndarray:
    """``n`` simulated days of net load, shape (n, T).

    Per-period draws are chained through a Gaussian latent AR process whose
    lag-one correlations are the adjacent-period copula parameters; each
    period's draws are assigned in the rank order of its latent column.
    """
    n_periods = model.periods_per_day
    rng = make_rng(seed, 1)
    latent = np.empty((n, n_periods))
    latent[:, 0] = rng.standard_normal(n)
    for t, cop in enumerate(model.adjacent):
        latent[:, t + 1] = (cop.rho * latent[:, t]
                            + math.sqrt(1.0 - cop.rho * cop.rho) * rng.standard_normal(n))
    days = np.empty((n, n_periods))
    for t in range(n_periods):
        days[:, t] = _arrange(sample_net_load(model, t, n, seed), latent[:, t])
    return days


def sample_difference(x: np.ndarray, y: np.ndarray, c: GaussianCopula,
                      rng: np.random.Generator) -> np.ndarray:
    """Draws of ``x - y`` with ``c`` coupling ``x`` and ``y``."""
    xs, ys = couple(x, y, c, rng)
    return xs - ys


def _cdf_pair(dps: Dps, samples: np.ndarray):
    """Merged breakpoints and both right-continuous CDFs evaluated there."""
    s = np.sort(samples)
    grid = np.union1d(dps.values, s)
    f_dps = np.concatenate([[0.0], np.cumsum(dps.masses)])[
        np.searchsorted(dps.values, grid, side="right")]
    f_emp = np.searchsorted(s, grid, side="right") / s.size
    return grid, f_dps, f_emp


def wasserstein1(dps: Dps, samples) -> float:
    """L1 distance between the lattice CDF and the empirical CDF of ``samples``."""
    s = np.asarray(samples, dtype=float).ravel()
    if s.size < MIN_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_SAMPLES} samples, got {s.size}")
    grid, f_dps, f_emp = _cdf_pair(dps, s)
    # both CDFs are constant between consecutive breakpoints
    return float(np.sum(np.abs(f_dps - f_emp)[:-1] * np.diff(grid)))


def ks_statistic(dps: Dps, samples) -> float:
    _, f_dps, f_emp = _cdf_pair(dps, np.asarray(samples, dtype=float).ravel())
    return float(min(1.0, np.max(np.abs(f_dps - f_emp))))


@dataclass
class Comparison:
    quantity: str
    wasserstein1: float
    ks_stat: float
    threshold: float
    sample_count: int
    passed: bool


@dataclass
class OracleReport:
    seed: int
    step_mw: float
    comparisons: list[Comparison] = field(default_factory=list)
    area: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (all(c.passed for c in self.comparisons)
                and all(r["passed"] for r in self.area))

    def to_dict(self) -> dict:
        return {"seed": self.seed, "step_mw": self.step_mw, "passed": self.passed,
                "comparisons": [asdict(c) for c in self.comparisons], "area": self.area}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def compare(quantity: str, dps: Dps, samples: np.ndarray, threshold: float) -> Comparison:
    w = wasserstein1(dps, samples)
    return Comparison(quantity, w, ks_statistic(dps, samples), threshold, int(samples.size),
                      bool(w <= threshold))


def validate_curves(model: NetLoadModel, pdc: ProbCurve, prc: ProbCurve, n: int, seed: int,
                    mou_levels=(), period_hours: float = 1.0,
                    area_rel_tol: float = 0.03, w1_steps: float = 2.0) -> OracleReport:
    """Compare every PDC / PRC period and the curtailment area with Monte Carlo."""
    from .indices import probabilistic_area

    step = pdc.step
    threshold = w1_steps * step
    report = OracleReport(seed=seed, step_mw=step)
    days = sample_joint_days(model, n, seed)
    for t, d in enumerate(pdc.periods):
        report.comparisons.append(compare(f"PDC[{t}]", d, days[:, t], threshold))
    ramps = np.diff(days, axis=1)
    for t, d in enumerate(prc.periods):
        report.comparisons.append(compare(f"PRC[{t}]", d, ramps[:, t], threshold))
    for mou in mou_levels:
        s_lattice = probabilistic_area(pdc, mou, period_hours).s_mwh
        s_mc = float(period_hours * np.maximum(mou - days, 0.0).mean(axis=0).sum())
        rel = abs(s_lattice - s_mc) / s_mc if s_mc > 0 else abs(s_lattice)
        report.area.append({"mou_mw": float(mou), "s_mwh": s_lattice, "s_mc_mwh": s_mc,
                            "rel_error": rel, "threshold": area_rel_tol,
                            "passed": bool(rel <= area_rel_tol)})
    return report


def empirical_benchmark(dps: Dps, observed) -> dict:
    """Distance from a lattice result to raw observed per-day values.

    Raw samples are few (one per day), so this measures model fit
    qualitatively rather than lattice accuracy.
    """
    obs = np.asarray(observed, dtype=float).ravel()
    grid, f_dps, f_emp = _cdf_pair(dps, obs)
    return {"wasserstein1": float(np.sum(np.abs(f_dps - f_emp)[:-1] * np.diff(grid))),
            "ks_stat": float(np.max(np.abs(f_dps - f_emp))), "sample_count": int(obs.size)}
