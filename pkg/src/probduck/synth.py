"""Deterministic synthetic PV / load panel with a duck-shaped net load.

PV farms share a daily clearness index whose latent Gaussian scores are
equicorrelated so that the pairwise Kendall tau of daily clearness equals
``pv_tau``. Loads follow an industrial profile with a shared daily level,
AR(1) intra-day noise and a weak negative link to clearness.
"""

from __future__ import annotations

import datetime as dt
import math

import numpy as np

from .ingest import TimePanel, panel_from_arrays
from .normal import norm_cdf

PV_CAPACITY = (200.0, 150.0, 180.0, 170.0)
LOAD_BASE = (400.0, 300.0, 250.0)
SUNRISE_H, SUNSET_H = 6.0, 19.0
DEFAULT_SEED = 20200301


def clear_sky_shape(periods_per_day: int) -> np.ndarray:
    """Normalized clear-sky PV profile evaluated at period midpoints."""
    hours = (np.arange(periods_per_day) + 0.5) * 24.0 / periods_per_day
    phase = (hours - SUNRISE_H) / (SUNSET_H - SUNRISE_H)
    shape = np.where((phase > 0) & (phase < 1), np.sin(np.pi * np.clip(phase, 0, 1)), 0.0)
    return shape ** 1.2


def load_shape(periods_per_day: int) -> np.ndarray:
    hours = (np.arange(periods_per_day) + 0.5) * 24.0 / periods_per_day
    morning = np.exp(-0.5 * ((hours - 10.0) / 2.5) ** 2)
    evening = np.exp(-0.5 * ((hours - 20.0) / 2.0) ** 2)
    return 0.88 + 0.07 * morning + 0.12 * evening


def _equicorrelated(rng: np.random.Generator, n_rows: int, n_cols: int, rho: float) -> np.ndarray:
    shared = rng.standard_normal((n_rows, 1))
    own = rng.standard_normal((n_rows, n_cols))
    return math.sqrt(rho) * shared + math.sqrt(1.0 - rho) * own


def synth_panel(n_pv: int = 4, n_load: int = 3, days: int = 180, periods_per_day: int = 24,
                pv_tau: float = 0.6, seed: int = DEFAULT_SEED,
                start: dt.date = dt.date(2020, 3, 1)) -> TimePanel:
    rng = np.random.Generator(np.random.Philox(seed))
    sun = clear_sky_shape(periods_per_day)
    rho_pv = math.sin(math.pi * pv_tau / 2.0)

    z = _equicorrelated(rng, days, n_pv, rho_pv)
    clearness = 0.2 + 0.8 * norm_cdf(z) ** 0.8
    pv = {}
    for k in range(n_pv):
        cap = PV_CAPACITY[k % len(PV_CAPACITY)]
        wobble = 1.0 + 0.04 * rng.standard_normal((days, periods_per_day))
        out = cap * clearness[:, k:k + 1] * sun[None, :] * wobble
        pv[f"pv{k + 1}"] = np.clip(out, 0.0, cap)

    day_level = _equicorrelated(rng, days, n_load, 0.5)
    cloud_push = -(clearness.mean(axis=1, keepdims=True) - 0.6)
    profile = load_shape(periods_per_day)
    load = {}
    for k in range(n_load):
        base = LOAD_BASE[k % len(LOAD_BASE)]
        noise = np.zeros((days, periods_per_day))
        eps = rng.standard_normal((days, periods_per_day))
        noise[:, 0] = eps[:, 0]
        for t in range(1, periods_per_day):
            noise[:, t] = 0.9 * noise[:, t - 1] + math.sqrt(1 - 0.81) * eps[:, t]
        level = 1.0 + 0.06 * day_level[:, k:k + 1] + 0.05 * cloud_push
        load[f"load{k + 1}"] = base * profile[None, :] * level + 0.02 * base * noise

    caps = {f"pv{k + 1}": PV_CAPACITY[k % len(PV_CAPACITY)] for k in range(n_pv)}
    return panel_from_arrays(pv, load, start=start, capacities=caps)
