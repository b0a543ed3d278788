"""Characteristic indices of a PDC / PRC pair.

Expected-value curves, alpha% confidence-level bands, the peak-to-valley
(PTV) distribution and the probabilistic area (expected daily curtailment
below the minimal output of units, MOU) with its marginal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .copula import fit_copula
from .curves import ProbCurve
from .dps import Dps, ddc_sub, expected_shortfall_below
from .errors import ProbabilityOutOfRange
from .ingest import TimePanel

DEFAULT_ALPHAS = (50.0, 90.0, 99.0)


@dataclass
class IndexBundle:
    expected_netload: np.ndarray
    expected_ramp: np.ndarray
    cl_netload: dict[float, np.ndarray]
    cl_ramp: dict[float, np.ndarray]
    ptv: Dps
    peak_time: int
    valley_time: int
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "expected_netload_mw": self.expected_netload.tolist(),
            "expected_ramp_mw": self.expected_ramp.tolist(),
            "cl_netload_mw": {f"{a:g}": v.tolist() for a, v in self.cl_netload.items()},
            "cl_ramp_mw": {f"{a:g}": v.tolist() for a, v in self.cl_ramp.items()},
            "ptv": self.ptv.to_dict(),
            "ptv_mean_mw": self.ptv.mean(),
            "peak_time": self.peak_time,
            "valley_time": self.valley_time,
            "warnings": list(self.warnings),
        }


@dataclass
class AreaResult:
    mou_curve: np.ndarray
    s_mwh: float
    t_min: int | None
    t_max: int | None
    ds_mwh_per_mw: float

    def to_dict(self) -> dict:
        return {"mou_mw": self.mou_curve.tolist(), "s_mwh": self.s_mwh, "t_min": self.t_min,
                "t_max": self.t_max, "ds_mwh_per_mw": self.ds_mwh_per_mw}


def expected_curves(pdc: ProbCurve, prc: ProbCurve) -> tuple[np.ndarray, np.ndarray]:
    if pdc.step != prc.step:
        raise ValueError("PDC and PRC must share one step")
    return pdc.means(), prc.means()


def confidence_level(curve: ProbCurve, alpha_pct: float) -> np.ndarray:
    """Width between the (50 + a/2)% and (50 - a/2)% quantiles per period."""
    if not 0.0 < alpha_pct < 100.0:
        raise ProbabilityOutOfRange(f"alpha must lie in (0, 100), got {alpha_pct}")
    upper = (50.0 + alpha_pct / 2.0) / 100.0
    lower = (50.0 - alpha_pct / 2.0) / 100.0
    return np.array([d.quantile(upper) - d.quantile(lower) for d in curve.periods])


def peak_valley(pdc: ProbCurve) -> tuple[int, int, bool]:
    """Peak and valley periods of the expected curve.

    Ties go to the earliest period. A flat curve would put both at the same
    period, so the valley moves to the next one and the flag is set.
    """
    if len(pdc) < 2:
        raise ValueError("peak/valley need at least 2 periods")
    means = pdc.means()
    peak, valley = int(np.argmax(means)), int(np.argmin(means))
    if peak == valley:
        return peak, (peak + 1) % len(pdc), True
    return peak, valley, False


def ptv_distribution(pdc: ProbCurve, panel: TimePanel) -> Dps:
    """Peak minus valley net load at the expected-curve peak and valley times."""
    peak, valley, _ = peak_valley(pdc)
    net = panel.net_load()
    return ddc_sub(pdc[peak], pdc[valley], fit_copula(net[:, peak], net[:, valley]))


def _mou_profile(mou, n_periods: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(mou, dtype=float))
    if arr.size == 1:
        return np.full(n_periods, float(arr[0]))
    if arr.size != n_periods:
        raise ValueError(f"MOU profile has {arr.size} entries, curve has {n_periods} periods")
    return arr


def _period_hours(pdc: ProbCurve, period_hours: float | None) -> float:
    return 24.0 / len(pdc) if period_hours is None else float(period_hours)


def area_value(pdc: ProbCurve, mou, period_hours: float | None = None) -> tuple[float, int | None, int | None]:
    """Probabilistic area and the span of periods whose lowest value is below MOU."""
    hours = _period_hours(pdc, period_hours)
    profile = _mou_profile(mou, len(pdc))
    lows = np.array([d.origin for d in pdc.periods])
    inside = np.flatnonzero(lows < profile)
    if inside.size == 0:
        return 0.0, None, None
    t_min, t_max = int(inside[0]), int(inside[-1])
    s = sum(expected_shortfall_below(pdc[t], profile[t]) for t in range(t_min, t_max + 1))
    return hours * s, t_min, t_max


def marginal_area(pdc: ProbCurve, mou, delta_p: float | None = None,
                  period_hours: float | None = None) -> float:
    """Drop in curtailment per MW of MOU reduction, ``(S(mou) - S(mou - dP)) / dP``."""
    delta_p = pdc.step if delta_p is None else float(delta_p)
    if not delta_p > 0:
        raise ValueError(f"delta_p must be > 0, got {delta_p}")
    profile = _mou_profile(mou, len(pdc))
    s_hi = area_value(pdc, profile, period_hours)[0]
    s_lo = area_value(pdc, profile - delta_p, period_hours)[0]
    return (s_hi - s_lo) / delta_p


def probabilistic_area(pdc: ProbCurve, mou, period_hours: float | None = None,
                       delta_p: float | None = None) -> AreaResult:
    """Expected daily PV curtailment below the MOU, in MWh.

    ``mou`` is a scalar or a per-period profile. Each period contributes
    ``E[max(0, mou_t - net_t)]`` times the period length.
    """
    profile = _mou_profile(mou, len(pdc))
    s, t_min, t_max = area_value(pdc, profile, period_hours)
    ds = marginal_area(pdc, profile, delta_p, period_hours)
    return AreaResult(profile, s, t_min, t_max, ds)


def area_sweep(pdc: ProbCurve, mou_values: Sequence[float], delta_p: float | None = None,
               period_hours: float | None = None) -> list[dict]:
    """Rows ``{mou_mw, s_mwh, ds_mwh_per_mw}`` for ascending scalar MOU levels."""
    rows = []
    for mou in sorted(float(m) for m in mou_values):
        s = area_value(pdc, mou, period_hours)[0]
        rows.append({"mou_mw": mou, "s_mwh": s,
                     "ds_mwh_per_mw": marginal_area(pdc, mou, delta_p, period_hours)})
    return rows


def sweep_grid(mou_min: float, mou_max: float, mou_step: float) -> np.ndarray:
    if not mou_step > 0:
        raise ValueError("MOU sweep step must be > 0")
    if mou_max < mou_min:
        raise ValueError("MOU sweep max below min")
    count = int(np.floor((mou_max - mou_min) / mou_step + 1e-9)) + 1
    return mou_min + mou_step * np.arange(count)


def compute_indices(pdc: ProbCurve, prc: ProbCurve, panel: TimePanel,
                    alphas: Sequence[float] = DEFAULT_ALPHAS) -> IndexBundle:
    e_net, e_ramp = expected_curves(pdc, prc)
    peak, valley, flat = peak_valley(pdc)
    notes = ["flat expected curve: valley moved to the period after the peak"] if flat else []
    return IndexBundle(
        expected_netload=e_net,
        expected_ramp=e_ramp,
        cl_netload={float(a): confidence_level(pdc, a) for a in alphas},
        cl_ramp={float(a): confidence_level(prc, a) for a in alphas},
        ptv=ptv_distribution(pdc, panel),
        peak_time=peak,
        valley_time=valley,
        warnings=notes,
    )
