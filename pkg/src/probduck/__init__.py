"""Probabilistic duck curves and ramp curves from PV / load history."""

__version__ = "0.1.0"

from .copula import GaussianCopula, fit_copula, kendall_tau
from .curves import ProbCurve, aggregate_fleet, build_pdc, build_prc
from .dps import Dps, ddc_add, ddc_sub, discretize, negate_dps
from .indices import compute_indices, confidence_level, probabilistic_area
from .ingest import SeriesKind, SeriesMeta, TimePanel, load_panel, slice_period
from .kde import KdeModel, fit_kde
from .planning import ResourceSpec, breakeven_point, daily_cost, stack_resources

__all__ = [
    "Dps", "GaussianCopula", "KdeModel", "ProbCurve", "ResourceSpec", "SeriesKind",
    "SeriesMeta", "TimePanel", "aggregate_fleet", "breakeven_point", "build_pdc",
    "build_prc", "compute_indices", "confidence_level", "daily_cost", "ddc_add", "ddc_sub",
    "discretize", "fit_copula", "fit_kde", "kendall_tau", "load_panel", "negate_dps",
    "probabilistic_area", "slice_period", "stack_resources",
]
