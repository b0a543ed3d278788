"""Probabilistic duck curve (PDC) and ramp curve (PRC) assembly.

Fleets are summed by a left fold in declared series order: the running
total is combined with the next series through a copula fitted between the
per-day partial sums and that series. This pairwise reading of the
multi-series dependent sum avoids a high-dimensional copula; results depend
mildly on the fold order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence, TypeVar

import numpy as np

from .copula import GaussianCopula, fit_copula
from .dps import Dps, ddc_add, ddc_sub, discretize
from .ingest import SeriesKind, TimePanel
from .kde import KdeModel, fit_kde

NIGHT_MW = 1e-6
DEFAULT_BINS = 500

T = TypeVar("T")


class CurveKind(str, Enum):
    PDC = "PDC"
    PRC = "PRC"


@dataclass(frozen=True)
class CopulaRecord:
    pair: str
    t: int
    copula: GaussianCopula

    def to_dict(self) -> dict:
        return {"pair": self.pair, "t": self.t, "tau": self.copula.tau, "rho": self.copula.rho}


@dataclass(frozen=True, eq=False)
class ProbCurve:
    kind: CurveKind
    periods: tuple[Dps, ...]
    step: float
    copulas: tuple[CopulaRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", CurveKind(self.kind))
        object.__setattr__(self, "periods", tuple(self.periods))
        for d in self.periods:
            if d.step != self.step:
                raise ValueError(f"member step {d.step} differs from curve step {self.step}")

    def __len__(self) -> int:
        return len(self.periods)

    def __getitem__(self, t: int) -> Dps:
        return self.periods[t]

    def means(self) -> np.ndarray:
        return np.array([d.mean() for d in self.periods])

    def quantiles(self, q: float) -> np.ndarray:
        return np.array([d.quantile(q) for d in self.periods])

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "step_mw": self.step,
            "periods": [d.to_dict() for d in self.periods],
            "copulas": [r.to_dict() for r in self.copulas],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProbCurve":
        copulas = tuple(
            CopulaRecord(r["pair"], r["t"], GaussianCopula(r["tau"], r["rho"]))
            for r in data.get("copulas", [])
        )
        return cls(CurveKind(data["kind"]), tuple(Dps.from_dict(d) for d in data["periods"]),
                   data["step_mw"], copulas)


@dataclass(frozen=True)
class FleetModel:
    """Fitted marginals and fold copulas of one fleet at one period.

    ``marginals[k]`` is ``None`` for a series that is dark (all samples
    below 1e-6 MW); it is then a point mass at 0.
    """

    kind: SeriesKind
    ids: tuple[str, ...]
    marginals: tuple[KdeModel | None, ...]
    fold: tuple[GaussianCopula, ...]


@dataclass(frozen=True)
class PeriodModel:
    t: int
    pv: FleetModel
    load: FleetModel
    pv_load: GaussianCopula


@dataclass(frozen=True)
class NetLoadModel:
    """Everything fitted from a panel: per-period fleets and adjacent copulas.

    ``adjacent[t]`` couples net load at ``t + 1`` (first argument) with
    net load at ``t``.
    """

    periods: tuple[PeriodModel, ...]
    adjacent: tuple[GaussianCopula, ...]
    net_samples: np.ndarray = field(repr=False)

    @property
    def periods_per_day(self) -> int:
        return len(self.periods)


def resolve_step(panel: TimePanel, step_mw: float | None = None, bins: int | None = None) -> float:
    """Lattice step: explicit MW, or observed peak total load divided by ``bins``."""
    if step_mw is not None:
        if not step_mw > 0:
            raise ValueError(f"step must be > 0, got {step_mw}")
        return float(step_mw)
    bins = DEFAULT_BINS if bins is None else bins
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    return panel.peak_load() / bins


def _map(fn: Callable[[int], T], items: Sequence[int], workers: int) -> list[T]:
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def fit_fleet(panel: TimePanel, kind: SeriesKind | str, t: int,
              force_independent: bool = False) -> FleetModel:
    kind = SeriesKind(kind)
    samples = panel.fleet(kind, t)
    if samples.shape[0] == 0:
        raise ValueError(f"panel has no {kind.value} series")
    marginals = []
    for row in samples:
        dark = kind is SeriesKind.PV and bool(np.all(row < NIGHT_MW))
        marginals.append(None if dark else fit_kde(row))
    fold = []
    partial = samples[0].copy()
    for row in samples[1:]:
        fold.append(GaussianCopula.independent() if force_independent
                    else fit_copula(partial, row))
        partial += row
    return FleetModel(kind, tuple(panel.ids(kind)), tuple(marginals), tuple(fold))


def fit_model(panel: TimePanel, force_independent: bool = False, workers: int = 1) -> NetLoadModel:
    """Fit every marginal and copula the PDC / PRC construction needs."""
    net = panel.net_load()
    total_load = panel.total(SeriesKind.LOAD)
    total_pv = panel.total(SeriesKind.PV)

    def one(t: int) -> PeriodModel:
        pv_load = (GaussianCopula.independent() if force_independent
                   else fit_copula(total_load[:, t], total_pv[:, t]))
        return PeriodModel(t, fit_fleet(panel, SeriesKind.PV, t, force_independent),
                           fit_fleet(panel, SeriesKind.LOAD, t, force_independent), pv_load)

    periods = tuple(_map(one, range(panel.periods_per_day), workers))
    adjacent = tuple(
        GaussianCopula.independent() if force_independent else fit_copula(net[:, t + 1], net[:, t])
        for t in range(panel.periods_per_day - 1)
    )
    return NetLoadModel(periods, adjacent, net)


def discretize_marginal(model: KdeModel | None, kind: SeriesKind, step: float) -> Dps:
    if model is None:
        return Dps.point_mass(0.0, step)
    lower = 0.0 if kind is SeriesKind.PV else None
    return discretize(model, step, lower=lower, strict=False)


def fleet_dps(fleet: FleetModel, step: float) -> Dps:
    """Left fold of the fleet's discretized marginals through its copulas."""
    acc = discretize_marginal(fleet.marginals[0], fleet.kind, step)
    for marginal, cop in zip(fleet.marginals[1:], fleet.fold):
        acc = ddc_add(acc, discretize_marginal(marginal, fleet.kind, step), cop)
    return acc


def aggregate_fleet(panel: TimePanel, kind: SeriesKind | str, t: int, step: float,
                    force_independent: bool = False) -> Dps:
    """Distribution of the fleet total of ``kind`` at period ``t``."""
    return fleet_dps(fit_fleet(panel, kind, t, force_independent), step)


def pdc_from_model(model: NetLoadModel, step: float, workers: int = 1) -> ProbCurve:
    def one(t: int) -> Dps:
        pm = model.periods[t]
        return ddc_sub(fleet_dps(pm.load, step), fleet_dps(pm.pv, step), pm.pv_load)

    periods = _map(one, range(model.periods_per_day), workers)
    records = []
    for pm in model.periods:
        for k, cop in enumerate(pm.pv.fold):
            records.append(CopulaRecord(f"PV_PV:{'+'.join(pm.pv.ids[:k + 1])}|{pm.pv.ids[k + 1]}",
                                        pm.t, cop))
        for k, cop in enumerate(pm.load.fold):
            records.append(CopulaRecord(
                f"load_load:{'+'.join(pm.load.ids[:k + 1])}|{pm.load.ids[k + 1]}", pm.t, cop))
        records.append(CopulaRecord("PV_load", pm.t, pm.pv_load))
    return ProbCurve(CurveKind.PDC, tuple(periods), step, tuple(records))


def build_pdc(panel: TimePanel, step: float, force_independent: bool = False,
              workers: int = 1) -> ProbCurve:
    """Per-period net-load distributions: total load minus total PV."""
    return pdc_from_model(fit_model(panel, force_independent, workers), step, workers)


def prc_from_pdc(pdc: ProbCurve, adjacent: Sequence[GaussianCopula], workers: int = 1) -> ProbCurve:
    if pdc.kind is not CurveKind.PDC:
        raise ValueError("ramp curve needs a PDC")
    if len(adjacent) != len(pdc) - 1:
        raise ValueError(f"need {len(pdc) - 1} adjacent copulas, got {len(adjacent)}")

    def one(t: int) -> Dps:
        return ddc_sub(pdc[t + 1], pdc[t], adjacent[t])

    periods = _map(one, range(len(pdc) - 1), workers)
    records = tuple(CopulaRecord("netload_t+1|netload_t", t, c) for t, c in enumerate(adjacent))
    return ProbCurve(CurveKind.PRC, tuple(periods), pdc.step, records)


def adjacent_copulas(panel: TimePanel, force_independent: bool = False) -> list[GaussianCopula]:
    net = panel.net_load()
    if force_independent:
        return [GaussianCopula.independent()] * (panel.periods_per_day - 1)
    return [fit_copula(net[:, t + 1], net[:, t]) for t in range(panel.periods_per_day - 1)]


def build_prc(pdc: ProbCurve, panel: TimePanel, force_independent: bool = False,
              workers: int = 1) -> ProbCurve:
    """Ramp distributions ``net(t + 1) - net(t)`` for ``t = 0 .. T - 2``."""
    return prc_from_pdc(pdc, adjacent_copulas(panel, force_independent), workers)
