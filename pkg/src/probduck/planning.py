"""Flexible-resource planning on the curtailment area sweep.

Each resource lowers the minimal output of units (MOU). Its break-even
point is the daily cost of one MW divided by the value of one MWh of
avoided curtailment; a resource keeps taking MOU reductions while the
marginal area is at least its break-even point and its MW limit lasts.
Resources are stacked cheapest break-even first.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .curves import ProbCurve
from .errors import ConfigError, EmptySweep, PlanningWarning, ZeroBenefit
from .indices import area_value

DAYS_PER_YEAR = 365.0


class ResourceKind(str, Enum):
    RETROFIT = "RETROFIT"
    STORAGE = "STORAGE"
    DEMAND_SIDE = "DEMAND_SIDE"


@dataclass(frozen=True)
class ResourceSpec:
    """One flexible resource.

    ``capex_per_mw`` is the investment for 1 MW of MOU reduction (for
    storage: 1 MW of power with ``storage_hours`` of energy).
    """

    name: str
    kind: ResourceKind
    capex_per_mw: float
    rarr: float
    benefit_per_mwh: float
    mw_limit: float
    storage_hours: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ResourceKind(self.kind))
        if self.capex_per_mw < 0:
            raise ValueError(f"{self.name}: capex_per_mw must be >= 0")
        if not 0 < self.rarr < 1:
            raise ValueError(f"{self.name}: rarr must lie in (0, 1)")
        if self.benefit_per_mwh < 0:
            raise ValueError(f"{self.name}: benefit_per_mwh must be >= 0")
        if self.mw_limit < 0:
            raise ValueError(f"{self.name}: mw_limit must be >= 0")
        if self.kind is ResourceKind.STORAGE and not (self.storage_hours or 0) > 0:
            raise ValueError(f"{self.name}: storage needs storage_hours > 0")


def daily_cost(r: ResourceSpec) -> float:
    """Annualized investment per MW spread over a 365-day year, USD/MW/day."""
    return r.capex_per_mw * r.rarr / DAYS_PER_YEAR


def breakeven_point(r: ResourceSpec) -> float:
    """Marginal curtailment relief (MWh/MW/day) at which the resource pays off."""
    if r.benefit_per_mwh <= 0:
        raise ZeroBenefit(f"{r.name}: benefit_per_mwh must be > 0")
    return daily_cost(r) / r.benefit_per_mwh


@dataclass
class Sweep:
    """Curtailment area on an ascending MOU grid.

    ``ds[i]`` is the relief per MW of lowering MOU from ``mou[i]`` to
    ``mou[i - 1]``; ``ds[0]`` is unused by the planner.
    """

    mou: np.ndarray
    s: np.ndarray
    ds: np.ndarray

    def __post_init__(self):
        self.mou = np.asarray(self.mou, dtype=float)
        self.s = np.asarray(self.s, dtype=float)
        self.ds = np.asarray(self.ds, dtype=float)
        if self.mou.size == 0:
            raise EmptySweep("sweep has no rows")
        if not (self.mou.shape == self.s.shape == self.ds.shape):
            raise ValueError("sweep columns differ in length")
        if np.any(np.diff(self.mou) <= 0):
            raise ValueError("sweep must be strictly ascending in MOU")

    @classmethod
    def from_area(cls, mou, s) -> "Sweep":
        """Sweep whose marginal column is the finite difference of ``s``."""
        mou = np.asarray(mou, dtype=float)
        s = np.asarray(s, dtype=float)
        ds = np.zeros_like(s)
        ds[1:] = np.diff(s) / np.diff(mou)
        return cls(mou, s, ds)

    @classmethod
    def from_rows(cls, rows: Sequence[dict]) -> "Sweep":
        rows = sorted(rows, key=lambda r: r["mou_mw"])
        return cls([r["mou_mw"] for r in rows], [r.get("s_mwh", np.nan) for r in rows],
                   [r["ds_mwh_per_mw"] for r in rows])

    def index_of(self, mou: float) -> int:
        i = int(np.argmin(np.abs(self.mou - mou)))
        tol = 1e-9 * max(1.0, abs(mou))
        if abs(self.mou[i] - mou) > tol:
            raise ValueError(f"MOU {mou} is not a sweep grid point")
        return i


def optimal_mou(sweep: Sweep, r: ResourceSpec, mou_start: float) -> tuple[float, float]:
    """Walk MOU down from ``mou_start`` while the resource stays economic.

    Stops at the first grid point whose marginal area is below the
    break-even point, or when the next step would exceed ``mw_limit``.
    Returns ``(mou_stop, allocated_mw)``.
    """
    i = sweep.index_of(mou_start)
    be = breakeven_point(r)
    start = sweep.mou[i]
    while i > 0 and sweep.ds[i] >= be and start - sweep.mou[i - 1] <= r.mw_limit * (1 + 1e-12):
        i -= 1
    return float(sweep.mou[i]), float(start - sweep.mou[i])


@dataclass
class PlanResult:
    name: str
    kind: str
    capex_per_mw: float
    rarr: float
    annual_cost: float
    daily_cost: float
    benefit_per_mwh: float
    breakeven: float
    start_mou: float
    final_mou: float
    allocated_mw: float
    expected_pv_gain: float
    net_benefit_per_day: float


@dataclass
class Plan:
    base_mou: float
    results: list[PlanResult]
    base_s_mwh: float
    residual_s_mwh: float
    warnings: list[str] = field(default_factory=list)

    @property
    def final_mou(self) -> float:
        return self.results[-1].final_mou if self.results else self.base_mou

    def to_dict(self) -> dict:
        return {
            "base_mou_mw": self.base_mou,
            "base_s_mwh": self.base_s_mwh,
            "final_mou_mw": self.final_mou,
            "residual_s_mwh": self.residual_s_mwh,
            "residual_note": "curtailment left below the final MOU: demand response / "
                             "curtailment candidate",
            "resources": [asdict(r) for r in self.results],
            "warnings": list(self.warnings),
        }


def _check_order(resources: Sequence[ResourceSpec]):
    points = [breakeven_point(r) for r in resources]
    if any(b < a for a, b in zip(points, points[1:])):
        raise ValueError("resources must be ordered by ascending break-even point")


def _dominance_gaps(first: ResourceSpec, second: ResourceSpec, ds: np.ndarray) -> bool:
    """True if ``second`` beats ``first`` per MW somewhere on ``ds``."""
    gain_first = first.benefit_per_mwh * ds - daily_cost(first)
    gain_second = second.benefit_per_mwh * ds - daily_cost(second)
    return bool(np.any(gain_second > gain_first + 1e-12))


def stack_on_sweep(sweep: Sweep, base_mou: float,
                   resources: Sequence[ResourceSpec]) -> Plan:
    """Apply :func:`optimal_mou` per resource, each starting where the last stopped."""
    _check_order(resources)
    notes: list[str] = []
    base_i = sweep.index_of(base_mou)
    current = float(sweep.mou[base_i])
    results = []
    for k, r in enumerate(resources):
        stop, allocated = optimal_mou(sweep, r, current)
        gain = float(sweep.s[sweep.index_of(current)] - sweep.s[sweep.index_of(stop)])
        cost = daily_cost(r)
        if r.kind is ResourceKind.STORAGE and gain > r.storage_hours * allocated + 1e-9:
            msg = (f"{r.name}: curtailment relief {gain:.1f} MWh/day exceeds storage energy "
                   f"{r.storage_hours * allocated:.1f} MWh")
            warnings.warn(msg, PlanningWarning, stacklevel=2)
            notes.append(msg)
        if k + 1 < len(resources):
            below = sweep.ds[1:sweep.index_of(current) + 1]
            if _dominance_gaps(r, resources[k + 1], below):
                msg = (f"{resources[k + 1].name} earns more per MW than {r.name} on part of "
                       f"the sweep; cheapest-first stacking may not maximize net benefit")
                warnings.warn(msg, PlanningWarning, stacklevel=2)
                notes.append(msg)
        results.append(PlanResult(
            name=r.name, kind=r.kind.value, capex_per_mw=r.capex_per_mw, rarr=r.rarr,
            annual_cost=r.capex_per_mw * r.rarr, daily_cost=cost,
            benefit_per_mwh=r.benefit_per_mwh, breakeven=breakeven_point(r),
            start_mou=current, final_mou=stop, allocated_mw=allocated, expected_pv_gain=gain,
            net_benefit_per_day=r.benefit_per_mwh * gain - cost * allocated,
        ))
        current = stop
    return Plan(
        base_mou=float(sweep.mou[base_i]),
        results=results,
        base_s_mwh=float(sweep.s[base_i]),
        residual_s_mwh=float(sweep.s[sweep.index_of(current)]),
        warnings=notes,
    )


def planning_sweep(pdc: ProbCurve, base_mou: float, depth_mw: float, grid_step: float,
                   period_hours: float | None = None) -> Sweep:
    """Area sweep from ``base_mou`` down by ``depth_mw`` (not below 0) on ``grid_step``."""
    if not grid_step > 0:
        raise ValueError("grid_step must be > 0")
    n_steps = int(np.ceil(depth_mw / grid_step - 1e-9))
    n_steps = min(n_steps, int(np.floor(base_mou / grid_step + 1e-9)))
    mou = base_mou - grid_step * np.arange(max(n_steps, 0), -1, -1)
    s = np.array([area_value(pdc, m, period_hours)[0] for m in mou])
    return Sweep.from_area(mou, s)


def stack_resources(pdc: ProbCurve, base_mou: float, resources: Sequence[ResourceSpec],
                    grid_step: float, period_hours: float | None = None) -> Plan:
    """Size each resource cheapest-first against the PDC's curtailment area."""
    _check_order(resources)
    depth = sum(r.mw_limit for r in resources) + grid_step
    sweep = planning_sweep(pdc, base_mou, depth, grid_step, period_hours)
    return stack_on_sweep(sweep, base_mou, resources)


def load_resources(path: str | Path) -> list[ResourceSpec]:
    """Read resource specs from a YAML or JSON file.

    The file holds a mapping with a ``resources`` list; each entry carries
    the :class:`ResourceSpec` fields.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read resource file {path}: {exc}") from exc
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"{path}: malformed resource file ({exc})") from exc
    if not isinstance(data, dict) or not isinstance(data.get("resources"), list):
        raise ConfigError(f"{path}: expected a mapping with a 'resources' list")
    out = []
    for k, entry in enumerate(data["resources"]):
        try:
            out.append(ResourceSpec(**entry))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: resource #{k + 1}: {exc}") from exc
    return out
