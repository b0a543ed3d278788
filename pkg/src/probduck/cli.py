"""Command-line front end.

Subcommands ``synth``, ``pdc``, ``prc``, ``indices``, ``plan`` and
``validate``. Without ``--input-pv``/``--input-load`` the bundled synthetic
panel is used. Outputs are staged next to their targets and renamed only
when every file of the command has been produced.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .curves import DEFAULT_BINS, ProbCurve, fit_model, pdc_from_model, prc_from_pdc, resolve_step
from .errors import ProbDuckError
from .indices import DEFAULT_ALPHAS, area_sweep, compute_indices, sweep_grid
from .ingest import TimePanel, load_panel, write_panel
from .oracle import validate_curves
from .planning import load_resources, stack_resources
from .synth import DEFAULT_SEED, synth_panel

logger = logging.getLogger("probduck")


@dataclass
class RunConfig:
    input_pv: Path | None
    input_load: Path | None
    periods: int
    start: dt.date | None
    end: dt.date | None
    step_mw: float | None
    bins: int | None
    alphas: tuple[float, ...]
    quantiles: tuple[float, ...] | None
    mou_min: float | None
    mou_max: float | None
    mou_step: float | None
    resources: Path | None
    base_mou: float | None
    grid_step: float | None
    seed: int
    samples: int
    mou_levels: tuple[float, ...] | None
    synth_seed: int
    workers: int
    out: Path

    def __post_init__(self):
        if self.step_mw is not None and not self.step_mw > 0:
            raise ProbDuckError("--step-mw must be > 0")
        if self.bins is not None and self.bins < 1:
            raise ProbDuckError("--bins must be >= 1")
        if self.mou_step is not None and not self.mou_step > 0:
            raise ProbDuckError("--mou-step must be > 0")
        if any(not 0 < a < 100 for a in self.alphas):
            raise ProbDuckError("--alpha values must lie in (0, 100)")
        if self.quantiles and any(not 0 < q < 1 for q in self.quantiles):
            raise ProbDuckError("--quantiles must lie in (0, 1)")
        if (self.input_pv is None) != (self.input_load is None):
            raise ProbDuckError("give both --input-pv and --input-load, or neither")


@dataclass
class Outputs:
    """Files staged in memory and committed together."""

    directory: Path
    files: dict[str, str] = field(default_factory=dict)

    def add(self, name: str, text: str):
        self.files[name] = text

    def commit(self) -> list[Path]:
        self.directory.mkdir(parents=True, exist_ok=True)
        staged = []
        try:
            for name, text in self.files.items():
                fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=self.directory)
                with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
                staged.append((tmp, self.directory / name))
        except BaseException:
            for tmp, _ in staged:
                os.unlink(tmp)
            raise
        for tmp, final in staged:
            os.replace(tmp, final)
        return [final for _, final in staged]


def _json(data) -> str:
    return json.dumps(data, indent=2, allow_nan=False) + "\n"


def _csv(header: Sequence[str], rows, comment: str) -> str:
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    return buf.getvalue()


def _panel(cfg: RunConfig) -> TimePanel:
    if cfg.input_pv is None:
        panel = synth_panel(periods_per_day=cfg.periods, seed=cfg.synth_seed)
        if cfg.start or cfg.end:
            panel = panel.filter_days(cfg.start, cfg.end)
        return panel
    panel = load_panel(cfg.input_pv, cfg.input_load, cfg.periods, start=cfg.start, end=cfg.end)
    if panel.dropped_days:
        logger.warning("dropped %d incomplete day(s)", panel.dropped_days)
    return panel


def _meta(cfg: RunConfig, panel: TimePanel, step: float) -> dict:
    return {
        "version": __version__,
        "step_mw": step,
        "bins": None if cfg.step_mw is not None else (cfg.bins or DEFAULT_BINS),
        "periods_per_day": panel.periods_per_day,
        "day_count": panel.day_count,
        "dropped_days": panel.dropped_days,
        "first_day": panel.days[0].isoformat(),
        "last_day": panel.days[-1].isoformat(),
        "input_pv": str(cfg.input_pv) if cfg.input_pv else "synthetic",
        "input_load": str(cfg.input_load) if cfg.input_load else "synthetic",
    }


def _header(meta: dict) -> str:
    return f"step_mw={meta['step_mw']!r} bins={meta['bins']} periods={meta['periods_per_day']}"


def _fan_quantiles(cfg: RunConfig) -> list[float]:
    if cfg.quantiles:
        return sorted(set(cfg.quantiles))
    qs = {0.5}
    for a in cfg.alphas:
        qs.add(round((50.0 - a / 2.0) / 100.0, 12))
        qs.add(round((50.0 + a / 2.0) / 100.0, 12))
    return sorted(qs)


def fan_csv(curve: ProbCurve, quantiles: Sequence[float], comment: str) -> str:
    header = ["period", *(f"q{q:g}" for q in quantiles)]
    table = np.column_stack([curve.quantiles(q) for q in quantiles])
    rows = [[t, *map(float, table[t])] for t in range(len(curve))]
    return _csv(header, rows, comment)


@dataclass
class _Built:
    panel: TimePanel
    step: float
    meta: dict
    model: object
    pdc: ProbCurve
    prc: ProbCurve | None = None


def _build(cfg: RunConfig, with_prc: bool) -> _Built:
    panel = _panel(cfg)
    step = resolve_step(panel, cfg.step_mw, cfg.bins)
    model = fit_model(panel, workers=cfg.workers)
    pdc = pdc_from_model(model, step, workers=cfg.workers)
    prc = prc_from_pdc(pdc, model.adjacent, workers=cfg.workers) if with_prc else None
    return _Built(panel, step, _meta(cfg, panel, step), model, pdc, prc)


def _default_sweep(cfg: RunConfig, pdc: ProbCurve) -> np.ndarray:
    lows = np.array([d.origin for d in pdc.periods])
    lo = cfg.mou_min if cfg.mou_min is not None else max(0.0, float(lows.min()))
    hi = cfg.mou_max if cfg.mou_max is not None else float(pdc.means().max())
    step = cfg.mou_step if cfg.mou_step is not None else max((hi - lo) / 49.0, pdc.step)
    return sweep_grid(lo, hi, step)


def cmd_synth(cfg: RunConfig) -> int:
    panel = synth_panel(periods_per_day=cfg.periods, seed=cfg.synth_seed)
    cfg.out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=cfg.out) as tmp:
        pv, load = Path(tmp) / "pv.csv", Path(tmp) / "load.csv"
        write_panel(panel, pv, load)
        out = Outputs(cfg.out)
        out.add("pv.csv", pv.read_text(encoding="utf-8"))
        out.add("load.csv", load.read_text(encoding="utf-8"))
        out.commit()
    return 0


def cmd_pdc(cfg: RunConfig) -> int:
    b = _build(cfg, with_prc=False)
    out = Outputs(cfg.out)
    out.add("pdc.json", _json({"meta": b.meta, **b.pdc.to_dict()}))
    out.add("pdc_fan.csv", fan_csv(b.pdc, _fan_quantiles(cfg), _header(b.meta)))
    out.commit()
    return 0


def cmd_prc(cfg: RunConfig) -> int:
    b = _build(cfg, with_prc=True)
    out = Outputs(cfg.out)
    out.add("prc.json", _json({"meta": b.meta, **b.prc.to_dict()}))
    out.add("prc_fan.csv", fan_csv(b.prc, _fan_quantiles(cfg), _header(b.meta)))
    out.commit()
    return 0


def cmd_indices(cfg: RunConfig) -> int:
    b = _build(cfg, with_prc=True)
    bundle = compute_indices(b.pdc, b.prc, b.panel, cfg.alphas)
    rows = area_sweep(b.pdc, _default_sweep(cfg, b.pdc))
    out = Outputs(cfg.out)
    out.add("indices.json", _json({"meta": b.meta, **bundle.to_dict(), "area_sweep": rows}))
    out.add("area_sweep.csv", _csv(["mou_mw", "s_mwh", "ds_mwh_per_mw"],
                                   [[r["mou_mw"], r["s_mwh"], r["ds_mwh_per_mw"]] for r in rows],
                                   _header(b.meta)))
    out.commit()
    return 0


def cmd_plan(cfg: RunConfig) -> int:
    if cfg.resources is None:
        raise ProbDuckError("plan needs --resources")
    resources = load_resources(cfg.resources)
    b = _build(cfg, with_prc=False)
    base = cfg.base_mou if cfg.base_mou is not None else (
        cfg.mou_max if cfg.mou_max is not None else float(b.pdc.means().max()))
    grid = cfg.grid_step or cfg.mou_step or b.step
    plan = stack_resources(b.pdc, base, resources, grid)
    fields = ["name", "kind", "capex_per_mw", "rarr", "annual_cost", "daily_cost",
              "benefit_per_mwh", "breakeven", "start_mou", "final_mou", "allocated_mw",
              "expected_pv_gain", "net_benefit_per_day"]
    rows = [[getattr(r, f) for f in fields] for r in plan.results]
    out = Outputs(cfg.out)
    out.add("plan.json", _json({"meta": b.meta, "grid_step_mw": grid, **plan.to_dict()}))
    out.add("plan.csv", _csv(fields, rows, _header(b.meta) + f" grid_step_mw={grid!r}"))
    out.commit()
    return 0


def cmd_validate(cfg: RunConfig) -> int:
    b = _build(cfg, with_prc=True)
    if cfg.mou_levels:
        levels = list(cfg.mou_levels)
    else:
        half_peak = 0.5 * float(b.pdc.means().max())
        levels = [half_peak * f for f in (0.8, 0.9, 1.0, 1.1, 1.2)]
    report = validate_curves(b.model, b.pdc, b.prc, cfg.samples, cfg.seed, mou_levels=levels)
    out = Outputs(cfg.out)
    out.add("validate_report.json", _json({"meta": b.meta, **report.to_dict()}))
    out.commit()
    failed = [c.quantity for c in report.comparisons if not c.passed]
    failed += [f"S({r['mou_mw']:g})" for r in report.area if not r["passed"]]
    if failed:
        print(f"validation failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "pdc": cmd_pdc,
    "prc": cmd_prc,
    "indices": cmd_indices,
    "plan": cmd_plan,
    "validate": cmd_validate,
}


def _date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an ISO date: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="probduck",
                                     description="Probabilistic duck and ramp curves.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input-pv", type=Path)
    common.add_argument("--input-load", type=Path)
    common.add_argument("--periods", type=int, default=24, help="periods per day")
    common.add_argument("--start", type=_date, help="first day to keep (YYYY-MM-DD)")
    common.add_argument("--end", type=_date, help="last day to keep (YYYY-MM-DD)")
    step = common.add_mutually_exclusive_group()
    step.add_argument("--step-mw", type=float, help="lattice step in MW")
    step.add_argument("--bins", type=int, help=f"step = peak load / BINS (default {DEFAULT_BINS})")
    common.add_argument("--alpha", type=float, action="append", dest="alphas",
                        help="confidence level in percent; repeatable (default 50 90 99)")
    common.add_argument("--quantiles", type=float, nargs="+", help="fan CSV quantiles in (0, 1)")
    common.add_argument("--mou-min", type=float)
    common.add_argument("--mou-max", type=float)
    common.add_argument("--mou-step", type=float)
    common.add_argument("--mou-levels", type=float, nargs="+",
                        help="MOU levels for the validate area check")
    common.add_argument("--resources", type=Path, help="YAML/JSON resource file")
    common.add_argument("--base-mou", type=float, help="starting MOU for plan (MW)")
    common.add_argument("--grid-step", type=float, help="plan MOU grid step (MW)")
    common.add_argument("--seed", type=int, default=42, help="Monte Carlo seed (validate)")
    common.add_argument("--samples", type=int, default=1_000_000,
                        help="Monte Carlo draws (validate)")
    common.add_argument("--synth-seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", type=Path, default=Path("out"))
    common.add_argument("-v", "--verbose", action="store_true")

    helps = {
        "synth": "write the bundled synthetic PV/load dataset",
        "pdc": "probabilistic duck curve JSON and quantile fan CSV",
        "prc": "probabilistic ramp curve JSON and quantile fan CSV",
        "indices": "index bundle JSON and curtailment area sweep CSV",
        "plan": "flexible resource plan (break-even stacking)",
        "validate": "Monte Carlo check of every curve period; nonzero exit on failure",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        input_pv=args.input_pv, input_load=args.input_load, periods=args.periods,
        start=args.start, end=args.end, step_mw=args.step_mw, bins=args.bins,
        alphas=tuple(args.alphas) if args.alphas else DEFAULT_ALPHAS,
        quantiles=tuple(args.quantiles) if args.quantiles else None,
        mou_min=args.mou_min, mou_max=args.mou_max, mou_step=args.mou_step,
        resources=args.resources, base_mou=args.base_mou, grid_step=args.grid_step,
        seed=args.seed, samples=args.samples,
        mou_levels=tuple(args.mou_levels) if args.mou_levels else None,
        synth_seed=args.synth_seed, workers=args.workers, out=args.out,
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg)
    except (ProbDuckError, OSError, ValueError) as exc:
        print(f"probduck {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
