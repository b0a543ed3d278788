import json

import numpy as np
import pytest

from probduck.copula import GaussianCopula
from probduck.curves import (CurveKind, ProbCurve, aggregate_fleet, build_pdc, build_prc,
                             fit_fleet, fit_model, pdc_from_model, prc_from_pdc, resolve_step)
from probduck.dps import Dps
from probduck.ingest import SeriesKind, panel_from_arrays
from probduck.synth import synth_panel


def test_resolve_step(panel):
    assert resolve_step(panel, bins=500) == pytest.approx(panel.peak_load() / 500)
    assert resolve_step(panel) == resolve_step(panel, bins=500)
    assert resolve_step(panel, step_mw=3.0) == 3.0
    with pytest.raises(ValueError):
        resolve_step(panel, step_mw=0.0)
    with pytest.raises(ValueError):
        resolve_step(panel, bins=0)


def test_shapes(pdc, prc, panel, step):
    assert pdc.kind is CurveKind.PDC and len(pdc) == panel.periods_per_day
    assert prc.kind is CurveKind.PRC and len(prc) == panel.periods_per_day - 1
    assert all(d.step == step for d in (*pdc.periods, *prc.periods))
    assert all(abs(d.masses.sum() - 1) < 1e-9 for d in pdc.periods)


def test_pdc_means_track_observed(pdc, panel, step):
    observed = panel.net_load().mean(axis=0)
    np.testing.assert_allclose(pdc.means(), observed, atol=4 * step)


def test_prc_means_track_differences(prc, pdc, step):
    np.testing.assert_allclose(prc.means(), np.diff(pdc.means()), atol=2 * step)


def test_night_pv_is_point_mass_at_zero(panel, step):
    dark = aggregate_fleet(panel, SeriesKind.PV, 0, step)
    assert len(dark) == 1 and dark.origin == 0.0


def test_fleet_records(pdc, panel):
    pairs = {r.pair for r in pdc.copulas if r.t == 12}
    ids = panel.ids("PV")
    assert f"PV_PV:{ids[0]}|{ids[1]}" in pairs
    assert f"PV_PV:{'+'.join(ids[:3])}|{ids[3]}" in pairs
    assert "PV_load" in pairs


def test_fit_fleet_fold(panel):
    fleet = fit_fleet(panel, SeriesKind.PV, 12)
    assert len(fleet.fold) == 3 and len(fleet.marginals) == 4
    assert all(c.tau > 0.3 for c in fleet.fold)
    forced = fit_fleet(panel, SeriesKind.PV, 12, force_independent=True)
    assert all(c.rho == 0.0 for c in forced.fold)


def test_json_round_trip(pdc):
    back = ProbCurve.from_dict(json.loads(json.dumps(pdc.to_dict())))
    assert back.step == pdc.step and len(back) == len(pdc)
    assert all(a == b for a, b in zip(back.periods, pdc.periods))


def test_workers_give_identical_curves(panel, step, pdc):
    threaded = pdc_from_model(fit_model(panel, workers=2), step, workers=2)
    assert all(a == b for a, b in zip(threaded.periods, pdc.periods))


def test_prc_needs_pdc(pdc, prc, model):
    with pytest.raises(ValueError):
        prc_from_pdc(prc, model.adjacent[:-1])
    with pytest.raises(ValueError):
        prc_from_pdc(pdc, model.adjacent[:-1])


def test_mixed_steps_rejected():
    with pytest.raises(ValueError):
        ProbCurve(CurveKind.PDC, (Dps.point_mass(0, 1.0), Dps.point_mass(0, 2.0)), 1.0)


@pytest.mark.filterwarnings("ignore::probduck.errors.NormalizationWarning")
def test_identical_series_add_like_scaling():
    # two identical load series: the sum should look like 2x, not a convolution
    rng = np.random.default_rng(3)
    base = rng.normal(100, 10, (200, 2))
    panel = panel_from_arrays({"pv": np.zeros((200, 2))}, {"a": base, "b": base.copy()})
    fleet = aggregate_fleet(panel, SeriesKind.LOAD, 0, 0.5)
    ind = aggregate_fleet(panel, SeriesKind.LOAD, 0, 0.5, force_independent=True)
    kde = fit_fleet(panel, SeriesKind.LOAD, 0).marginals[0]
    assert ind.variance() < fleet.variance()
    assert ind.variance() == pytest.approx(2 * kde.variance, rel=0.05)
    assert fleet.variance() == pytest.approx(4 * kde.variance, rel=0.10)


def test_small_panel_end_to_end():
    panel = synth_panel(n_pv=2, n_load=1, days=40, periods_per_day=6, seed=5)
    step = resolve_step(panel, bins=200)
    pdc = build_pdc(panel, step)
    prc = build_prc(pdc, panel)
    assert len(pdc) == 6 and len(prc) == 5
    assert np.all(np.isfinite(pdc.means()))


@pytest.mark.parametrize("t", [11, 12, 13])
def test_pv_dependence_widens_aggregate(panel, step, t):
    fitted = aggregate_fleet(panel, SeriesKind.PV, t, step)
    forced = aggregate_fleet(panel, SeriesKind.PV, t, step, force_independent=True)
    width = lambda d: d.quantile(0.995) - d.quantile(0.005)  # noqa: E731
    assert width(fitted) > width(forced)


def test_ramp_variance_below_independent(panel, pdc, prc):
    forced = prc_from_pdc(pdc, [GaussianCopula.independent()] * (len(pdc) - 1))
    for t in range(len(prc)):
        assert prc[t].variance() < forced[t].variance()


def test_point_mass_panel():
    days = 40
    load = np.tile([1000.0, 1300.0], (days, 1))
    pv = np.tile([400.0, 400.0], (days, 1))
    panel = panel_from_arrays({"pv": pv}, {"load": load})
    pdc = build_pdc(panel, 1.0)
    assert [(len(d), d.origin) for d in pdc.periods] == [(1, 600.0), (1, 900.0)]
    prc = build_prc(pdc, panel)
    assert len(prc[0]) == 1 and prc[0].origin == 300.0


def test_ramps_telescope(pdc, prc, step):
    assert prc.means().sum() == pytest.approx(pdc.means()[-1] - pdc.means()[0], abs=5 * step)


def test_full_independent_rebuild_has_wider_ramps(panel, step, prc):
    forced = build_prc(build_pdc(panel, step, force_independent=True), panel,
                       force_independent=True)
    assert all(prc[t].variance() < forced[t].variance() for t in range(len(prc)))


def test_fold_order_sensitivity_is_small(panel, step):
    # the pairwise fold depends on series order; measure it on the noon PV fleet
    ids = panel.ids("PV")
    pv = {k: panel.values[panel.index_of(k)] for k in reversed(ids)}
    load = {k: panel.values[panel.index_of(k)] for k in panel.ids("LOAD")}
    flipped = panel_from_arrays(pv, load, start=panel.days[0])
    a = aggregate_fleet(panel, SeriesKind.PV, 12, step)
    b = aggregate_fleet(flipped, SeriesKind.PV, 12, step)
    assert b.mean() == pytest.approx(a.mean(), abs=step)
    assert b.variance() == pytest.approx(a.variance(), rel=0.05)
