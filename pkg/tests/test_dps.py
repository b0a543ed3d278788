import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from probduck.copula import GaussianCopula
from probduck.dps import (Dps, cdf_at, convolve, ddc_add, ddc_sub, discretize,
                          expected_shortfall_below, negate_dps, quantile)
from probduck.errors import (NormalizationWarning, ProbabilityOutOfRange, StepMismatch,
                             StepTooCoarse)
from probduck.kde import KdeModel, fit_kde


def _dps(origin, masses, step=1.0):
    return Dps.from_masses(origin, step, masses)


def test_invariants_enforced():
    with pytest.raises(ValueError):
        Dps(0.0, 1.0, [0.5, 0.4])
    with pytest.raises(ValueError):
        Dps(0.0, 0.0, [1.0])
    with pytest.raises(ValueError):
        Dps(0.0, 1.0, [0.0, 1.0])
    with pytest.raises(ValueError):
        Dps(0.0, 1.0, [-0.1, 1.1])


def test_from_masses_trims_and_normalizes():
    d = Dps.from_masses(10.0, 2.0, [1e-14, 2.0, 0.0, 2.0, 1e-13])
    assert d.origin == 12.0
    np.testing.assert_array_equal(d.masses, [0.5, 0.0, 0.5])
    assert d.top == 16.0


def test_moments_and_quantiles():
    d = Dps(0.0, 100.0, [0.2, 0.3, 0.5])
    assert d.mean() == pytest.approx(130.0)
    assert d.variance() == pytest.approx(0.2 * 130**2 + 0.3 * 30**2 + 0.5 * 70**2)
    assert d.quantile(0.2) == 0.0
    assert d.quantile(0.21) == 100.0
    np.testing.assert_array_equal(quantile(d, [0.5, 0.51]), [100.0, 200.0])
    with pytest.raises(ProbabilityOutOfRange):
        d.quantile(1.0)


def test_shortfall_example():
    d = Dps(0.0, 100.0, [0.2, 0.3, 0.5])
    assert expected_shortfall_below(d, 150.0) == pytest.approx(45.0, abs=1e-12)
    assert expected_shortfall_below(d, 0.0) == 0.0


def test_cdf_at():
    d = Dps(0.0, 100.0, [0.2, 0.3, 0.5])
    np.testing.assert_allclose(cdf_at(d, [-1, 0, 99, 100, 250]), [0, 0.2, 0.2, 0.5, 1.0])


def test_round_trip_dict():
    d = _dps(3.5, [0.1, 0.6, 0.3], 0.5)
    assert Dps.from_dict(d.to_dict()) == d


def test_discretize_point_masses_by_hand():
    # two far-apart narrow kernels: half of the mass in each bin
    model = KdeModel(np.array([0.0, 10.0]), 1e-3)
    d = discretize(model, 1.0, strict=False)
    assert d.origin == 0.0 and d.top == 10.0
    assert d.masses[0] == pytest.approx(0.5, abs=1e-12)
    assert d.masses[-1] == pytest.approx(0.5, abs=1e-12)


def test_discretize_matches_cdf_differences():
    model = fit_kde(np.random.default_rng(1).normal(50, 5, 200))
    d = discretize(model, 0.5)
    inner = model.cdf(d.values[1:-1] + 0.25) - model.cdf(d.values[1:-1] - 0.25)
    np.testing.assert_allclose(d.masses[1:-1], inner / inner.sum() * (1 - d.masses[0] - d.masses[-1]),
                               rtol=1e-9)
    assert d.mean() == pytest.approx(model.mean, abs=0.01)
    assert d.variance() == pytest.approx(model.variance + 0.5**2 / 12, rel=0.01)


def test_discretize_lower_folds_mass():
    model = KdeModel(np.array([0.0, 0.5, 1.0]), 0.5)
    d = discretize(model, 0.25, lower=0.0)
    assert d.origin == 0.0
    assert d.masses[0] == pytest.approx(model.cdf(0.125), abs=1e-12)


def test_discretize_too_coarse():
    model = fit_kde([0.0, 1.0, 2.0])
    with pytest.raises(StepTooCoarse):
        discretize(model, 100.0)
    assert len(discretize(model, 100.0, strict=False)) >= 1


def test_degenerate_model_single_bin():
    d = discretize(fit_kde([7.0, 7.0]), 1.0)
    assert len(d) == 1 and d.origin == 7.0


def test_negate_dps():
    d = _dps(2.0, [0.1, 0.2, 0.7])
    n = negate_dps(d)
    assert n.origin == -4.0
    np.testing.assert_array_equal(n.masses, [0.7, 0.2, 0.1])
    assert n.mean() == pytest.approx(-d.mean())


def test_step_mismatch():
    with pytest.raises(StepMismatch):
        ddc_add(_dps(0, [0.5, 0.5], 1.0), _dps(0, [0.5, 0.5], 2.0), GaussianCopula.independent())


def test_point_mass_shift():
    a = _dps(5.0, [0.25, 0.5, 0.25])
    p = Dps.point_mass(-3.0, 1.0)
    c = GaussianCopula.from_tau(0.8)
    assert ddc_add(a, p, c) == a.shift(-3.0)
    assert ddc_add(p, a, c) == a.shift(-3.0)
    assert ddc_sub(a, p, c) == a.shift(3.0)


def test_two_by_two_independent_by_hand():
    a = _dps(0.0, [0.5, 0.5])
    out = ddc_add(a, a, GaussianCopula.independent())
    np.testing.assert_allclose(out.masses, [0.25, 0.5, 0.25], atol=1e-15)


@pytest.mark.filterwarnings("ignore::probduck.errors.NormalizationWarning")
def test_two_by_two_dependent_by_hand():
    # midpoint cumulatives 0.25 and 0.75 -> normal scores -g and g
    from probduck.normal import norm_ppf
    a = _dps(0.0, [0.5, 0.5])
    c = GaussianCopula.from_tau(0.5)
    g = norm_ppf(0.75)
    r = c.rho
    same = np.exp(-(r * r * 2 * g * g - 2 * r * g * g) / (2 * (1 - r * r)))
    cross = np.exp(-(r * r * 2 * g * g + 2 * r * g * g) / (2 * (1 - r * r)))
    w = np.array([same, 2 * cross, same])
    out = ddc_add(a, a, c)
    np.testing.assert_allclose(out.masses, w / w.sum(), rtol=1e-13)
    assert out.masses[1] < 0.5


def test_right_closed_rule_available():
    a = _dps(0.0, [0.2, 0.3, 0.5])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NormalizationWarning)
        right = ddc_add(a, a, GaussianCopula.from_tau(0.5), cumulative="right")
    assert right.masses.sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ddc_add(a, a, GaussianCopula.from_tau(0.5), cumulative="left")


def test_normalization_warning_under_strong_dependence():
    a = _dps(0.0, np.full(40, 1 / 40))
    with pytest.warns(NormalizationWarning):
        ddc_add(a, a, GaussianCopula.from_tau(0.95), cumulative="right")


def test_dependence_spreads_sum():
    a = _dps(0.0, np.exp(-0.5 * ((np.arange(41) - 20) / 6.0) ** 2))
    ind = ddc_add(a, a, GaussianCopula.independent())
    pos = ddc_add(a, a, GaussianCopula.from_tau(0.6))
    neg = ddc_add(a, a, GaussianCopula.from_tau(-0.6))
    assert neg.variance() < ind.variance() < pos.variance()
    rho = GaussianCopula.from_tau(0.6).rho
    assert pos.variance() == pytest.approx(2 * a.variance() * (1 + rho), rel=0.05)


masses_st = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=25).filter(lambda m: sum(m) > 1e-3)


def _build(origin, masses, step=0.5):
    return Dps.from_masses(origin * step, step, masses)


@settings(max_examples=80, deadline=None)
@given(st.integers(-50, 50), masses_st, st.integers(-50, 50), masses_st)
def test_independence_reduces_to_convolution(oa, ma, ob, mb):
    a, b = _build(oa, ma), _build(ob, mb)
    c0 = GaussianCopula.independent()
    plain = convolve(a, b)
    got = ddc_add(a, b, c0)
    assert got.origin == plain.origin and len(got) == len(plain)
    np.testing.assert_allclose(got.masses, plain.masses, atol=1e-12, rtol=0)
    diff = ddc_sub(a, b, c0)
    ref = convolve(a, negate_dps(b))
    np.testing.assert_allclose(diff.masses, ref.masses, atol=1e-12, rtol=0)


@pytest.mark.filterwarnings("ignore::probduck.errors.NormalizationWarning")
@settings(max_examples=80, deadline=None)
@given(st.integers(-50, 50), masses_st, st.integers(-50, 50), masses_st, st.floats(-0.9, 0.9))
def test_mass_conserved_within_support(oa, ma, ob, mb, tau):
    a, b = _build(oa, ma), _build(ob, mb)
    out = ddc_add(a, b, GaussianCopula.from_tau(tau))
    assert out.masses.sum() == pytest.approx(1.0, abs=1e-12)
    assert out.origin >= a.origin + b.origin - 1e-9
    assert out.top <= a.top + b.top + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(-50, 50), masses_st, st.integers(-20, 20))
def test_shift_is_exact(oa, ma, k):
    a = _build(oa, ma)
    moved = ddc_add(a, Dps.point_mass(k * a.step, a.step), GaussianCopula.from_tau(0.3))
    assert moved.mean() == pytest.approx(a.mean() + k * a.step, abs=1e-9)
    np.testing.assert_array_equal(moved.masses, a.masses)


@settings(max_examples=60, deadline=None)
@given(st.integers(-50, 50), masses_st, st.floats(0.001, 0.998), st.floats(0.0, 0.998))
def test_quantile_monotone(oa, ma, q1, gap):
    a = _build(oa, ma)
    q2 = min(0.999, q1 + gap)
    assert a.quantile(q1) <= a.quantile(q2)


@settings(max_examples=60, deadline=None)
@given(st.integers(-50, 50), masses_st, st.floats(-40, 40), st.floats(0.01, 10))
def test_shortfall_convex_in_level(oa, ma, level, h):
    a = _build(oa, ma)
    f = [expected_shortfall_below(a, level + k * h) for k in range(3)]
    assert f[0] <= f[1] + 1e-12
    assert f[2] - 2 * f[1] + f[0] >= -1e-9
