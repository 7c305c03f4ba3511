"""Spectrum and synthesis checks.

Expected values come from independent routes: adaptive quadrature for
integrals, hand-evaluated closed forms for point values, and direct
trigonometric evaluation for sampled records.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from seasurrogate.errors import ValidationError
from seasurrogate.spectra import (
    ElevationSeries,
    SeaState,
    WaveComponents,
    band_variance,
    discretize,
    pm_spectrum,
    superpose,
    synthesize,
)

SEA = SeaState(hs=5.09, tp=12.4, label="moderate")


def test_spectrum_integral_closes_to_hs2_over_16():
    # Adaptive quadrature over (0, inf) must recover hs^2 / 16.
    total, err = quad(lambda w: pm_spectrum(SEA, w), 1e-6, np.inf, limit=400)
    assert err < 1e-8
    assert total == pytest.approx(SEA.hs**2 / 16.0, rel=1e-6)


def test_spectrum_peaks_exactly_at_omega_p():
    wp = SEA.omega_p
    w = np.linspace(0.5 * wp, 2.0 * wp, 20001)
    s = pm_spectrum(SEA, w)
    assert abs(w[np.argmax(s)] - wp) < (w[1] - w[0])
    # The derivative changes sign across omega_p.
    eps = 1e-6 * wp
    assert pm_spectrum(SEA, wp - eps) < pm_spectrum(SEA, wp)
    assert pm_spectrum(SEA, wp + eps) < pm_spectrum(SEA, wp)


def test_spectrum_point_value_unit_case():
    # hs = 1, tp = 2*pi gives omega_p = 1 and S(1) = (5/16) e^(-5/4),
    # evaluated by hand: 0.3125 * 0.286505 = 0.0895327.
    sea = SeaState(hs=1.0, tp=2.0 * math.pi)
    assert pm_spectrum(sea, 1.0) == pytest.approx(0.0895327, abs=5e-7)


def test_band_variance_matches_quadrature():
    lo, hi = 0.3 * SEA.omega_p, 5.0 * SEA.omega_p
    numeric, err = quad(lambda w: pm_spectrum(SEA, w), lo, hi, limit=200)
    assert err < 1e-9
    assert band_variance(SEA, lo, hi) == pytest.approx(numeric, rel=1e-9)


def test_default_band_captures_nearly_all_variance():
    lo, hi = 0.3 * SEA.omega_p, 5.0 * SEA.omega_p
    assert band_variance(SEA, lo, hi) / (SEA.hs**2 / 16.0) > 0.995


def test_component_variance_tracks_band_integral():
    comps = discretize(SEA, n=400, seed=1)
    lo, hi = 0.3 * SEA.omega_p, 5.0 * SEA.omega_p
    target, _ = quad(lambda w: pm_spectrum(SEA, w), lo, hi, limit=200)
    assert comps.variance() == pytest.approx(target, rel=5e-3)


def test_component_variance_converges_with_n():
    lo, hi = 0.3 * SEA.omega_p, 5.0 * SEA.omega_p
    target, _ = quad(lambda w: pm_spectrum(SEA, w), lo, hi, limit=200)
    errs = [abs(discretize(SEA, n=n, seed=0).variance() - target) for n in (50, 200, 800)]
    assert errs[0] > errs[1] > errs[2]
    # Midpoint rule is second order; quadrupling n should shrink the error
    # by well over a factor of four.
    assert errs[2] < errs[0] / 16.0


def test_phases_deterministic_and_label_split():
    a = discretize(SEA, n=64, seed=7)
    b = discretize(SEA, n=64, seed=7)
    np.testing.assert_array_equal(a.phases, b.phases)
    other = discretize(SeaState(SEA.hs, SEA.tp, label="other"), n=64, seed=7)
    assert not np.array_equal(a.phases, other.phases)
    third = discretize(SEA, n=64, seed=8)
    assert not np.array_equal(a.phases, third.phases)


def test_phases_uniform_range():
    comps = discretize(SEA, n=5000, seed=3)
    assert comps.phases.min() >= 0.0
    assert comps.phases.max() < 2.0 * math.pi
    # Crude uniformity check: mean near pi, variance near (2 pi)^2 / 12.
    assert abs(comps.phases.mean() - math.pi) < 0.1
    assert abs(comps.phases.var() - (2 * math.pi) ** 2 / 12.0) < 0.15


def test_stratified_frequencies_stay_in_cells():
    n = 100
    lo, hi = 0.3 * SEA.omega_p, 5.0 * SEA.omega_p
    comps = discretize(SEA, n=n, seed=5, stratified=True)
    width = (hi - lo) / n
    edges = lo + width * np.arange(n + 1)
    assert np.all(comps.frequencies > edges[:-1])
    assert np.all(comps.frequencies < edges[1:])
    assert np.all(np.diff(comps.frequencies) > 0)


def test_single_component_synthesis_matches_cosine():
    comps = WaveComponents(
        amplitudes=np.array([1.5]), frequencies=np.array([0.8]), phases=np.array([0.3])
    )
    series = synthesize(comps, dt=0.25, duration=10.0)
    t = series.times()
    np.testing.assert_allclose(series.samples, 1.5 * np.cos(0.8 * t + 0.3), atol=1e-12)
    assert series.n == 41


def test_record_variance_approaches_component_variance():
    comps = discretize(SEA, n=200, seed=11)
    series = synthesize(comps, dt=0.2, duration=3600.0)
    assert np.var(series.samples) == pytest.approx(comps.variance(), rel=0.06)


def test_superpose_agrees_with_synthesize_on_grid():
    comps = discretize(SEA, n=50, seed=2)
    series = synthesize(comps, dt=0.5, duration=20.0)
    np.testing.assert_allclose(superpose(comps, series.times()), series.samples, atol=1e-12)


def test_aliasing_guard():
    comps = WaveComponents(
        amplitudes=np.array([1.0]), frequencies=np.array([10.0]), phases=np.array([0.0])
    )
    with pytest.raises(ValidationError, match="alias"):
        synthesize(comps, dt=0.5, duration=10.0)


def test_validation_rejects_bad_inputs():
    with pytest.raises(ValidationError):
        SeaState(hs=-1.0, tp=10.0)
    with pytest.raises(ValidationError):
        SeaState(hs=1.0, tp=0.0)
    with pytest.raises(ValidationError):
        pm_spectrum(SEA, np.array([0.5, -0.1]))
    with pytest.raises(ValidationError):
        discretize(SEA, n=0)
    with pytest.raises(ValidationError):
        discretize(SEA, band=(2.0, 1.0))
    with pytest.raises(ValidationError):
        WaveComponents(
            amplitudes=np.array([1.0, 1.0]),
            frequencies=np.array([2.0, 1.0]),
            phases=np.array([0.0, 0.0]),
        )
    with pytest.raises(ValidationError):
        ElevationSeries(dt=0.0, samples=np.array([1.0]))


def test_scaled_components_keep_amplitudes():
    comps = discretize(SEA, n=32, seed=0)
    scaled = comps.scaled(2.2333)
    np.testing.assert_array_equal(scaled.amplitudes, comps.amplitudes)
    np.testing.assert_allclose(scaled.frequencies, comps.frequencies * 2.2333)
    assert scaled.variance() == pytest.approx(comps.variance())
