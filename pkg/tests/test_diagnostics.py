"""STFT, 2:1 signature detector, and phase portrait."""

import numpy as np
import pytest
from dataclasses import replace
from scipy.signal import chirp

from seasurrogate.diagnostics import (
    DetectorConfig,
    detect_parametric_signature,
    phase_portrait,
    stft,
)
from seasurrogate.errors import ValidationError
from seasurrogate.oracle import (
    default_models,
    parametric_threshold_estimate,
    simulate_roll,
    standard_sea_states,
)
from seasurrogate.rng import stream
from seasurrogate.spectra import ElevationSeries, discretize, superpose


def test_pure_tone_peaks_at_its_frequency():
    dt = 0.2
    t = dt * np.arange(4096)
    x = np.cos(2 * np.pi * 0.1 * t)
    res = stft(x, dt)
    df = res.freqs[1] - res.freqs[0]
    peak_freqs = res.freqs[np.argmax(res.magnitude, axis=0)]
    assert np.all(np.abs(peak_freqs - 0.1) <= df)


def test_zero_series_gives_zero_magnitude():
    res = stft(np.zeros(1000), dt=0.2)
    assert np.all(res.magnitude == 0.0)


def test_frame_count_and_centers():
    dt = 0.5
    x = np.arange(1000, dtype=float)
    res = stft(x, dt, window_len=128, hop=32)
    assert res.n_frames == (1000 - 128) // 32 + 1
    assert res.magnitude.shape == (65, res.n_frames)
    assert res.times[0] == pytest.approx(0.5 * 127 * dt)
    assert res.times[1] - res.times[0] == pytest.approx(32 * dt)


def test_freqs_span_zero_to_nyquist():
    res = stft(np.random.default_rng(0).standard_normal(512), dt=0.25)
    assert res.freqs[0] == 0.0
    assert res.freqs[-1] == pytest.approx(1.0 / (2 * 0.25))


def test_window_longer_than_series_raises():
    with pytest.raises(ValidationError, match="longer than the series"):
        stft(np.zeros(100), dt=0.2, window_len=256)


def test_bad_hop_raises():
    with pytest.raises(ValidationError, match="hop"):
        stft(np.zeros(300), dt=0.2, hop=0)


def test_chirp_ridge_increases_monotonically():
    dt = 0.2
    t = dt * np.arange(6000)
    x = chirp(t, f0=0.05, f1=0.2, t1=t[-1], method="linear")
    res = stft(x, dt)
    ridge = res.freqs[np.argmax(res.magnitude, axis=0)]
    diffs = np.diff(ridge)
    assert np.all(diffs >= 0.0)
    assert ridge[-1] > ridge[0]


def test_parseval_for_single_full_frame():
    # one frame exactly: sum |X_k|^2 with one-sided weights equals N * energy
    rng = np.random.default_rng(7)
    n = 256
    x = rng.standard_normal(n)
    res = stft(x, dt=0.2, window_len=n, hop=n)
    assert res.n_frames == 1
    mag = res.magnitude[:, 0]
    weights = np.full(mag.size, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0  # even window length: real Nyquist bin
    from scipy.signal import get_window

    w = get_window("hann", n, fftbins=True)
    energy_time = np.sum((x[:n] * w) ** 2)
    energy_freq = np.sum(weights * mag**2) / n
    assert energy_freq == pytest.approx(energy_time, rel=1e-6)


def _supercritical_run(seed, duration=420.0, dt=0.2):
    roll = default_models().roll
    eps_c = parametric_threshold_estimate(roll)
    rng = stream(seed, "detector", "pos")
    # comfortably above threshold, yet slow enough that the envelope is
    # still growing across several analysis frames before saturation
    eps = rng.uniform(1.15, 1.5) * eps_c
    psi = rng.uniform(0, 2 * np.pi)
    amp = eps * roll.zeta_ref / roll.h
    n = int(round(duration / dt)) + 1
    t = dt * np.arange(n)
    zeta = amp * np.cos(2 * roll.omega_phi * t + psi)
    zeta = zeta + 0.05 * amp * rng.standard_normal(n)
    phi = simulate_roll(ElevationSeries(dt=dt, samples=zeta), roll,
                        phi0=1e-3 * rng.uniform(0.5, 2.0))
    return zeta, phi, dt


def test_supercritical_two_to_one_run_is_flagged():
    for seed in range(4):
        zeta, phi, dt = _supercritical_run(seed)
        rep = detect_parametric_signature(stft(phi, dt), stft(zeta, dt))
        assert rep.detected
        assert rep.peak_aligned
        # the flagged episode must cover part of the growth phase, which
        # ends once cubic restoring saturates the envelope
        sat = np.argmax(np.abs(phi) > 0.8 * np.max(np.abs(phi))) * dt
        assert rep.intervals[0][0] < sat


def test_linear_runs_are_not_flagged():
    models = default_models()
    roll0 = replace(models.roll, h=0.0)
    dt = 0.2
    t = dt * np.arange(2101)
    for seed in range(4):
        comps = discretize(standard_sea_states()[2], n=200, seed=seed)
        comps = comps.scaled(models.encounter_scale)
        zeta = superpose(comps, t)
        phi = simulate_roll(ElevationSeries(dt=dt, samples=zeta), roll0)
        rep = detect_parametric_signature(stft(phi, dt), stft(zeta, dt))
        assert not rep.detected


def test_excitation_far_from_double_band_is_not_flagged():
    # mild sea: encounter peak sits well away from 2 f_phi
    models = default_models()
    dt = 0.2
    t = dt * np.arange(2101)
    comps = discretize(standard_sea_states()[0], n=200, seed=3)
    zeta = superpose(comps, t)
    phi = simulate_roll(ElevationSeries(dt=dt, samples=zeta), models.roll)
    rep = detect_parametric_signature(stft(phi, dt), stft(zeta, dt))
    assert not rep.detected


def test_hint_centers_wave_band_at_twice_hint():
    zeta, phi, dt = _supercritical_run(0)
    rep = detect_parametric_signature(stft(phi, dt), stft(zeta, dt),
                                      f_phi_hint=1.0 / 12.0)
    assert rep.f_phi == pytest.approx(1.0 / 12.0)
    lo, hi = rep.wave_band
    assert 0.5 * (lo + hi) == pytest.approx(1.0 / 6.0)


def test_hint_outside_nyquist_raises():
    zeta, phi, dt = _supercritical_run(1)
    rs, ws = stft(phi, dt), stft(zeta, dt)
    with pytest.raises(ValidationError, match="resolvable band"):
        detect_parametric_signature(rs, ws, f_phi_hint=3.0)
    with pytest.raises(ValidationError, match="resolvable band"):
        detect_parametric_signature(rs, ws, f_phi_hint=-0.1)


def test_mismatched_spectrograms_raise():
    x = np.random.default_rng(2).standard_normal(2000)
    a = stft(x, 0.2, window_len=256)
    b = stft(x, 0.2, window_len=128)
    with pytest.raises(ValidationError, match="frame grid"):
        detect_parametric_signature(a, b)


def test_detector_config_validation():
    with pytest.raises(ValidationError):
        DetectorConfig(band_rel=0.0)
    with pytest.raises(ValidationError):
        DetectorConfig(min_growth_frames=1)
    with pytest.raises(ValidationError):
        DetectorConfig(growth_min=1.0)
    cfg = DetectorConfig()
    d = cfg.to_dict()
    assert d["band_rel"] == 0.10
    assert d["min_growth_frames"] == 3


def test_phase_portrait_line():
    phi = np.linspace(-1, 1, 50)
    pts = phase_portrait(phi, 0.5 * phi)
    assert pts.shape == (50, 2)
    assert np.allclose(pts[:, 1], 0.5 * pts[:, 0])


def test_phase_portrait_uncorrelated_noise():
    rng = np.random.default_rng(11)
    pts = phase_portrait(rng.standard_normal(20000), rng.standard_normal(20000))
    corr = np.corrcoef(pts[:, 0], pts[:, 1])[0, 1]
    assert abs(corr) < 0.03


def test_phase_portrait_validation():
    with pytest.raises(ValidationError, match="lengths differ"):
        phase_portrait(np.zeros(5), np.zeros(6))
    with pytest.raises(ValidationError, match="decimate"):
        phase_portrait(np.zeros(5), np.zeros(5), decimate=0)
    pts = phase_portrait(np.arange(10.0), np.arange(10.0), decimate=3)
    assert pts.shape == (4, 2)
