"""Reference-model checks.

Integration accuracy is judged against an adaptive high-order solver and
hand-derived analytic solutions; stability-boundary behaviour is judged
against the first-order averaging results for a damped oscillator with
2:1 stiffness modulation (threshold depth 4 nu / omega, peak growth rate
eps * omega / 4 - nu).
"""

import math
import os

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from seasurrogate import dataset, oracle, spectra
from seasurrogate.errors import SimulationError, ValidationError
from seasurrogate.oracle import LinearDofModel, OracleModels, RollModel

WPHI = 2.0 * math.pi / 12.0


def make_roll(nu_ratio=0.08, h=0.5, c3=0.3, m_dir=0.02):
    return RollModel(
        omega_phi=WPHI, nu=nu_ratio * WPHI, h=h, c3=c3, zeta_ref=2.665, m_dir=m_dir
    )


def test_linear_dof_matches_adaptive_solver():
    model = LinearDofModel(omega_n=0.785, zeta_damp=0.45, gain=0.85)
    sea = spectra.SeaState(5.09, 12.4, "ref")
    comps = spectra.discretize(sea, n=100, seed=0)
    wave = spectra.synthesize(comps, dt=0.2, duration=120.0)
    zeta_half = spectra.superpose(comps, 0.1 * np.arange(2 * wave.n - 1))
    mine = oracle.simulate_linear_dof(wave, model, zeta_half=zeta_half)

    def rhs(t, s):
        z = spectra.superpose(comps, np.array([t]))[0]
        return [
            s[1],
            model.gain * model.omega_n**2 * z
            - 2 * model.zeta_damp * model.omega_n * s[1]
            - model.omega_n**2 * s[0],
        ]

    ref = solve_ivp(rhs, (0, 120.0), [0, 0], t_eval=wave.times(),
                    rtol=1e-10, atol=1e-12, max_step=0.05)
    assert np.max(np.abs(mine - ref.y[0])) < 1e-4
    assert np.std(ref.y[0]) > 0.5  # the comparison is not vacuous


def test_roll_integration_is_fourth_order():
    # Single-component forcing, smooth everywhere; halving dt should cut
    # the error against a tight reference by roughly 2**4.
    model = make_roll()
    comps = spectra.WaveComponents(
        amplitudes=np.array([2.0]), frequencies=np.array([2 * WPHI]), phases=np.array([0.4])
    )

    def rhs(t, s):
        z = 2.0 * math.cos(2 * WPHI * t + 0.4)
        mod = model.h * z / model.zeta_ref
        return [
            s[1],
            model.m_dir * z - 2 * model.nu * s[1]
            - model.omega_phi**2 * (1 + mod) * s[0] - model.c3 * s[0] ** 3,
        ]

    duration = 60.0
    ref = solve_ivp(rhs, (0, duration), [0.1, 0.0], t_eval=[duration],
                    rtol=1e-12, atol=1e-14, max_step=0.02)
    ref_end = ref.y[0, -1]

    errs = []
    for dt in (0.2, 0.1, 0.05):
        n = int(round(duration / dt)) + 1
        t_half = 0.5 * dt * np.arange(2 * n - 1)
        zh = spectra.superpose(comps, t_half)
        wave = spectra.ElevationSeries(dt=dt, samples=zh[::2])
        phi = oracle.simulate_roll(wave, model, phi0=0.1, zeta_half=zh)
        errs.append(abs(phi[-1] - ref_end))
    assert errs[0] > errs[1] > errs[2]
    assert errs[0] / errs[1] > 8.0
    assert errs[1] / errs[2] > 8.0


def test_free_roll_decay_matches_analytic_solution():
    # With no forcing and c3 = 0 the equation is linear; the analytic
    # underdamped solution is phi0 e^(-nu t) (cos wd t + nu/wd sin wd t).
    model = make_roll(c3=0.0, m_dir=0.0)
    dt, duration, phi0 = 0.05, 120.0, 0.2
    n = int(round(duration / dt)) + 1
    wave = spectra.ElevationSeries(dt=dt, samples=np.zeros(n))
    phi = oracle.simulate_roll(wave, model, phi0=phi0)
    t = wave.times()
    wd = model.omega_phi * math.sqrt(1 - (model.nu / model.omega_phi) ** 2)
    expected = phi0 * np.exp(-model.nu * t) * (np.cos(wd * t) + model.nu / wd * np.sin(wd * t))
    assert np.max(np.abs(phi - expected)) < 1e-6


def test_zero_elevation_zero_motion():
    wave = spectra.ElevationSeries(dt=0.2, samples=np.zeros(500))
    assert np.all(oracle.simulate_roll(wave, make_roll()) == 0.0)
    assert np.all(oracle.simulate_linear_dof(wave, LinearDofModel(0.8, 0.4, 1.0)) == 0.0)


def test_measured_threshold_tracks_damping_estimate():
    model = make_roll(nu_ratio=0.05)
    est = oracle.parametric_threshold_estimate(model)
    measured = oracle.measure_parametric_threshold(model)
    assert measured == pytest.approx(est, rel=0.03)


def test_growth_sign_flips_across_threshold():
    model = make_roll()
    ec = oracle.parametric_threshold_estimate(model)
    assert oracle.modulation_growth_rate(model, 1.15 * ec) > 0
    assert oracle.modulation_growth_rate(model, 0.85 * ec) < 0


def test_growth_rate_magnitude_matches_averaging_prediction():
    # At perfect 2:1 tuning the averaged growth rate is eps*w/4 - nu.
    model = make_roll()
    for eps_rel in (0.7, 1.3):
        eps = eps_rel * oracle.parametric_threshold_estimate(model)
        predicted = eps * model.omega_phi / 4.0 - model.nu
        measured = oracle.modulation_growth_rate(model, eps)
        assert measured == pytest.approx(predicted, rel=0.10)


def test_supercritical_linear_run_diverges_with_step_index():
    model = make_roll(c3=0.0, m_dir=0.0)
    eps = 3.0 * oracle.parametric_threshold_estimate(model)
    with pytest.raises(SimulationError) as exc:
        oracle.modulation_growth_rate(model, eps, duration=2000.0, phi0=0.5)
    assert exc.value.step is not None


def test_realization_shapes_and_probe_variance():
    models = oracle.default_models()
    sea = spectra.SeaState(10.66, 13.4, "SS-3")
    pooled = []
    for seed in range(4):
        r = oracle.simulate_realization(sea, seed, models, dt=0.2, duration=360.0)
        assert r.n_samples == 1801
        assert r.probes.shape == (1, 1801)
        assert r.motions.shape == (3, 1801)
        pooled.append(r.probes[0])
    # Encounter compression shifts frequencies, not amplitudes, so the
    # record variance still targets hs^2/16.
    var = np.var(np.concatenate(pooled))
    assert var == pytest.approx(sea.hs**2 / 16.0, rel=0.2)


def test_encounter_scaling_raises_zero_crossing_rate():
    sea = spectra.SeaState(5.09, 12.4, "SS-2")
    base = oracle.default_models()

    def crossings(scale):
        models = OracleModels(
            roll=base.roll, heave=base.heave, pitch=base.pitch,
            pitch_roll_coupling=base.pitch_roll_coupling, encounter_scale=scale,
        )
        r = oracle.simulate_realization(sea, 0, models, dt=0.2, duration=600.0)
        p = r.probes[0]
        return np.count_nonzero(np.diff(np.signbit(p)))

    ratio = crossings(2.2333) / crossings(1.0)
    # Zero-crossing rate of a Gaussian process scales linearly with a
    # uniform frequency compression.
    assert ratio == pytest.approx(2.2333, rel=0.08)


def test_linear_channels_stay_gaussian_while_severe_roll_is_not():
    models = oracle.default_models()
    sea = spectra.SeaState(10.66, 13.4, "SS-3")

    def kurt(x):
        x = x - x.mean()
        return np.mean(x**4) / np.mean(x**2) ** 2 - 3.0

    rolls, heaves = [], []
    for seed in range(6):
        r = oracle.simulate_realization(sea, seed, models, duration=360.0)
        rolls.append(r.motion("roll"))
        heaves.append(r.motion("heave"))
    assert abs(kurt(np.concatenate(heaves))) < 0.5
    assert kurt(np.concatenate(rolls)) > 1.0


def test_campaign_roundtrip_and_byte_determinism(tmp_path):
    models = oracle.default_models()
    states = [spectra.SeaState(3.53, 9.7, "SS-1"), spectra.SeaState(10.66, 13.4, "SS-3")]
    dirs = [tmp_path / "a", tmp_path / "b"]
    manifests = [
        oracle.generate_campaign(states, 2, models, dt=0.2, duration=60.0,
                                 out_dir=d, warmup=20.0)
        for d in dirs
    ]
    assert manifests[0] == manifests[1]
    for state in manifests[0]["states"]:
        for fname in state["files"]:
            a = (dirs[0] / fname).read_bytes()
            b = (dirs[1] / fname).read_bytes()
            assert a == b, f"{fname} differs between identical runs"
    reals, manifest = dataset.load_campaign(dirs[0] / "manifest.json")
    assert len(reals) == 4
    assert {r.label for r in reals} == {"SS-1", "SS-3"}
    assert manifest["models"] == models.to_dict()
    # Distinct seeds must give distinct records.
    assert not np.array_equal(reals[0].probes, reals[1].probes)


def test_realization_seed_controls_content(tmp_path):
    models = oracle.default_models()
    sea = spectra.SeaState(5.09, 12.4, "SS-2")
    a = oracle.simulate_realization(sea, 3, models, duration=60.0)
    b = oracle.simulate_realization(sea, 3, models, duration=60.0)
    c = oracle.simulate_realization(sea, 4, models, duration=60.0)
    np.testing.assert_array_equal(a.probes, b.probes)
    np.testing.assert_array_equal(a.motions, b.motions)
    assert not np.array_equal(a.probes, c.probes)


def test_validation_errors():
    with pytest.raises(ValidationError):
        RollModel(omega_phi=-1.0, nu=0.1, h=0.5, c3=0.3, zeta_ref=1.0, m_dir=0.0)
    with pytest.raises(ValidationError):
        LinearDofModel(omega_n=0.8, zeta_damp=0.0, gain=1.0)
    wave = spectra.ElevationSeries(dt=0.2, samples=np.zeros(100))
    with pytest.raises(ValidationError):
        oracle.simulate_roll(wave, make_roll(), zeta_half=np.zeros(57))
    models = oracle.default_models()
    with pytest.raises(ValidationError):
        oracle.generate_campaign(
            [spectra.SeaState(1.0, 8.0, "X"), spectra.SeaState(2.0, 9.0, "X")],
            1, models, dt=0.2, duration=30.0, out_dir="/tmp/should_not_exist_dup",
        )
