"""Optical-gating forward model: gate pulse, phase matching, gated planes."""

import numpy as np
import pytest
from scipy.ndimage import gaussian_filter1d

from biphoton.gating import (
    GatePulse,
    GatingModel,
    ModelRangeError,
    RefractiveModel,
    delta_k,
    gate_spectrum,
    phase_match,
    poissonize,
    simulate_measurements,
)
from biphoton.gating import _gate_kernel, _gated_one_side
from biphoton.grids import IDLER, SIGNAL, TO_TIME, transform_photon
from biphoton.synth import GaussianStateParams, synthesize_state
from biphoton.units import wavelength_to_omega

GATE_CENTER = wavelength_to_omega(775.0)


@pytest.fixture(scope="module")
def chirped_state():
    p = GaussianStateParams(
        rho=-0.8,
        chirp_s=3000.0,
        chirp_i=-5000.0,
        center_s=wavelength_to_omega(823.0),
        center_i=wavelength_to_omega(732.0),
    )
    return synthesize_state(p, n=64, span_sigmas=8)


def test_gate_spectrum_unit_norm():
    g = GatePulse(center=GATE_CENTER, sigma=0.004)
    w = np.linspace(GATE_CENTER - 0.1, GATE_CENTER + 0.1, 4001)
    spec = gate_spectrum(g, w, 0.0)
    norm = np.trapezoid(np.abs(spec) ** 2, w)
    assert norm == pytest.approx(1.0, rel=1e-8)


def test_gate_temporal_width():
    # temporal intensity s.d. must be 1/(2*sigma); direct Fourier quadrature
    sigma = 1.0 / (2 * 130.0)
    g = GatePulse(center=GATE_CENTER, sigma=sigma)
    w = np.linspace(-8 * sigma, 8 * sigma, 1024) + GATE_CENTER
    t = np.linspace(-600, 600, 801)
    spec = gate_spectrum(g, w, 0.0)
    field = np.trapezoid(
        spec[None, :] * np.exp(-1j * np.outer(t, w - GATE_CENTER)), w, axis=1
    ) / np.sqrt(2 * np.pi)
    inten = np.abs(field) ** 2
    inten /= inten.sum()
    mean = (inten * t).sum()
    sd = np.sqrt((inten * (t - mean) ** 2).sum())
    assert sd == pytest.approx(130.0, rel=1e-3)


def test_gate_delay_is_linear_phase():
    g = GatePulse(center=GATE_CENTER, sigma=0.004)
    w = GATE_CENTER + np.linspace(-0.01, 0.01, 11)
    s0 = gate_spectrum(g, w, 0.0)
    s1 = gate_spectrum(g, w, 55.0)
    assert np.allclose(s1, s0 * np.exp(1j * 55.0 * (w - GATE_CENTER)))


def test_ideal_model_matches_transforms(chirped_state):
    m = simulate_measurements(chirped_state, GatingModel(gate=None))
    f_wt = transform_photon(chirped_state, IDLER, TO_TIME)
    f_tt = transform_photon(f_wt, SIGNAL, TO_TIME)
    want = np.abs(f_tt.values) ** 2
    assert np.allclose(m.i_tt.values, want / want.max(), atol=1e-12)


def test_gated_tt_convolution_oracle(chirped_state):
    # at L=0 the double-gated delay map is the ideal |F(t_s, t_i)|^2 blurred
    # by the gate temporal intensity along both axes
    gate = GatePulse(center=GATE_CENTER, sigma=1.0 / (2 * 130.0))
    gm = GatingModel(gate=gate, crystal_length=0.0)
    m = simulate_measurements(chirped_state, gm)
    ideal = simulate_measurements(chirped_state, GatingModel(gate=None))
    tau = 1.0 / (2 * gate.sigma)
    step = m.i_tt.axis_s.step
    want = gaussian_filter1d(ideal.i_tt.values, tau / step, axis=0, mode="constant")
    want = gaussian_filter1d(want, tau / m.i_tt.axis_i.step, axis=1, mode="constant")
    want /= want.max()
    rms = np.sqrt(np.mean((want - m.i_tt.values) ** 2))
    assert rms < 1e-3


def test_gated_one_side_direct_oracle(chirped_state):
    gate = GatePulse(center=GATE_CENTER, sigma=1.0 / (2 * 130.0))
    gm = GatingModel(gate=gate, crystal_length=0.0, upconverted_grid_count=128)
    K_s, du_s = _gate_kernel(chirped_state.axis_s, gm)
    fast = _gated_one_side(chirped_state.values, K_s, du_s, 0)
    dws = chirped_state.axis_s.offsets()
    taus = np.arange(64) - 32
    taus = taus * 2 * np.pi / (64 * chirped_state.axis_s.step)
    direct = np.empty_like(fast)
    for mdx, tau in enumerate(taus):
        A = K_s @ (chirped_state.values * np.exp(-1j * dws * tau)[:, None])
        direct[mdx] = np.sum(np.abs(A) ** 2, axis=0) * du_s
    assert np.max(np.abs(direct - fast)) < 1e-10 * fast.max()


def test_spectrometer_blur_widens_marginal(chirped_state):
    sig = 0.002
    m0 = simulate_measurements(chirped_state, GatingModel(gate=None))
    m1 = simulate_measurements(chirped_state, GatingModel(gate=None, spectrometer_sigma=sig))

    def marginal_sd(grid, axis):
        w = grid.values.sum(axis=1 - axis)
        x = (grid.axis_s if axis == 0 else grid.axis_i).values()
        w = w / w.sum()
        mu = (w * x).sum()
        return np.sqrt((w * (x - mu) ** 2).sum())

    sd0 = marginal_sd(m0.i_ww, 0)
    sd1 = marginal_sd(m1.i_ww, 0)
    assert sd1 == pytest.approx(np.sqrt(sd0**2 + sig**2), rel=1e-3)


def test_matched_model_has_zero_mismatch():
    rm = RefractiveModel.matched(n=1.8)
    w_in = wavelength_to_omega(823.0)
    w_g = GATE_CENTER
    assert delta_k(rm, w_in, w_g, w_in + w_g) == pytest.approx(0.0, abs=1e-12)


def test_tuned_angle_zeroes_mismatch():
    rm = RefractiveModel.default()
    w_in = wavelength_to_omega(823.0)
    tuned = rm.tuned_for(w_in, GATE_CENTER)
    assert 0 < tuned.theta < np.pi / 2
    assert abs(delta_k(tuned, w_in, GATE_CENTER, w_in + GATE_CENTER)) < 1e-9


def test_phase_match_limits():
    assert phase_match(0.0, 1000.0) == pytest.approx(1.0)
    assert phase_match(0.123, 0.0) == pytest.approx(1.0)
    dk = np.linspace(-0.1, 0.1, 41)
    assert np.all(np.abs(phase_match(dk, 2000.0)) <= 1.0 + 1e-12)


def test_model_range_error():
    rm = RefractiveModel.default()
    with pytest.raises(ModelRangeError):
        rm.n_ordinary(100.0)


def test_finite_crystal_suppresses_tails(chirped_state):
    # longer crystal -> narrower phase-matching acceptance -> narrower delay
    # marginal of the double-gated plane
    gate = GatePulse(center=GATE_CENTER, sigma=1.0 / (2 * 50.0))
    rm = RefractiveModel.default().tuned_for(chirped_state.axis_s.center, GATE_CENTER)

    def tau_sd(L):
        gm = GatingModel(gate=gate, crystal_length=L, refractive=(rm if L else None))
        m = simulate_measurements(chirped_state, gm)
        w = m.i_tt.values.sum(axis=1)
        t = m.i_tt.axis_s.values()
        w = w / w.sum()
        mu = (w * t).sum()
        return np.sqrt((w * (t - mu) ** 2).sum())

    assert tau_sd(2000.0) < tau_sd(0.0)


def test_gating_model_validation():
    with pytest.raises(ValueError):
        GatingModel(gate=None, crystal_length=500.0)
    with pytest.raises(ValueError):
        GatingModel(crystal_length=-1.0)


def test_poissonize_deterministic_and_unbiased(chirped_state):
    m = simulate_measurements(chirped_state, GatingModel(gate=None))
    a = poissonize(m.i_ww, 1e4, seed=11)
    b = poissonize(m.i_ww, 1e4, seed=11)
    c = poissonize(m.i_ww, 1e4, seed=12)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert a.values.max() == pytest.approx(1e4, rel=0.05)
    # relative error of the total should follow counting statistics
    total_mean = m.i_ww.values.sum() / m.i_ww.values.max() * 1e4
    assert a.values.sum() == pytest.approx(total_mean, rel=5 / np.sqrt(total_mean))
