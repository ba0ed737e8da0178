"""Measurement-chain emulation: interference read-out, sign
reconstruction, hardware imperfections, and the Monte-Carlo error-bar
fit.  Amplitude-level references come from the scattering module, whose
own tests pin it against the dense oracle."""

import numpy as np
import pytest

from qwtopo import (
    AmbiguousSign,
    ApparatusModel,
    ChainBroken,
    ErrorRanges,
    ScatteringSystem,
    emulate_measurement,
    interfere,
    invariants,
    measured_invariants,
    measured_series,
    monte_carlo_errorbars,
    reconstruct_series,
    reflection_amplitudes,
    relative_sign,
)
from qwtopo.apparatus import (
    ALPHA_GUARD,
    INTENSITY_FLOOR,
    MAGNITUDE_EPS,
    OPPOSITE,
    SAME,
    SignMeasurement,
    perturbed_system,
)

PI = np.pi


# ---------------------------------------------------------------- interfere

def test_equal_pulses_cancel_in_one_port():
    i_h, i_v = interfere(0.5, 0.5, PI / 4)
    assert i_h == 0.0
    assert i_v == pytest.approx(0.25, abs=1e-15)


def test_vanishing_first_pulse_gives_equal_split_scaled_by_cos():
    i_h, i_v = interfere(0.0, 0.6, PI / 4)
    assert i_h == pytest.approx(i_v, abs=1e-15)
    assert i_h + i_v == pytest.approx(0.18, abs=1e-15)


def test_opposite_pulses_at_pi_8():
    i_h, i_v = interfere(0.5, -0.5, PI / 8)
    assert i_h - i_v == pytest.approx(0.17677669529663687, abs=1e-15)
    assert i_h + i_v == pytest.approx(0.25, abs=1e-15)


def test_interference_conserves_energy():
    rng = np.random.default_rng(11)
    for _ in range(300):
        r1, r2 = rng.uniform(-1, 1, size=2)
        alpha = rng.uniform(-2 * PI, 2 * PI)
        i_h, i_v = interfere(r1, r2, alpha)
        s, c = np.sin(alpha), np.cos(alpha)
        assert i_h >= -1e-15 and i_v >= -1e-15
        assert i_h + i_v == pytest.approx(r1 * r1 * s * s + r2 * r2 * c * c,
                                          abs=1e-12)
    # at the working point the split is even in the pulse energies
    i_h, i_v = interfere(0.3, -0.8, PI / 4)
    assert i_h + i_v == pytest.approx(0.5 * (0.09 + 0.64), abs=1e-12)


# ------------------------------------------------------------- relative sign

def test_sign_readout_same_and_opposite():
    i_h, i_v = interfere(0.3, 0.4, PI / 4)
    assert relative_sign(i_h - i_v, PI / 4) == SAME
    i_h, i_v = interfere(0.3, -0.4, PI / 4)
    assert relative_sign(i_h - i_v, PI / 4) == OPPOSITE


def test_sign_readout_rejects_contrast_free_mixing_angles():
    for alpha in (0.0, PI / 2, PI, -PI / 2, 3 * PI / 2):
        with pytest.raises(AmbiguousSign):
            relative_sign(0.1, alpha)
    # the guard band is two degrees wide on either side
    with pytest.raises(AmbiguousSign):
        relative_sign(0.1, np.radians(1.5))
    assert relative_sign(0.1, np.radians(2.5)) == OPPOSITE


def test_sign_readout_rejects_weak_contrast():
    with pytest.raises(AmbiguousSign):
        relative_sign(0.0, PI / 4)
    with pytest.raises(AmbiguousSign):
        relative_sign(5e-5, PI / 4, floor=1e-4)
    assert relative_sign(2e-4, PI / 4, floor=1e-4) == OPPOSITE


def test_sign_readout_is_sound_away_from_the_guard():
    rng = np.random.default_rng(23)
    for _ in range(400):
        r1 = rng.choice([-1, 1]) * rng.uniform(0.1, 1.0)
        r2 = rng.choice([-1, 1]) * rng.uniform(0.1, 1.0)
        k = rng.integers(-2, 3)
        alpha = k * PI / 2 + rng.choice([-1, 1]) * rng.uniform(0.05, PI / 2 - 0.05)
        i_h, i_v = interfere(r1, r2, alpha)
        want = SAME if r1 * r2 > 0 else OPPOSITE
        assert relative_sign(i_h - i_v, alpha) == want


# ------------------------------------------------------------ reconstruction

def test_reconstruction_follows_the_pairwise_chain():
    mags = np.array([0.5, 0.2, 0.1, 0.3])
    signs = [(1, 2, SAME), (2, 3, OPPOSITE), (3, 4, OPPOSITE)]
    rho = reconstruct_series(mags, signs, reference_sign=-1)
    assert np.allclose(rho, [-0.5, -0.2, 0.1, -0.3])


def test_reconstruction_keeps_structural_zeros_exact():
    mags = np.array([0.0, 0.5, 0.0, 0.2, 0.0, 0.1])
    signs = [(2, 4, OPPOSITE), (4, 6, SAME)]
    rho = reconstruct_series(mags, signs, reference_sign=1)
    assert rho[0] == 0.0 and rho[2] == 0.0 and rho[4] == 0.0
    assert np.allclose(rho[[1, 3, 5]], [0.5, -0.2, -0.1])


def test_broken_chain_reports_every_unreachable_step():
    mags = np.full(7, 0.1)
    signs = [(1, 2, SAME), (2, 3, OPPOSITE), (3, 4, SAME),
             (4, 5, None), (5, 6, SAME), (6, 7, SAME)]
    with pytest.raises(ChainBroken) as err:
        reconstruct_series(mags, signs, reference_sign=1)
    assert err.value.undetermined == [5, 6, 7]


def test_unreadable_measurement_objects_break_the_chain_too():
    mags = np.full(3, 0.1)
    flat = SignMeasurement(2, 3, PI / 4, 0.5, 0.5)  # zero contrast
    good = SignMeasurement(1, 2, PI / 4, *interfere(0.1, 0.1, PI / 4))
    with pytest.raises(ChainBroken) as err:
        reconstruct_series(mags, [good, flat], reference_sign=1)
    assert err.value.undetermined == [3]


def test_reference_sign_must_be_a_unit():
    with pytest.raises(ValueError, match="reference sign"):
        reconstruct_series(np.array([0.5]), [], reference_sign=0)


def test_measured_series_restores_the_imaginary_amplitudes():
    rho = np.array([0.3, -0.4, 0.0, 0.1])
    series = measured_series(rho)
    assert np.array_equal(series.r, 1j * rho)
    assert series.max_abs_real() == 0.0


# ------------------------------------------------------ emulate_measurement

def one_coin_sample(theta2_pi: float, t: int) -> ScatteringSystem:
    return ScatteringSystem.for_steps(0.0, theta2_pi * PI, t)


def test_perfect_hardware_reports_ideal_magnitudes():
    system = ScatteringSystem.for_steps(0.35 * PI, 0.74 * PI, 7)
    data = emulate_measurement(system, 7)
    ideal = np.abs(np.imag(reflection_amplitudes(system, 7).r))
    assert np.allclose(data.magnitudes, ideal, atol=1e-12)
    # without loss every recorded step keeps unit total intensity
    assert np.allclose(data.distributions.sum(axis=1), 1.0, atol=1e-12)
    assert data.distributions.shape == (8, data.distributions.shape[1])


def test_perfect_hardware_roundtrips_the_signed_series():
    system = one_coin_sample(1.68, 11)
    data = emulate_measurement(system, 11)
    rho = reconstruct_series(data.magnitudes, data.signs, data.reference_sign)
    ideal = np.imag(reflection_amplitudes(system, 11).r)
    assert np.allclose(rho, ideal, atol=1e-12)
    assert all(rho[j] == 0.0 for j in range(0, 11, 2))  # odd steps stay dark
    pair = measured_invariants(data)
    want = invariants(reflection_amplitudes(system, 11))
    assert pair.q0 == pytest.approx(want.q0, abs=1e-12)
    assert pair.qpi == pytest.approx(want.qpi, abs=1e-12)


def test_emulation_rejects_contrast_free_mixing_angle():
    with pytest.raises(AmbiguousSign):
        emulate_measurement(one_coin_sample(0.52, 7), 7, alpha=PI / 2)


def test_emulation_rejects_unknown_mode():
    with pytest.raises(ValueError, match="unknown mode"):
        emulate_measurement(one_coin_sample(0.52, 5), 5, mode="analog")


def test_shot_noise_is_seeded_and_small_at_large_budget():
    system = ScatteringSystem.for_steps(0.47 * PI, 1.21 * PI, 11)
    kw = dict(mode="shots", shots=10_000_000)
    d1 = emulate_measurement(system, 11, seed=5, **kw)
    d2 = emulate_measurement(system, 11, seed=5, **kw)
    d3 = emulate_measurement(system, 11, seed=6, **kw)
    exact = emulate_measurement(system, 11)
    assert np.array_equal(d1.magnitudes, d2.magnitudes)
    assert not np.array_equal(d1.magnitudes, d3.magnitudes)
    assert np.max(np.abs(d1.magnitudes - exact.magnitudes)) < 2e-3
    noisy = reconstruct_series(d1.magnitudes, d1.signs, d1.reference_sign)
    clean = reconstruct_series(exact.magnitudes, exact.signs, exact.reference_sign)
    big = np.abs(clean) > 1e-6
    assert np.array_equal(np.sign(noisy[big]), np.sign(clean[big]))


# ------------------------------------------------------------- imperfections

def test_hardware_model_validates_efficiencies():
    with pytest.raises(ValueError, match="efficiency_h"):
        ApparatusModel(efficiency_h=0.0)
    with pytest.raises(ValueError, match="efficiency_v"):
        ApparatusModel(efficiency_v=1.2)
    assert ApparatusModel.identity().is_identity
    assert not ApparatusModel(loss_asymmetry=0.01).is_identity


def test_coin_stage_offsets_leave_identity_coins_exact():
    system = one_coin_sample(0.52, 7)
    model = ApparatusModel(eom_error=0.01, sbc_error=-0.004)
    bent = perturbed_system(system, model)
    assert np.array_equal(bent.theta1, system.theta1)  # all zeros stay zeros
    assert np.allclose(bent.theta2, system.theta2 + 0.006, atol=1e-15)
    assert perturbed_system(system, ApparatusModel()) is system


def test_three_percent_loss_biases_invariants_by_well_under_a_tenth():
    system = one_coin_sample(0.52, 11)
    want = invariants(reflection_amplitudes(system, 11))
    for loss in (-0.03, 0.03):
        data = emulate_measurement(system, 11, ApparatusModel(loss_asymmetry=loss))
        pair = measured_invariants(data)
        assert abs(pair.q0 - want.q0) < 0.1
        assert abs(pair.qpi - want.qpi) < 0.1
        assert abs(pair.q0 - want.q0) > 1e-4  # the bias is real, just small


def test_invariant_bias_grows_monotonically_with_loss():
    system = one_coin_sample(0.52, 11)
    want = invariants(reflection_amplitudes(system, 11))
    biases = []
    for loss in (0.0, 0.01, 0.02, 0.03):
        pair = measured_invariants(
            emulate_measurement(system, 11, ApparatusModel(loss_asymmetry=loss)))
        biases.append(abs(pair.q0 - want.q0) + abs(pair.qpi - want.qpi))
    assert biases[0] == pytest.approx(0.0, abs=1e-12)
    assert all(b > a for a, b in zip(biases, biases[1:]))


def flip_midpoints(model: ApparatusModel, t: int = 20) -> list:
    """Sign-change midpoints of Q0*Qpi along theta2 = 2*theta1."""
    out, prev_s, prev_a = [], None, None
    for th1 in np.arange(0.60, 0.7401, 0.005) * PI:
        system = perturbed_system(ScatteringSystem.for_steps(th1, 2 * th1, t), model)
        pair = invariants(reflection_amplitudes(system, t))
        s = np.sign(pair.q0 * pair.qpi)
        if prev_s is not None and s != prev_s:
            out.append(0.5 * (prev_a + th1))
        prev_s, prev_a = s, th1
    return out


def test_one_degree_coin_offset_barely_moves_the_transition():
    ideal = flip_midpoints(ApparatusModel())
    bent = flip_midpoints(ApparatusModel(eom_error=np.radians(1.0)))
    assert len(ideal) == 1 and len(bent) == 1
    assert abs(bent[0] - ideal[0]) < 0.05 * PI


# ------------------------------------------------------------- Monte Carlo

def test_error_range_draws_respect_their_bounds():
    ranges = ErrorRanges()
    rng = np.random.default_rng(0)
    for _ in range(200):
        m = ranges.draw(rng)
        assert 1.0 - ranges.efficiency_span <= m.efficiency_h <= 1.0
        assert 1.0 - ranges.efficiency_span <= m.efficiency_v <= 1.0
        assert abs(m.loss_asymmetry) <= ranges.loss_asymmetry
        assert abs(m.eom_error) <= ranges.eom_error
        assert abs(m.sbc_error) <= ranges.sbc_error


def test_monte_carlo_recovers_an_injected_loss():
    system = ScatteringSystem.for_steps(0.47 * PI, 1.21 * PI, 11)
    truth = ApparatusModel(loss_asymmetry=0.02)
    data = emulate_measurement(system, 11, truth)
    res = monte_carlo_errorbars(data, system, n_sets=300, seed=3)
    assert abs(res.best.loss_asymmetry - truth.loss_asymmetry) < 0.015
    assert res.distance < 1e-4
    assert 0.0 < res.q0_error < 0.2 and 0.0 < res.qpi_error < 0.2
    assert res.n_sets == 300 and res.horizon == 7


def test_monte_carlo_on_clean_data_finds_a_near_identity_model():
    system = ScatteringSystem.for_steps(0.47 * PI, 1.21 * PI, 11)
    data = emulate_measurement(system, 11)
    res = monte_carlo_errorbars(data, system, n_sets=120, seed=1)
    assert abs(res.best.loss_asymmetry) < 0.01
    assert res.distance < 1e-5


def test_monte_carlo_needs_enough_recorded_steps():
    system = one_coin_sample(0.52, 5)
    data = emulate_measurement(system, 5)
    with pytest.raises(ValueError, match="recorded steps"):
        monte_carlo_errorbars(data, system, horizon=7)
