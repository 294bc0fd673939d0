import math

import numpy as np
import pytest

from catpulse import pulses
from catpulse.pulses import ComplexEnvelope, TimeGrid

import oracles


def test_time_grid_properties():
    grid = TimeGrid(0.0, 10.0, 101)
    assert grid.dt == pytest.approx(0.1)
    assert len(grid.times) == 101
    assert grid.times[0] == 0.0
    assert grid.times[-1] == pytest.approx(10.0)


def test_time_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(5.0, 1.0, 10)
    with pytest.raises(ValueError):
        TimeGrid(0.0, 1.0, 1)


def test_default_grid_covers_pulse_and_ringdown():
    grid = pulses.default_grid(210.0)
    assert grid.t_start == 0.0
    assert grid.t_end >= 210.0 + 10.0
    assert grid.dt <= 0.05


def test_gaussian_pulse_normalization_and_peak():
    T = 210.0
    grid = pulses.default_grid(T)
    f = pulses.make_gaussian_pulse(T, grid)
    assert f.norm_sq() == pytest.approx(1.0, abs=1e-12)
    # peak intensity of the normalized Gaussian is sqrt(2/pi) / (T/5)
    peak = math.sqrt(2.0 / math.pi) / (T / 5.0)
    assert np.max(np.abs(f.samples) ** 2) == pytest.approx(peak, rel=1e-6)


def test_gaussian_pulse_matches_analytic_form():
    T = 100.0
    grid = pulses.default_grid(T)
    f = pulses.make_gaussian_pulse(T, grid)
    ref = oracles.gaussian_envelope(T, grid.times)
    assert np.abs(f.samples - ref).max() < 1e-6


def test_gaussian_pulse_grid_validation():
    with pytest.raises(ValueError):
        pulses.make_gaussian_pulse(210.0, TimeGrid(0.0, 100.0, 2001))
    with pytest.raises(ValueError):
        pulses.make_gaussian_pulse(210.0, TimeGrid(0.0, 325.0, 100))


def test_envelope_csv_roundtrip(tmp_path):
    grid = TimeGrid(0.0, 5.0, 64)
    samples = np.exp(1j * grid.times) * np.sin(grid.times)
    env = ComplexEnvelope(grid, samples.astype(complex))
    path = tmp_path / "env.csv"
    env.to_csv(path)
    back = ComplexEnvelope.from_csv(path)
    assert np.array_equal(back.samples, env.samples)
    assert back.grid.n_samples == grid.n_samples


def test_inner_product_conjugate_symmetry():
    grid = TimeGrid(0.0, 4.0, 257)
    f = ComplexEnvelope(grid, np.exp(1j * grid.times))
    g = ComplexEnvelope(grid, (grid.times + 1j) / 5.0)
    assert pulses.inner_product(f, g) == pytest.approx(
        np.conj(pulses.inner_product(g, f)))


def test_mismatch_of_identical_pulses_is_zero():
    grid = pulses.default_grid(50.0)
    f = pulses.make_gaussian_pulse(50.0, grid)
    assert abs(pulses.mismatch(f, f)) < 1e-14


def test_spectrum_roundtrip():
    grid = pulses.default_grid(60.0)
    f = pulses.make_gaussian_pulse(60.0, grid)
    back = pulses.inverse_spectrum(pulses.spectrum(f), grid)
    assert np.abs(back.samples - f.samples).max() < 1e-10


def test_empty_cavity_filter_is_unimodular():
    w = np.linspace(-20.0, 20.0, 401)
    r = pulses.empty_cavity_filter(w, 1.0)
    assert np.abs(np.abs(r) - 1.0).max() < 1e-14
    assert pulses.empty_cavity_filter(0.0, 1.0) == pytest.approx(-1.0)


def test_empty_cavity_reflect_preserves_norm():
    grid = pulses.default_grid(210.0)
    f = pulses.make_gaussian_pulse(210.0, grid)
    f0 = pulses.empty_cavity_reflect(f)
    assert f0.norm_sq() == pytest.approx(1.0, abs=1e-8)


def test_empty_cavity_reflect_matches_time_domain_ode():
    grid = pulses.default_grid(210.0)
    f = pulses.make_gaussian_pulse(210.0, grid)
    f0 = pulses.empty_cavity_reflect(f)
    ref = oracles.empty_cavity_ode(210.0, grid.times)
    assert np.abs(f0.samples - ref).max() < 1e-5


def test_long_pulse_mismatch_value():
    # frozen: xi0 = 1 - <f_in, -f_out0> for the kappa*T = 210 Gaussian
    grid = pulses.default_grid(210.0)
    f = pulses.make_gaussian_pulse(210.0, grid)
    f0 = pulses.empty_cavity_reflect(f)
    xi0 = pulses.mismatch(f, ComplexEnvelope(grid, -f0.samples))
    assert xi0.real == pytest.approx(0.004504820230752604, abs=1e-12)
    assert abs(xi0.imag) < 1e-12


def test_mismatch_scales_inversely_with_duration():
    xi = {}
    for T in (100.0, 400.0):
        grid = pulses.default_grid(T)
        f = pulses.make_gaussian_pulse(T, grid)
        f0 = pulses.empty_cavity_reflect(f)
        xi[T] = pulses.mismatch(f, ComplexEnvelope(grid, -f0.samples)).real
    # xi0 ~ 1/(kappa T)^2 up to the Gaussian width factor
    assert xi[100.0] / xi[400.0] == pytest.approx(16.0, rel=0.05)


def test_apply_spectral_filter_identity():
    grid = pulses.default_grid(40.0)
    f = pulses.make_gaussian_pulse(40.0, grid)
    out = pulses.apply_spectral_filter(f, lambda w: np.ones_like(w))
    assert np.abs(out.samples - f.samples).max() < 1e-12
