import math

import numpy as np
import pytest

from catpulse import lindblad, pulses
from catpulse.lindblad import (CutoffError, DensityMatrix, HilbertDims,
                               SystemParams, build_operators, evolve)
from catpulse.pulses import ComplexEnvelope, TimeGrid

import oracles


def _zero_pulse(t_end=10.0, n=257):
    grid = TimeGrid(0.0, t_end, n)
    return ComplexEnvelope(grid, np.zeros(n, dtype=complex))


def test_hilbert_dims_layout():
    dims = HilbertDims(2, 10)
    assert dims.dim == 22
    assert dims.level_1 == 0
    assert dims.level_e == 1
    with pytest.raises(ValueError):
        HilbertDims(4, 10)
    with pytest.raises(ValueError):
        HilbertDims(2, 1)


def test_operators_algebra():
    dims = HilbertDims(2, 12)
    ops = build_operators(dims)
    comm = ops.a @ ops.adag - ops.adag @ ops.a
    # canonical commutator away from the truncation edge
    inner = np.delete(np.delete(comm, [12, 25], 0), [12, 25], 1)
    assert np.abs(inner - np.eye(len(inner))).max() < 1e-14
    assert np.abs(ops.jc - ops.jc.conj().T).max() == 0.0
    assert np.abs(ops.num - ops.adag @ ops.a).max() == 0.0


def test_density_matrix_validation():
    dims = HilbertDims(2, 4)
    rho = DensityMatrix.pure(dims, 0, 0)
    rho.validate()
    bad = rho.elements.copy()
    bad[0, 1] = 0.5
    with pytest.raises(ValueError):
        DensityMatrix(dims, bad).validate()


def test_system_params_dt_bound():
    pulse = _zero_pulse()
    params = SystemParams(g=6.0, kappa=1.0, gamma_s=1.0, alpha=0.0, pulse=pulse)
    assert params.dt == pytest.approx(0.05 / 6.0)
    with pytest.raises(ValueError):
        SystemParams(g=6.0, kappa=1.0, gamma_s=1.0, alpha=0.0, pulse=pulse,
                     dt=0.02)


def test_undriven_cavity_decay():
    pulse = _zero_pulse(t_end=8.0, n=257)
    params = SystemParams(g=0.0, kappa=1.0, gamma_s=0.0, alpha=0.0,
                          pulse=pulse, fock_cutoff=4)
    initial = DensityMatrix.pure(params.dims, atom_index=0, n=1)
    traj = evolve(params, initial=initial)
    ref = np.exp(-pulse.grid.times)
    assert np.abs(traj.photon_number - ref).max() < 1e-8


def test_driven_decoupled_cavity_matches_scalar_ode():
    T = 40.0
    grid = pulses.default_grid(T)
    f_in = pulses.make_gaussian_pulse(T, grid)
    params = SystemParams(g=0.0, kappa=1.0, gamma_s=0.0, alpha=0.3,
                          pulse=f_in, fock_cutoff=6,
                          drive_fn=pulses.gaussian_drive(T, grid))
    traj = evolve(params)
    ref = 0.3 * oracles.driven_cavity_amplitude(T, grid.times, 1.0)
    assert np.abs(traj.a_c_expect - ref).max() < 1e-7
    # the decoupled driven cavity stays exactly coherent
    assert lindblad.coherence_diagnostic(traj) < 1e-9


def test_cutoff_error_on_strong_drive():
    T = 40.0
    grid = pulses.default_grid(T)
    f_in = pulses.make_gaussian_pulse(T, grid)
    params = SystemParams(g=0.0, kappa=1.0, gamma_s=0.0, alpha=3.0,
                          pulse=f_in, fock_cutoff=3)
    with pytest.raises(CutoffError):
        evolve(params)


def test_trajectory_csv(tmp_path):
    pulse = _zero_pulse(t_end=2.0, n=65)
    params = SystemParams(g=1.0, kappa=1.0, gamma_s=0.0, alpha=0.0,
                          pulse=pulse, fock_cutoff=3)
    traj = evolve(params)
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "t,re_a,im_a,n_phot,p_e,p_topfock"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (65, 6)


def test_state_sampling_returns_valid_states():
    pulse = _zero_pulse(t_end=5.0, n=129)
    params = SystemParams(g=2.0, kappa=1.0, gamma_s=0.5, alpha=0.0,
                          pulse=pulse, fock_cutoff=4, dt=0.005)
    initial = DensityMatrix.pure(params.dims, atom_index=1, n=0)
    traj = evolve(params, initial=initial, n_state_samples=3)
    assert len(traj.sampled_states) == 3
    for t, rho in traj.sampled_states:
        DensityMatrix(params.dims, rho).validate()
    assert traj.sampled_states[-1][0] == pytest.approx(5.0)


def test_excited_state_decays_at_gamma_s():
    pulse = _zero_pulse(t_end=6.0, n=257)
    params = SystemParams(g=0.0, kappa=1.0, gamma_s=1.5, alpha=0.0,
                          pulse=pulse, fock_cutoff=3)
    initial = DensityMatrix.pure(params.dims, atom_index=1, n=0)
    traj = evolve(params, initial=initial)
    ref = np.exp(-1.5 * pulse.grid.times)
    assert np.abs(traj.excited_pop - ref).max() < 1e-8
