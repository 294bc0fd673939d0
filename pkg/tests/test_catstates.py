import cmath
import math

import numpy as np
import pytest

from catpulse import catstates
from catpulse.catstates import (Branch, CatState, ReflectionNoise,
                                coherent_state, displace, even_odd_cat,
                                gram_matrix, measure_atom,
                                measurement_probabilities, overlap,
                                prepare_atom, product_coherent, reflect,
                                wigner)

import oracles


def test_coherent_state_norm_and_overlap():
    psi = coherent_state(1.0 + 0.5j)
    assert psi.norm() == pytest.approx(1.0)
    phi = coherent_state(0.2 - 0.3j)
    a, b = 1.0 + 0.5j, 0.2 - 0.3j
    expected = cmath.exp(-0.5 * abs(a) ** 2 - 0.5 * abs(b) ** 2 + a.conjugate() * b)
    assert overlap(psi, phi) == pytest.approx(expected)


def test_branch_merging():
    state = CatState(("p0",), (Branch(0.3, "none", (1.0,)),
                               Branch(0.4, "none", (1.0 + 1e-14,))))
    assert len(state.branches) == 1
    assert state.branches[0].coeff == pytest.approx(0.7)


def test_state_json_roundtrip():
    state = even_odd_cat(1.3 + 0.2j, -1)
    back = CatState.from_json(state.to_json())
    assert back.modes == state.modes
    assert overlap(state, back) == pytest.approx(1.0)


def test_even_odd_cat_normalization():
    for parity in (1, -1):
        cat = even_odd_cat(0.8, parity)
        assert cat.norm() == pytest.approx(1.0)


def test_overlap_requires_same_modes():
    with pytest.raises(ValueError):
        overlap(coherent_state(1.0, mode="p0"), coherent_state(1.0, mode="p1"))


def test_atom_overlap_mixing_raises():
    tagged = coherent_state(1.0, atom="0")
    free = coherent_state(1.0, atom="none")
    with pytest.raises(ValueError):
        overlap(tagged, free)


def test_reflect_ideal_flips_atom0_branch():
    state = prepare_atom(coherent_state(1.5, atom="0"), "+")
    out = reflect(state, "p0")
    amps = {b.atom: b.amplitudes[0] for b in out.branches}
    assert amps["0"] == pytest.approx(-1.5)
    assert amps["1"] == pytest.approx(1.5)


def test_reflect_noise_amplitudes_and_photon_conservation():
    noise = ReflectionNoise(eta=0.0274)
    state = prepare_atom(coherent_state(1.0, atom="0"), "+")
    out = reflect(state, "p0", noise)
    amps = {b.atom: b.amplitudes for b in out.branches}
    assert amps["1"][out.mode_index("p0")] == pytest.approx(
        math.sqrt(1.0 - 0.0274))
    # photons lost from the pulse mode reappear in the environment mode
    assert sum(abs(a) ** 2 for a in amps["1"]) == pytest.approx(1.0)
    assert sum(abs(a) ** 2 for a in amps["0"]) == pytest.approx(1.0)


def test_reflect_mismatch_reproduces_overlap_penalty():
    xi0, xi1 = 0.0045, 3e-4
    alpha = 1.2
    noise = ReflectionNoise(eta=0.01, xi0=xi0, xi1=xi1)
    state = prepare_atom(coherent_state(alpha, atom="0"), "+")
    out = reflect(state, "p0", noise)
    b0 = next(b for b in out.branches if b.atom == "0")
    ideal0 = Branch(b0.coeff, "0", (-alpha,) + (0.0,) * (len(out.modes) - 1))
    ov = catstates._gram_factor(ideal0.amplitudes, b0.amplitudes)
    assert ov == pytest.approx(cmath.exp(-abs(alpha) ** 2 * xi0), abs=1e-12)


def test_reflect_requires_atom_branches():
    with pytest.raises(ValueError):
        reflect(coherent_state(1.0, atom="none"), "p0")


def test_displace_group_law():
    state = even_odd_cat(0.9, 1)
    d1, d2 = 0.7 - 0.2j, -0.3 + 1.1j
    seq = displace(displace(state, "p0", d1), "p0", d2)
    direct = displace(state, "p0", d1 + d2)
    phase = cmath.exp((d2 * d1.conjugate() - d2.conjugate() * d1) / 2.0)
    assert overlap(direct, seq) == pytest.approx(phase, abs=1e-12)


def test_displace_moves_coherent_state():
    out = displace(coherent_state(0.5), "p0", 1.0j)
    assert out.branches[0].amplitudes[0] == pytest.approx(0.5 + 1.0j)
    assert out.norm() == pytest.approx(1.0)


def test_prepare_atom_requires_disentangled_atom():
    entangled = reflect(prepare_atom(coherent_state(1.0, atom="0"), "+"), "p0")
    with pytest.raises(ValueError):
        prepare_atom(entangled, "+")


def test_measurement_probabilities_sum_to_norm():
    state = reflect(prepare_atom(coherent_state(1.0, atom="0"), "+"), "p0")
    probs = measurement_probabilities(state)
    assert probs["+"] + probs["-"] == pytest.approx(1.0)
    prob, post = measure_atom(state, "+")
    assert prob == pytest.approx(probs["+"])
    assert post.norm() == pytest.approx(1.0)
    assert all(b.atom == "none" for b in post.branches)


def test_measure_zero_probability_raises():
    state = prepare_atom(coherent_state(0.0, atom="0"), "+")
    state = reflect(state, "p0")  # |0> and |1> branches now identical
    with pytest.raises(ValueError):
        measure_atom(state, "-")


def test_gram_matrix_positive_semidefinite():
    state = reflect(prepare_atom(coherent_state(1.0, atom="0"), "+"), "p0",
                    ReflectionNoise(eta=0.1, xi0=0.02, xi1=0.01))
    evals = np.linalg.eigvalsh(gram_matrix(state))
    assert evals.min() > -1e-12


def test_wigner_against_fock_oracle_cat():
    alpha = 1.4
    cat = even_odd_cat(alpha, -1)
    psi = (oracles.coherent_fock(-alpha, 40) - oracles.coherent_fock(alpha, 40))
    psi = psi / math.sqrt(np.vdot(psi, psi).real)
    axis = np.linspace(-3.0, 3.0, 21)
    for y in (-1.0, 0.0, 0.7):
        z = axis + 1j * y
        assert np.abs(wigner(cat, "p0", z) - oracles.fock_wigner(psi, z)).max() < 1e-10


def test_wigner_traces_out_environment_modes():
    # after a lossy reflection the reduced pulse-mode Wigner function stays
    # normalized and loses fringe contrast relative to the ideal cat
    noise = ReflectionNoise(eta=0.2)
    state = reflect(prepare_atom(coherent_state(1.5, atom="0"), "+"), "p0", noise)
    _, post = measure_atom(state, "+")
    w0_noisy = wigner(post, "p0", 0.0)
    w0_ideal = wigner(even_odd_cat(1.5, 1), "p0", 0.0)
    assert 0.0 < w0_noisy < w0_ideal
