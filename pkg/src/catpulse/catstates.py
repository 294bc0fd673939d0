"""Exact algebra of coherent-state superpositions entangled with the atom.

States are kept pure by purification: photon loss and mode mismatch from a
cavity reflection are routed into explicit environment modes, so every
overlap is an exact closed-form Gram sum.  Branch amplitudes live on an
ordered list of mode labels; all operations return new states.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

ATOM_LABELS = ("0", "1", "none")
MERGE_TOL = 1e-12


@dataclass(frozen=True)
class Branch:
    """One coherent component: coefficient, atom label, per-mode amplitudes."""

    coeff: complex
    atom: str
    amplitudes: tuple

    def __post_init__(self):
        if self.atom not in ATOM_LABELS:
            raise ValueError(f"unknown atom label {self.atom!r}")
        object.__setattr__(self, "amplitudes",
                           tuple(complex(a) for a in self.amplitudes))


@dataclass(frozen=True)
class ReflectionNoise:
    """Per-reflection noise figures: photon loss eta, shape mismatches xi0/xi1."""

    eta: float
    xi0: complex = 0.0
    xi1: complex = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")

    @classmethod
    def from_outcome(cls, outcome) -> "ReflectionNoise":
        """Build from a reflection-analysis outcome (duck-typed)."""
        return cls(eta=outcome.eta, xi0=complex(outcome.xi0 or 0.0),
                   xi1=complex(outcome.xi1 or 0.0))


IDEAL = ReflectionNoise(eta=0.0)


def _merge(branches: Iterable[Branch]) -> tuple:
    merged: list[Branch] = []
    for b in branches:
        for i, m in enumerate(merged):
            if m.atom == b.atom and len(m.amplitudes) == len(b.amplitudes) and all(
                    abs(x - y) <= MERGE_TOL for x, y in zip(m.amplitudes, b.amplitudes)):
                merged[i] = Branch(m.coeff + b.coeff, m.atom, m.amplitudes)
                break
        else:
            merged.append(b)
    return tuple(b for b in merged if abs(b.coeff) > 1e-15)


@dataclass(frozen=True)
class CatState:
    """Superposition of multimode coherent states tagged with atomic levels."""

    modes: tuple
    branches: tuple

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        branches = _merge(self.branches)
        if not branches:
            raise ValueError("state needs at least one branch")
        for b in branches:
            if len(b.amplitudes) != len(self.modes):
                raise ValueError("branch amplitude count must match mode count")
        object.__setattr__(self, "branches", branches)

    def norm(self) -> float:
        return math.sqrt(max(overlap(self, self).real, 0.0))

    def normalized(self) -> "CatState":
        n = self.norm()
        if n <= 0.0:
            raise ValueError("cannot normalize a zero-norm state")
        return CatState(self.modes, tuple(
            Branch(b.coeff / n, b.atom, b.amplitudes) for b in self.branches))

    def mode_index(self, mode: str) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise ValueError(f"mode {mode!r} not present") from None

    def mean_photon_numbers(self) -> dict:
        """Per-branch total mean photon number over all modes (exact, per branch)."""
        return {i: sum(abs(a) ** 2 for a in b.amplitudes)
                for i, b in enumerate(self.branches)}

    def to_json(self, path=None):
        doc = {
            "modes": list(self.modes),
            "branches": [
                {"coeff_re": b.coeff.real, "coeff_im": b.coeff.imag,
                 "atom": b.atom,
                 "amplitudes": [[a.real, a.imag] for a in b.amplitudes]}
                for b in self.branches],
        }
        if path is None:
            return doc
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
        return doc

    @classmethod
    def from_json(cls, doc) -> "CatState":
        if isinstance(doc, (str, bytes)):
            doc = json.loads(doc)
        elif hasattr(doc, "read"):
            doc = json.load(doc)
        return cls(tuple(doc["modes"]), tuple(
            Branch(complex(b["coeff_re"], b["coeff_im"]), b["atom"],
                   tuple(complex(re, im) for re, im in b["amplitudes"]))
            for b in doc["branches"]))


def coherent_state(alpha: complex, mode: str = "p0", atom: str = "none") -> CatState:
    return CatState((mode,), (Branch(1.0, atom, (alpha,)),))


def product_coherent(alphas: Sequence[complex], modes: Sequence[str],
                     atom: str = "none") -> CatState:
    return CatState(tuple(modes), (Branch(1.0, atom, tuple(alphas)),))


def even_odd_cat(alpha: complex, parity: int, mode: str = "p0") -> CatState:
    """Normalized (|-alpha> + parity |alpha>) cat, parity in {+1, -1}."""
    if parity not in (1, -1):
        raise ValueError("parity must be +1 or -1")
    state = CatState((mode,), (Branch(1.0, "none", (-alpha,)),
                               Branch(float(parity), "none", (alpha,))))
    return state.normalized()


def _gram_factor(bj: Sequence[complex], bk: Sequence[complex]) -> complex:
    s = sum(np.conj(x) * y for x, y in zip(bj, bk))
    nj = sum(abs(x) ** 2 for x in bj)
    nk = sum(abs(y) ** 2 for y in bk)
    return cmath.exp(-0.5 * nj - 0.5 * nk + s)


def _atom_overlap(aj: str, ak: str) -> float:
    if aj == "none" or ak == "none":
        if aj != ak:
            raise ValueError("cannot overlap atom-tagged and atom-free branches")
        return 1.0
    return 1.0 if aj == ak else 0.0


def overlap(psi: CatState, phi: CatState) -> complex:
    """<psi|phi> as an exact Gram sum over coherent branches."""
    if psi.modes != phi.modes:
        raise ValueError("states live on different mode lists")
    total = 0.0 + 0.0j
    for bj in psi.branches:
        for bk in phi.branches:
            w = _atom_overlap(bj.atom, bk.atom)
            if w == 0.0:
                continue
            total += np.conj(bj.coeff) * bk.coeff * w * _gram_factor(
                bj.amplitudes, bk.amplitudes)
    return complex(total)


def gram_matrix(state: CatState) -> np.ndarray:
    """Pairwise branch Gram matrix (positive semidefinite by construction)."""
    n = len(state.branches)
    gm = np.empty((n, n), dtype=complex)
    for j, bj in enumerate(state.branches):
        for k, bk in enumerate(state.branches):
            gm[j, k] = _gram_factor(bj.amplitudes, bk.amplitudes)
    return gm


def _fresh_env_labels(state: CatState, count: int) -> list:
    existing = {m for m in state.modes if m.startswith("env")}
    labels = []
    i = 0
    while len(labels) < count:
        label = f"env{i}"
        if label not in existing:
            labels.append(label)
        i += 1
    return labels


def reflect(state: CatState, mode: str, noise: Optional[ReflectionNoise] = None
            ) -> CatState:
    """Bounce one pulse mode off the single-atom cavity.

    Atom |0>: amplitude sign flip (exact empty-cavity reflection); atom |1>:
    amplitude scaled by sqrt(1-eta) with the lost photons moved to a fresh
    environment mode.  Nonzero xi0/xi1 additionally divert the mode-mismatch
    fraction into orthogonal environment modes, reproducing the
    exp(-|alpha|^2 xi) overlap penalties exactly.
    """
    noise = noise or IDEAL
    idx = state.mode_index(mode)
    if any(b.atom not in ("0", "1") for b in state.branches):
        raise ValueError("reflect requires every branch atom in {0, 1}")

    eta, xi0, xi1 = noise.eta, complex(noise.xi0), complex(noise.xi1)
    tau = math.sqrt(1.0 - eta)
    s0 = math.sqrt(max(1.0 - abs(1.0 - xi0) ** 2, 0.0))
    s1 = math.sqrt(max(1.0 - abs(1.0 - xi1) ** 2, 0.0))

    use_loss = eta > 0.0
    use_mis0 = abs(xi0) > 0.0
    use_mis1 = abs(xi1) > 0.0
    n_env = use_loss + use_mis0 + use_mis1
    env = _fresh_env_labels(state, n_env)
    env_loss = env.pop(0) if use_loss else None
    env_mis0 = env.pop(0) if use_mis0 else None
    env_mis1 = env.pop(0) if use_mis1 else None

    new_modes = state.modes + tuple(
        m for m in (env_loss, env_mis0, env_mis1) if m is not None)
    pad = len(new_modes) - len(state.modes)

    new_branches = []
    for b in state.branches:
        beta = b.amplitudes[idx]
        amps = list(b.amplitudes) + [0.0] * pad
        if b.atom == "0":
            amps[idx] = -(1.0 - xi0) * beta
            if use_mis0:
                amps[new_modes.index(env_mis0)] = s0 * beta
        else:
            amps[idx] = tau * (1.0 - xi1) * beta
            if use_loss:
                amps[new_modes.index(env_loss)] = math.sqrt(eta) * beta
            if use_mis1:
                amps[new_modes.index(env_mis1)] = tau * s1 * beta
        new_branches.append(Branch(b.coeff, b.atom, tuple(amps)))
    return CatState(new_modes, tuple(new_branches))


def displace(state: CatState, mode: str, d: complex) -> CatState:
    """Displace one mode by d; each branch picks up the exact unimodular phase."""
    idx = state.mode_index(mode)
    d = complex(d)
    new_branches = []
    for b in state.branches:
        beta = b.amplitudes[idx]
        phase = cmath.exp((d * np.conj(beta) - np.conj(d) * beta) / 2.0)
        amps = list(b.amplitudes)
        amps[idx] = beta + d
        new_branches.append(Branch(b.coeff * phase, b.atom, tuple(amps)))
    return CatState(state.modes, tuple(new_branches))


_ATOM_EXPANSION = {
    "0": (("0", 1.0),),
    "1": (("1", 1.0),),
    "+": (("0", 1.0 / math.sqrt(2.0)), ("1", 1.0 / math.sqrt(2.0))),
    "-": (("0", 1.0 / math.sqrt(2.0)), ("1", -1.0 / math.sqrt(2.0))),
}


def prepare_atom(state: CatState, target: str) -> CatState:
    """Replace the atom factor; requires the atom to be disentangled.

    `target` is one of "0", "1", "+", "-"; superposition targets expand into
    {0, 1} branches.
    """
    if target not in _ATOM_EXPANSION:
        raise ValueError(f"unknown atom target {target!r}")
    labels = {b.atom for b in state.branches}
    if len(labels) > 1:
        raise ValueError("atom is entangled with the field; measure it first")
    new_branches = []
    for b in state.branches:
        for label, weight in _ATOM_EXPANSION[target]:
            new_branches.append(Branch(b.coeff * weight, label, b.amplitudes))
    return CatState(state.modes, tuple(new_branches))


def measurement_probabilities(state: CatState) -> dict:
    """Probabilities of the two {|+>, |->} atom-measurement outcomes."""
    probs = {}
    for outcome, sign in (("+", 1.0), ("-", -1.0)):
        projected = _project_atom(state, sign)
        probs[outcome] = 0.0 if projected is None else overlap(projected, projected).real
    return probs


def _project_atom(state: CatState, sign: float) -> Optional[CatState]:
    branches = []
    for b in state.branches:
        if b.atom not in ("0", "1"):
            raise ValueError("measurement requires every branch atom in {0, 1}")
        w = (1.0 if b.atom == "0" else sign) / math.sqrt(2.0)
        branches.append(Branch(b.coeff * w, "none", b.amplitudes))
    merged = _merge(branches)
    if not merged:
        return None
    return CatState(state.modes, merged)


def measure_atom(state: CatState, outcome: str) -> tuple[float, CatState]:
    """Project the atom onto |+> or |->; returns (probability, post-state).

    Deterministic API: the caller selects the outcome.  Raises on a
    zero-probability outcome.
    """
    if outcome not in ("+", "-"):
        raise ValueError("outcome must be '+' or '-'")
    sign = 1.0 if outcome == "+" else -1.0
    projected = _project_atom(state, sign)
    prob = 0.0 if projected is None else overlap(projected, projected).real
    if projected is None or prob <= 1e-30:
        raise ValueError(f"outcome {outcome!r} has zero probability")
    return prob, projected.normalized()


def wigner(state: CatState, mode: str, z) -> float:
    """Reduced single-mode Wigner function at phase-space point(s) z.

    Other modes (including environment modes) are traced out through their
    Gram factors.  Convention: Int W d^2z = 1, coherent peak 2/pi.
    """
    idx = state.mode_index(mode)
    z = np.asarray(z, dtype=complex)
    total = np.zeros(z.shape, dtype=complex)
    for bj in state.branches:
        for bk in state.branches:
            w_atom = _atom_overlap(bj.atom, bk.atom)
            if w_atom == 0.0:
                continue
            other_j = [a for i, a in enumerate(bj.amplitudes) if i != idx]
            other_k = [a for i, a in enumerate(bk.amplitudes) if i != idx]
            g_other = _gram_factor(other_j, other_k)
            bjm, bkm = bj.amplitudes[idx], bk.amplitudes[idx]
            ov_m = _gram_factor((bjm,), (bkm,))
            kernel = np.exp(-2.0 * (z - bkm) * (np.conj(z) - np.conj(bjm)))
            total += (np.conj(bj.coeff) * bk.coeff * w_atom
                      * g_other * ov_m * kernel)
    result = (2.0 / np.pi) * total.real
    return float(result) if result.ndim == 0 else result


def wigner_grid_csv(state: CatState, mode: str, re_vals, im_vals, path) -> None:
    """Evaluate the Wigner function on a grid and write CSV 're_z,im_z,w'."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("re_z,im_z,w\n")
        for im in im_vals:
            zs = np.asarray(re_vals) + 1j * im
            ws = wigner(state, mode, zs)
            for re, w in zip(re_vals, np.atleast_1d(ws)):
                fh.write(f"{re:.17g},{im:.17g},{w:.17g}\n")
