"""Output-mode extraction, mismatch and loss figures, and cat-state fidelity.

Ties the master-equation trajectory to the input-output relation: the
reflected field in the atom-|1> branch is the coherent mode
alpha_1 f_out1(t) = alpha f_in(t) + sqrt(kappa) <a_c(t)>, while the
atom-|0> branch is the exact empty-cavity reflection.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import lindblad, pulses
from .lindblad import CutoffError, SystemParams, Trajectory
from .pulses import ComplexEnvelope


class RingdownError(RuntimeError):
    """The trajectory window ended before the intracavity field decayed."""


@dataclass(frozen=True)
class ReflectionOutcome:
    """Extracted output mode and derived distortion/loss figures for one run."""

    alpha_in: complex
    alpha_out: complex
    f_in: ComplexEnvelope
    f_out_1: ComplexEnvelope
    f_out_0: ComplexEnvelope
    params: SystemParams
    xi0: Optional[complex] = None
    xi1: Optional[complex] = None

    @property
    def eta(self) -> float:
        """Photon loss fraction 1 - |alpha_1|^2 / |alpha|^2 (clamped at 0)."""
        value = 1.0 - abs(self.alpha_out) ** 2 / abs(self.alpha_in) ** 2
        return value if value > 1e-14 else 0.0

    def scalar_record(self) -> dict:
        return {
            "alpha_in": [self.alpha_in.real, self.alpha_in.imag],
            "alpha_out": [self.alpha_out.real, self.alpha_out.imag],
            "eta": self.eta,
            "xi0": None if self.xi0 is None else [self.xi0.real, self.xi0.imag],
            "xi1": None if self.xi1 is None else [self.xi1.real, self.xi1.imag],
            "g": self.params.g,
            "kappa": self.params.kappa,
            "gamma_s": self.params.gamma_s,
            "fock_cutoff": self.params.fock_cutoff,
        }

    def to_json(self, path, envelope_files: Optional[dict] = None) -> None:
        record = self.scalar_record()
        record["envelopes"] = envelope_files or {}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=2)


@dataclass(frozen=True)
class FidelityReport:
    """Exact and Eq.-(7)-style cat fidelities with the branch overlaps behind them."""

    F_exact: float
    F_eq7: float
    branch_overlap_0: complex
    branch_overlap_1: complex


def extract_output_mode(traj: Trajectory, params: SystemParams
                        ) -> tuple[complex, ComplexEnvelope]:
    """Split alpha f_in + sqrt(kappa) <a_c> into amplitude and normalized shape.

    The joint phase is fixed so that Int f_in* f_out1 dt is real positive;
    alpha_1 absorbs the residual global phase.
    """
    alpha = params.alpha
    residual = abs(traj.a_c_expect[-1]) / max(abs(alpha), 1.0)
    if residual > 1e-8:
        raise RingdownError(
            f"intracavity field not rung down: relative residual {residual:.3g}")
    u = alpha * params.pulse.samples + math.sqrt(params.kappa) * traj.a_c_expect
    u_env = ComplexEnvelope(traj.grid, u)
    norm = math.sqrt(u_env.norm_sq())
    if norm == 0.0:
        raise ValueError("output field vanishes; no mode to extract")
    ov = pulses.inner_product(params.pulse, u_env)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    alpha_out = norm * phase
    return alpha_out, ComplexEnvelope(traj.grid, u / alpha_out)


def weak_drive_oracle(g: float, kappa: float, gamma_s: float, omega):
    """Linear-response reflection coefficient of the coupled atom-cavity system.

    r(w) = 1 - kappa / (kappa/2 - i w + g^2 / (gamma_s/2 - i w)); reduces to
    the empty-cavity filter at g = 0 and is unimodular for gamma_s = 0.
    """
    omega = np.asarray(omega, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = kappa / 2.0 - 1j * omega + g**2 / (gamma_s / 2.0 - 1j * omega)
        r = np.where(np.isfinite(denom), 1.0 - kappa / np.where(
            np.isfinite(denom), denom, 1.0), 1.0)
    # gamma_s = 0, omega = 0: the atomic term diverges and the pulse is
    # reflected with unit coefficient (perfect dressed-state mismatch)
    if g > 0:
        r = np.where((gamma_s == 0.0) & (omega == 0.0), 1.0 + 0.0j, r)
    return complex(r) if r.ndim == 0 else r


def weak_drive_response(f_in: ComplexEnvelope, g: float, kappa: float,
                        gamma_s: float) -> ComplexEnvelope:
    """Predicted output envelope alpha_1 f_out1 / alpha in the weak-drive limit."""
    return pulses.apply_spectral_filter(
        f_in, lambda w: weak_drive_oracle(g, kappa, gamma_s, -w))


def compute_mismatch_figures(outcome: ReflectionOutcome) -> ReflectionOutcome:
    """Fill xi1 = 1 - <f_in, f_out1> and the sign-corrected xi0 = 1 - <f_in, -f_out0>."""
    xi1 = pulses.mismatch(outcome.f_in, outcome.f_out_1)
    neg_f0 = ComplexEnvelope(outcome.f_out_0.grid, -outcome.f_out_0.samples)
    xi0 = pulses.mismatch(outcome.f_in, neg_f0)
    return replace(outcome, xi0=xi0, xi1=xi1)


def fidelity_eq7(alpha: complex, xi0: complex, eta: float) -> float:
    """Approximate cat fidelity |(e^{-|a|^2 (1-sqrt(1-eta))} + e^{-|a|^2 xi0}) / 2|^2."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    a2 = abs(alpha) ** 2
    loss = cmath.exp(-a2 * (1.0 - math.sqrt(1.0 - eta)))
    shape = cmath.exp(-a2 * xi0)
    return abs((loss + shape) / 2.0) ** 2


def fidelity_exact(outcome: ReflectionOutcome) -> FidelityReport:
    """Cat fidelity from exact multimode coherent overlaps.

    B0 is the overlap of the |0> branch with the ideal |-alpha f_in> mode;
    B1 pairs the extracted (alpha_1, f_out1) with |alpha f_in> and carries
    the vacuum overlap of the traced-out loss mode.  Reduces to the
    approximate formula when xi1 = 0 and alpha_1 = alpha sqrt(1-eta).
    """
    if outcome.xi0 is None or outcome.xi1 is None:
        outcome = compute_mismatch_figures(outcome)
    alpha, alpha1 = outcome.alpha_in, outcome.alpha_out
    a2 = abs(alpha) ** 2
    eta = outcome.eta
    b0 = cmath.exp(-a2 * outcome.xi0)
    ov1 = pulses.inner_product(outcome.f_in, outcome.f_out_1)
    b1 = cmath.exp(-0.5 * a2 - 0.5 * abs(alpha1) ** 2
                   + np.conj(alpha) * alpha1 * ov1) * math.exp(-0.5 * a2 * eta)
    f_exact = abs((b0 + b1) / 2.0) ** 2
    f_eq7 = fidelity_eq7(alpha, outcome.xi0, eta)
    return FidelityReport(F_exact=f_exact, F_eq7=f_eq7,
                          branch_overlap_0=b0, branch_overlap_1=b1)


@dataclass(frozen=True)
class ReflectionRun:
    """Complete single-point simulation: trajectory, outcome, and fidelity."""

    outcome: ReflectionOutcome
    fidelity: FidelityReport
    trajectory: Trajectory
    diagnostics: dict


def simulate_reflection(g: float, gamma_s: float, alpha: complex, kappa_T: float,
                        kappa: float = 1.0, fock_cutoff: int = 15,
                        max_cutoff: int = 40, dt: Optional[float] = None,
                        grid: Optional[pulses.TimeGrid] = None) -> ReflectionRun:
    """Run the full reflection pipeline for a Gaussian pulse of duration T.

    Escalates the Fock cutoff in steps of 5 (up to max_cutoff) when the
    truncation diagnostic trips.
    """
    T = kappa_T / kappa
    if grid is None:
        grid = pulses.default_grid(T, kappa)
    f_in = pulses.make_gaussian_pulse(T, grid)
    drive = pulses.gaussian_drive(T, grid)
    f_out0 = pulses.empty_cavity_reflect(f_in, kappa)

    cutoff = fock_cutoff
    while True:
        params = SystemParams(g=g, kappa=kappa, gamma_s=gamma_s, alpha=alpha,
                              pulse=f_in, fock_cutoff=cutoff, dt=dt,
                              drive_fn=drive)
        try:
            traj = lindblad.evolve(params)
            break
        except CutoffError:
            if cutoff + 5 > max_cutoff:
                raise
            cutoff += 5

    alpha_out, f_out1 = extract_output_mode(traj, params)
    outcome = compute_mismatch_figures(ReflectionOutcome(
        alpha_in=alpha, alpha_out=alpha_out, f_in=f_in,
        f_out_1=f_out1, f_out_0=f_out0, params=params))
    report = fidelity_exact(outcome)
    diagnostics = {
        "fock_cutoff": cutoff,
        "trace_drift": traj.trace_drift,
        "top_fock_pop": float(traj.top_fock_pop.max()),
        "ringdown_residual": float(abs(traj.a_c_expect[-1]) / max(abs(alpha), 1.0)),
        "coherence": lindblad.coherence_diagnostic(traj),
    }
    return ReflectionRun(outcome=outcome, fidelity=report,
                         trajectory=traj, diagnostics=diagnostics)
