"""Driven Jaynes-Cummings master equation on the truncated atom x Fock space.

The atom is restricted to the {|1>, |e>} sector (the |0> level decouples and
is handled exactly by the empty-cavity filter in `pulses`).  The cavity drive
enters as a c-number mean field alpha * f_in(t); its phase is fixed by the
mean-field contract

    d<a_c>/dt = -i g <sigma_-> - (kappa/2) <a_c> - sqrt(kappa) alpha f_in(t).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .pulses import ComplexEnvelope, TimeGrid


class CutoffError(RuntimeError):
    """Fock-space truncation breached; rerun with a larger cutoff."""


class IntegrationError(RuntimeError):
    """The integrator violated a conservation diagnostic (trace drift)."""


@dataclass(frozen=True)
class HilbertDims:
    """Dimensions of the atom x Fock product space, atom-major index layout.

    Composite index = atom_index * (fock_cutoff + 1) + n.  With two atomic
    levels the ordering is (|1>, |e>); with three it is (|0>, |1>, |e>).
    """

    atom_levels: int = 2
    fock_cutoff: int = 15

    def __post_init__(self):
        if self.atom_levels not in (2, 3):
            raise ValueError("atom_levels must be 2 or 3")
        if self.fock_cutoff < 2:
            raise ValueError("fock_cutoff must be >= 2")

    @property
    def n_fock(self) -> int:
        return self.fock_cutoff + 1

    @property
    def dim(self) -> int:
        return self.atom_levels * self.n_fock

    @property
    def level_1(self) -> int:
        return self.atom_levels - 2

    @property
    def level_e(self) -> int:
        return self.atom_levels - 1


class Operators(NamedTuple):
    a: np.ndarray
    adag: np.ndarray
    sm: np.ndarray
    sp: np.ndarray
    num: np.ndarray
    proj_e: np.ndarray
    jc: np.ndarray  # sigma_+ a + sigma_- a^dag


def build_operators(dims: HilbertDims) -> Operators:
    """Annihilation, atomic raising/lowering, and Jaynes-Cummings coupling."""
    nf = dims.n_fock
    a1 = np.diag(np.sqrt(np.arange(1, nf)), 1).astype(complex)
    ia = np.eye(dims.atom_levels, dtype=complex)
    nfock = np.eye(nf, dtype=complex)

    sm1 = np.zeros((dims.atom_levels, dims.atom_levels), dtype=complex)
    sm1[dims.level_1, dims.level_e] = 1.0  # |1><e|

    a = np.kron(ia, a1)
    sm = np.kron(sm1, nfock)
    sp = sm.conj().T
    adag = a.conj().T
    return Operators(a=a, adag=adag, sm=sm, sp=sp,
                     num=adag @ a, proj_e=sp @ sm, jc=sp @ a + sm @ adag)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, trace-one operator on the truncated product space."""

    dims: HilbertDims
    elements: np.ndarray

    def __post_init__(self):
        el = np.asarray(self.elements, dtype=complex)
        if el.shape != (self.dims.dim, self.dims.dim):
            raise ValueError("elements shape must match dims")
        object.__setattr__(self, "elements", el)

    def validate(self) -> None:
        el = self.elements
        if np.abs(el - el.conj().T).max() > 1e-10:
            raise ValueError("density matrix not Hermitian to 1e-10")
        if abs(np.trace(el).real - 1.0) > 1e-8:
            raise ValueError("trace differs from 1 by more than 1e-8")
        if np.linalg.eigvalsh(el).min() < -1e-8:
            raise ValueError("negative eigenvalue below -1e-8")

    @classmethod
    def pure(cls, dims: HilbertDims, atom_index: int, n: int = 0) -> "DensityMatrix":
        el = np.zeros((dims.dim, dims.dim), dtype=complex)
        idx = atom_index * dims.n_fock + n
        el[idx, idx] = 1.0
        return cls(dims, el)


@dataclass(frozen=True)
class SystemParams:
    """Physical and numerical parameters of one reflection simulation."""

    g: float
    kappa: float
    gamma_s: float
    alpha: complex
    pulse: ComplexEnvelope
    fock_cutoff: int = 15
    dt: Optional[float] = None
    drive_fn: Optional[Callable[[float], complex]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.g < 0 or self.gamma_s < 0:
            raise ValueError("rates must be nonnegative")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.fock_cutoff < 2:
            raise ValueError("fock_cutoff must be >= 2")
        bound = 0.05 / max(self.kappa, self.g, self.gamma_s)
        if self.dt is None:
            object.__setattr__(self, "dt", bound)
        elif not 0.0 < self.dt <= bound:
            raise ValueError(f"dt must be in (0, {bound:.4g}] for stability")

    @property
    def dims(self) -> HilbertDims:
        return HilbertDims(2, self.fock_cutoff)


@dataclass(frozen=True)
class Trajectory:
    """Expectation values of the driven cavity-atom evolution on the pulse grid."""

    grid: TimeGrid
    a_c_expect: np.ndarray
    photon_number: np.ndarray
    excited_pop: np.ndarray
    top_fock_pop: np.ndarray
    trace_drift: float
    sampled_states: tuple = ()

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,re_a,im_a,n_phot,p_e,p_topfock\n")
            for t, a, n, pe, pt in zip(self.grid.times, self.a_c_expect,
                                       self.photon_number, self.excited_pop,
                                       self.top_fock_pop):
                fh.write(f"{t:.17g},{a.real:.17g},{a.imag:.17g},"
                         f"{n:.17g},{pe:.17g},{pt:.17g}\n")


def evolve(params: SystemParams, initial: Optional[DensityMatrix] = None,
           n_state_samples: int = 0) -> Trajectory:
    """Integrate the driven master equation with fixed-step RK4.

    Returns expectation values sampled on the pulse grid.  Raises
    CutoffError when the top Fock level becomes populated beyond 1e-6 and
    IntegrationError on trace drift beyond 1e-6.
    """
    from ._kernels import rk4_evolve

    dims = params.dims
    grid = params.pulse.grid
    times = grid.times
    nf = dims.n_fock

    if initial is None:
        initial = DensityMatrix.pure(dims, atom_index=dims.level_1, n=0)
    elif initial.dims != dims:
        raise ValueError("initial state dimensions do not match params")
    rho = initial.elements.astype(np.complex128).copy()

    g, kappa, gamma_s, alpha = params.g, params.kappa, params.gamma_s, params.alpha
    n_pts = grid.n_samples
    n_sub = max(1, math.ceil(grid.dt / params.dt))
    h_step = grid.dt / n_sub

    # Drive amplitude -i sqrt(kappa) alpha f_in(t) on the RK4 half-step grid.
    n_half = 2 * (n_pts - 1) * n_sub + 1
    t_half = grid.t_start + 0.5 * h_step * np.arange(n_half)
    if params.drive_fn is not None:
        f_vals = np.array([params.drive_fn(t) for t in t_half], dtype=complex)
    else:
        f_vals = CubicSpline(times, params.pulse.samples)(t_half)
    e_half = -1j * math.sqrt(kappa) * alpha * f_vals

    s = np.sqrt(np.arange(nf, dtype=float))
    levels = np.repeat(np.arange(2), nf)
    fock_n = np.tile(np.arange(nf), 2)
    kdec = 0.5 * (kappa * fock_n + gamma_s * (levels == 1)).astype(float)

    a_exp = np.empty(n_pts, dtype=complex)
    n_phot = np.empty(n_pts)
    p_e = np.empty(n_pts)
    p_top = np.empty(n_pts)
    trace = np.empty(n_pts)

    sample_flags = np.zeros(n_pts, dtype=np.bool_)
    if n_state_samples > 0:
        sample_flags[np.linspace(0, n_pts - 1, n_state_samples).astype(int)] = True
    n_flagged = int(sample_flags.sum())
    states = np.empty((max(n_flagged, 1), dims.dim, dims.dim), dtype=complex)

    last = rk4_evolve(rho, e_half, n_pts, n_sub, h_step, float(g), float(kappa),
                      float(gamma_s), kdec, s, nf,
                      a_exp, n_phot, p_e, p_top, trace, sample_flags, states)

    if last < n_pts - 1:
        if p_top[last] > 1e-6:
            raise CutoffError(
                f"top Fock population {p_top[last]:.3g} at t={times[last]:.3g}; "
                f"increase fock_cutoff beyond {dims.fock_cutoff}")
        raise IntegrationError(
            f"trace drift {abs(trace[last] - 1.0):.3g} at t={times[last]:.3g}")

    sampled = tuple(
        (float(times[i]), states[j].copy())
        for j, i in enumerate(np.flatnonzero(sample_flags)))
    return Trajectory(grid=grid, a_c_expect=a_exp, photon_number=n_phot,
                      excited_pop=p_e, top_fock_pop=p_top,
                      trace_drift=float(np.abs(trace - 1.0).max()),
                      sampled_states=sampled)


def coherence_diagnostic(traj: Trajectory) -> float:
    """Max over time of <a^dag a> - |<a>|^2; near zero when the field stays coherent."""
    return float(np.max(traj.photon_number - np.abs(traj.a_c_expect) ** 2))
