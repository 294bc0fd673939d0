"""Independent numerical oracles used to cross-check the package.

Everything here is implemented from first principles with scipy/numpy only
(no catpulse internals beyond plain data), so agreement with the package is
meaningful evidence rather than a tautology.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.special import eval_genlaguerre


def gaussian_envelope(T: float, t: np.ndarray) -> np.ndarray:
    """Analytically L2-normalized exp[-(t - T/2)^2 / (T/5)^2] pulse."""
    tau = T / 5.0
    amp = (2.0 / math.pi) ** 0.25 / math.sqrt(tau)
    return amp * np.exp(-((t - T / 2.0) / tau) ** 2)


def empty_cavity_ode(T: float, times: np.ndarray, kappa: float = 1.0
                     ) -> np.ndarray:
    """Reflected field from the empty cavity by direct time-domain integration.

    Solves a' = -kappa/2 a - sqrt(kappa) f(t) from a(0) = 0 and returns
    f_out(t) = f(t) + sqrt(kappa) a(t) on `times`.
    """
    sk = math.sqrt(kappa)

    def rhs(t, y):
        f = gaussian_envelope(T, np.array([t]))[0]
        return [-0.5 * kappa * y[0] - sk * f]

    sol = solve_ivp(rhs, (times[0], times[-1]), [0.0], t_eval=times,
                    method="DOP853", rtol=1e-11, atol=1e-13)
    if not sol.success:
        raise RuntimeError(sol.message)
    return gaussian_envelope(T, times) + sk * sol.y[0]


def driven_cavity_amplitude(T: float, times: np.ndarray, alpha: complex,
                            kappa: float = 1.0) -> np.ndarray:
    """<a_c>(t) of the decoupled (g = 0) driven cavity as a scalar complex ODE."""
    sk = math.sqrt(kappa)

    def rhs(t, y):
        f = gaussian_envelope(T, np.array([t]))[0]
        da = -0.5 * kappa * (y[0] + 1j * y[1]) - sk * alpha * f
        return [da.real, da.imag]

    sol = solve_ivp(rhs, (times[0], times[-1]), [0.0, 0.0], t_eval=times,
                    method="DOP853", rtol=1e-11, atol=1e-13)
    if not sol.success:
        raise RuntimeError(sol.message)
    return sol.y[0] + 1j * sol.y[1]


def coherent_fock(alpha: complex, cutoff: int) -> np.ndarray:
    """Fock coefficients of |alpha> up to photon number `cutoff`."""
    n = np.arange(cutoff + 1)
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, cutoff + 1)))))
    mags = np.exp(-0.5 * abs(alpha) ** 2 + n * np.log(max(abs(alpha), 1e-300))
                  - 0.5 * log_fact)
    phases = np.exp(1j * n * np.angle(alpha)) if alpha != 0 else np.ones(len(n))
    coeffs = mags * phases
    if alpha == 0:
        coeffs = np.zeros(cutoff + 1, dtype=complex)
        coeffs[0] = 1.0
    return coeffs.astype(complex)


def fock_wigner(psi: np.ndarray, z) -> np.ndarray:
    """Wigner function of a pure Fock-basis state via the Laguerre kernel.

    W(z) = (2/pi) sum_{m,n} conj(c_m) c_n <m| D(2z) P |n> style closed form,
    assembled from W_{|m><n|}(z); normalized so Int W d^2z = 1.
    """
    z = np.asarray(z, dtype=complex)
    cutoff = len(psi) - 1
    w = np.zeros(z.shape, dtype=complex)
    r2 = 4.0 * np.abs(z) ** 2
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, cutoff + 1)))))
    for m in range(cutoff + 1):
        for n in range(cutoff + 1):
            c = np.conj(psi[m]) * psi[n]
            if abs(c) < 1e-300:
                continue
            if n >= m:
                k, d = m, n - m
                cross = (2.0 * np.conj(z)) ** d
            else:
                k, d = n, m - n
                cross = (2.0 * z) ** d
            pref = (-1.0) ** k * math.exp(0.5 * (log_fact[k] - log_fact[k + d]))
            w += c * pref * cross * eval_genlaguerre(k, d, r2)
    w *= (2.0 / math.pi) * np.exp(-2.0 * np.abs(z) ** 2)
    return w.real


def displacement_matrix(d: complex, cutoff: int) -> np.ndarray:
    """Matrix exponential of d a^dag - conj(d) a on the truncated Fock space."""
    a = np.diag(np.sqrt(np.arange(1, cutoff + 1)), 1).astype(complex)
    return expm(d * a.conj().T - np.conj(d) * a)


class FockProtocolSim:
    """Atom-qubit x Fock-space cross-simulation of the cat protocols.

    The ideal reflection is |0><0| x parity + |1><1| x identity; atom
    preparation and +/- measurements act on the explicit qubit factor.
    """

    def __init__(self, alpha: complex, cutoff: int = 40):
        self.cutoff = cutoff
        self.field = coherent_fock(alpha, cutoff)  # atom starts disentangled
        self.parity = np.diag((-1.0) ** np.arange(cutoff + 1)).astype(complex)
        self.joint = None  # (2, cutoff+1) once the atom is prepared

    def prepare_plus(self):
        if self.joint is not None:
            raise RuntimeError("atom already in play")
        self.joint = np.stack([self.field, self.field]) / math.sqrt(2.0)

    def reflect(self):
        self.joint = np.stack([self.parity @ self.joint[0], self.joint[1]])

    def measure(self, outcome: str) -> float:
        sign = 1.0 if outcome == "+" else -1.0
        v = (self.joint[0] + sign * self.joint[1]) / math.sqrt(2.0)
        prob = float(np.vdot(v, v).real)
        self.field = v / math.sqrt(prob)
        self.joint = None
        return prob

    def displace(self, d: complex):
        self.field = displacement_matrix(d, self.cutoff) @ self.field

    def wigner(self, z):
        return fock_wigner(self.field, z)
