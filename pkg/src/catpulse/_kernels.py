"""Numba kernels for the master-equation integrator.

The atom x Fock structure makes every operator in the master equation
banded, so the right-hand side is evaluated as an O(dim^2) stencil instead
of dense matrix products.  Atom-major index layout: level 0 = |1>,
level 1 = |e>, composite index = level * (N+1) + n.
"""
from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def _rhs(rho, e_amp, g, kappa, gamma_s, kdec, s, nf, out):
    """out = RHS of the master equation for drive amplitude e_amp.

    H = g (sigma_+ a + sigma_- a^dag) + e_amp a^dag + conj(e_amp) a,
    plus kappa and gamma_s Lindblad dissipators.
    """
    ec = np.conj(e_amp)
    dim = 2 * nf
    for r in range(dim):
        lr = r // nf
        nr = r - lr * nf
        for c in range(dim):
            lc = c // nf
            nc = c - lc * nf
            z = 0.0 + 0.0j  # (H rho)[r, c]
            if nr > 0:
                z += e_amp * s[nr] * rho[r - 1, c]
            if nr < nf - 1:
                z += ec * s[nr + 1] * rho[r + 1, c]
            if lr == 1 and nr < nf - 1:
                z += g * s[nr + 1] * rho[nr + 1, c]
            if lr == 0 and nr > 0:
                z += g * s[nr] * rho[nf + nr - 1, c]
            w = 0.0 + 0.0j  # (rho H)[r, c]
            if nc < nf - 1:
                w += e_amp * s[nc + 1] * rho[r, c + 1]
            if nc > 0:
                w += ec * s[nc] * rho[r, c - 1]
            if lc == 0 and nc > 0:
                w += g * s[nc] * rho[r, nf + nc - 1]
            if lc == 1 and nc < nf - 1:
                w += g * s[nc + 1] * rho[r, nc + 1]
            acc = -1j * (z - w) - (kdec[r] + kdec[c]) * rho[r, c]
            if nr < nf - 1 and nc < nf - 1:
                acc += kappa * s[nr + 1] * s[nc + 1] * rho[r + 1, c + 1]
            if lr == 0 and lc == 0:
                acc += gamma_s * rho[nf + nr, nf + nc]
            out[r, c] = acc


@numba.njit(cache=True)
def rk4_evolve(rho, e_half, n_pts, n_sub, h, g, kappa, gamma_s, kdec, s, nf,
               a_exp, n_phot, p_e, p_top, trace, sample_flags, sampled_states):
    """Fixed-step RK4 over the grid; records expectations at every grid point.

    e_half holds the drive amplitude on the half-step grid (2 entries per
    RK4 step plus the final endpoint).  Returns the index of the last grid
    point processed; an early return signals a diagnostic breach there.
    """
    dim = 2 * nf
    k1 = np.empty((dim, dim), dtype=np.complex128)
    k2 = np.empty((dim, dim), dtype=np.complex128)
    k3 = np.empty((dim, dim), dtype=np.complex128)
    k4 = np.empty((dim, dim), dtype=np.complex128)
    tmp = np.empty((dim, dim), dtype=np.complex128)
    idx = 0
    n_sampled = 0
    for i in range(n_pts):
        za = 0.0 + 0.0j
        nph = 0.0
        pe = 0.0
        pt = 0.0
        tr = 0.0
        for lvl in range(2):
            base = lvl * nf
            for n in range(nf):
                d = rho[base + n, base + n].real
                nph += n * d
                tr += d
                if lvl == 1:
                    pe += d
                if n < nf - 1:
                    za += s[n + 1] * rho[base + n + 1, base + n]
            pt += rho[base + nf - 1, base + nf - 1].real
        a_exp[i] = za
        n_phot[i] = nph
        p_e[i] = pe
        p_top[i] = pt
        trace[i] = tr
        if sample_flags[i]:
            sampled_states[n_sampled] = rho
            n_sampled += 1
        if pt > 1e-6 or abs(tr - 1.0) > 1e-6:
            return i
        if i == n_pts - 1:
            break
        for _ in range(n_sub):
            e0 = e_half[idx]
            e1 = e_half[idx + 1]
            e2 = e_half[idx + 2]
            idx += 2
            _rhs(rho, e0, g, kappa, gamma_s, kdec, s, nf, k1)
            tmp[:] = rho + (0.5 * h) * k1
            _rhs(tmp, e1, g, kappa, gamma_s, kdec, s, nf, k2)
            tmp[:] = rho + (0.5 * h) * k2
            _rhs(tmp, e1, g, kappa, gamma_s, kdec, s, nf, k3)
            tmp[:] = rho + h * k3
            _rhs(tmp, e2, g, kappa, gamma_s, kdec, s, nf, k4)
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return n_pts - 1
