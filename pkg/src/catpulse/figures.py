"""Matplotlib rendering of the report figures next to their CSV data."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_pulse_shapes(times, series: dict, path) -> None:
    """Input/output pulse shapes; series maps label -> complex samples."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    styles = ["-", "-.", "--", ":"]
    for (label, samples), style in zip(series.items(), styles):
        ax.plot(times, np.real(samples), style, label=label)
    ax.set_xlabel(r"$\kappa t$")
    ax.set_ylabel("pulse shape (real part)")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_fidelity_curves(curves: dict, path, xlabel=r"$|\alpha|^2$") -> None:
    """Fidelity sweeps; curves maps label -> (x array, F array)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, (x, f) in curves.items():
        ax.plot(x, f, marker="o", markersize=3, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("fidelity")
    ax.set_ylim(0.0, 1.02)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_wigner(re_vals, im_vals, w_grid, path) -> None:
    """Phase-space heat map of a Wigner function grid."""
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    vmax = np.abs(w_grid).max()
    pcm = ax.pcolormesh(re_vals, im_vals, w_grid, cmap="RdBu_r",
                        vmin=-vmax, vmax=vmax, shading="auto")
    fig.colorbar(pcm, ax=ax, label="W(z)")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_trajectory(times, photon_number, excited_pop, path) -> None:
    """Intracavity photon number and excited-state population vs time."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(times, photon_number, label=r"$\langle a^\dagger a\rangle$")
    ax.plot(times, excited_pop, label=r"$P_e$")
    ax.set_xlabel(r"$\kappa t$")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
