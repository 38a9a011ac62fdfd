"""Matplotlib report figures rendered next to the delimited exports."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import EnergyBalance, PatternTable, classical_directivity


def save_pattern_figure(table: PatternTable, path, overlay_classical: bool = True,
                        title: str | None = None) -> None:
    """Polar plot of a PatternTable, optional classical-law overlay."""
    if table.distances.size != 1:
        raise ValueError("pattern figures hold a single distance per file")
    fig, ax = plt.subplots(subplot_kw={"projection": "polar"}, figsize=(6, 6))
    theta = np.append(table.angles, table.angles[0])
    labels = table.freq_labels or tuple(f"{f:.5g} Hz" for f in table.freqs)
    for j, label in enumerate(labels):
        mags = table.magnitude[:, j, 0]
        ax.plot(theta, np.append(mags, mags[0]), lw=1.2, label=str(label))
    if overlay_classical and "m" in table.params:
        fine = np.linspace(0.0, 2.0 * math.pi, 361)
        ax.plot(fine, classical_directivity(table.params["m"], fine),
                "k--", lw=1.0, alpha=0.6, label="first-order law")
    ax.set_title(title or f"directivity, r={table.distances[0]:.3g} m "
                          f"({table.integrator} integrator)")
    if len(labels) <= 12:
        ax.legend(loc="lower left", bbox_to_anchor=(1.02, 0.0), fontsize=8)
    fig.savefig(path, bbox_inches="tight", dpi=120)
    plt.close(fig)


def save_proximity_figure(rs, boost_db, path, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(rs, boost_db, "o-")
    ax.set_xlabel("source distance (m)")
    ax.set_ylabel("low-frequency boost (dB)")
    ax.grid(True, which="both", alpha=0.3)
    if title:
        ax.set_title(title)
    fig.savefig(path, bbox_inches="tight", dpi=120)
    plt.close(fig)


def save_energy_figure(balance: EnergyBalance, path, floor_db: float = -120.0) -> None:
    """Time/band map of energies in dB."""
    with np.errstate(divide="ignore"):
        level = 10.0 * np.log10(np.maximum(balance.energies, 10.0 ** (floor_db / 10.0)))
    fig, ax = plt.subplots(figsize=(8, 4))
    t_max = balance.n_frames * balance.frame_duration
    img = ax.imshow(level.T, origin="lower", aspect="auto",
                    extent=(0.0, t_max, -0.5, balance.bands.n_bands - 0.5),
                    cmap="magma")
    ax.set_yticks(range(balance.bands.n_bands))
    ax.set_yticklabels(balance.bands.labels, fontsize=6)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("third-octave band (Hz)")
    fig.colorbar(img, ax=ax, label="energy (dB)")
    fig.savefig(path, bbox_inches="tight", dpi=120)
    plt.close(fig)


def save_deviation_figure(freqs, rs, deviation, path) -> None:
    """Map of worst-angle departure from the classical law over (f, r)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    img = ax.pcolormesh(np.asarray(rs), np.asarray(freqs), np.asarray(deviation),
                        shading="auto", cmap="viridis")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("source distance (m)")
    ax.set_ylabel("frequency (Hz)")
    fig.colorbar(img, ax=ax, label="max |pattern - first-order law|")
    fig.savefig(path, bbox_inches="tight", dpi=120)
    plt.close(fig)
