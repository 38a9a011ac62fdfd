"""Measurement artifacts of the model: directivity patterns, limit-case
deviation maps, subband diagrams, proximity curves, and band energy balance.

Monochromatic patterns come straight from the directivity filter; subband
patterns are measured the way a listening test would, by rendering a
broadband stimulus through the time-domain engine and normalizing each
band's RMS by the omnidirectional (m = 1) render at the same pose, which
isolates directivity from propagation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bands import BandSet, band_energies
from .filters import directivity_response
from .geometry import MicParams, ScenePose
from .render import render_pose

DEFAULT_N_ANGLES = 72  # 5 degree steps


class BandSilenceError(ValueError):
    """Stimulus carries no usable energy in a requested band."""


def angle_grid(n: int = DEFAULT_N_ANGLES) -> np.ndarray:
    if n < 1:
        raise ValueError("angle grid needs at least one angle")
    return np.arange(n) * 2.0 * np.pi / n


def classical_directivity(m: float, angles: np.ndarray) -> np.ndarray:
    """The textbook first-order law |m + (1 - m) cos(theta)|."""
    return np.abs(m + (1.0 - m) * np.cos(np.asarray(angles)))


@dataclass
class PatternTable:
    """|H_dir| over angle x frequency x distance, plus how it was computed."""

    angles: np.ndarray
    freqs: np.ndarray
    distances: np.ndarray
    magnitude: np.ndarray  # shape (n_angles, n_freqs, n_distances)
    integrator: str
    params: dict
    freq_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=np.float64)
        self.freqs = np.asarray(self.freqs, dtype=np.float64)
        self.distances = np.atleast_1d(np.asarray(self.distances, dtype=np.float64))
        self.magnitude = np.asarray(self.magnitude, dtype=np.float64)
        expected = (self.angles.size, self.freqs.size, self.distances.size)
        if self.magnitude.shape != expected:
            raise ValueError(
                f"magnitude shape {self.magnitude.shape} does not match grids {expected}"
            )
        if np.any(self.magnitude < 0.0):
            raise ValueError("pattern magnitudes must be >= 0")


@dataclass
class EnergyBalance:
    """Per-frame, per-band mean-square energies of a signal."""

    frame_duration: float
    bands: BandSet
    energies: np.ndarray  # shape (n_frames, n_bands)
    totals: np.ndarray = field(default_factory=lambda: np.zeros(0))  # per-frame mean square

    @property
    def n_frames(self) -> int:
        return self.energies.shape[0]


def _params_snapshot(params: MicParams, r: float | None = None) -> dict:
    snap = {"m": params.m, "d": params.d, "g": params.g, "c0": params.c0, "fs": params.fs}
    if r is not None:
        snap["r"] = r
    return snap


def monochromatic_pattern(params: MicParams, f: float, r: float,
                          angles: np.ndarray | None = None,
                          integrator: str = "lossy") -> PatternTable:
    """|H_dir| at a single frequency and distance over an angle grid."""
    if angles is None:
        angles = angle_grid()
    angles = np.asarray(angles, dtype=np.float64)
    if angles.size == 0:
        raise ValueError("angle grid must not be empty")
    if not 0.0 < f <= params.fs / 2.0:
        raise ValueError(f"frequency {f} outside (0, fs/2]")
    mags = np.empty(angles.size)
    for i, theta in enumerate(angles):
        resp = directivity_response(ScenePose(r=r, theta=theta), params,
                                    np.array([f]), integrator)
        mags[i] = abs(resp.gain[0])
    return PatternTable(
        angles=angles, freqs=np.array([f]), distances=np.array([r]),
        magnitude=mags.reshape(-1, 1, 1), integrator=integrator,
        params=_params_snapshot(params, r),
    )


def limit_case_deviation(params: MicParams, freqs: np.ndarray, rs: np.ndarray,
                         angles: np.ndarray | None = None,
                         integrator: str = "ideal") -> np.ndarray:
    """Max over angles of ||H_dir| - D(theta)| on a (frequency, distance) grid.

    Shows how the classical directivity law is recovered as frequency drops
    and the source recedes; returns shape (len(freqs), len(rs)).
    """
    if angles is None:
        angles = angle_grid()
    freqs = np.atleast_1d(np.asarray(freqs, dtype=np.float64))
    rs = np.atleast_1d(np.asarray(rs, dtype=np.float64))
    target = classical_directivity(params.m, angles)
    out = np.empty((freqs.size, rs.size))
    for j, r in enumerate(rs):
        for i, f in enumerate(freqs):
            table = monochromatic_pattern(params, f, r, angles, integrator)
            out[i, j] = np.max(np.abs(table.magnitude[:, 0, 0] - target))
    return out


def band_average_pattern(params: MicParams, r: float, band_lo: float, band_hi: float,
                         angles: np.ndarray | None = None, integrator: str = "lossy",
                         n_points: int = 32) -> np.ndarray:
    """Mean of |H_dir| over a fine in-band frequency grid, per angle."""
    if angles is None:
        angles = angle_grid()
    angles = np.asarray(angles, dtype=np.float64)
    grid = np.linspace(band_lo, min(band_hi, params.fs / 2.0), n_points)
    mags = np.empty(angles.size)
    for i, theta in enumerate(angles):
        resp = directivity_response(ScenePose(r=r, theta=theta), params, grid, integrator)
        mags[i] = np.mean(np.abs(resp.gain))
    return mags


def subband_pattern(stimulus: np.ndarray, params: MicParams, r: float,
                    bands: BandSet, angles: np.ndarray | None = None,
                    interpolation: str = "lagrange",
                    silence_floor: float = 1e-12) -> PatternTable:
    """Per-band directivity measured with a broadband stimulus.

    For each angle the stimulus is rendered through the engine twice (the
    configured m, then m = 1 at the same pose); per-band RMS ratios give an
    energy-domain |H_dir| per band. The stimulus must be audible in every
    band relative to its overall level.
    """
    if angles is None:
        angles = angle_grid()
    angles = np.asarray(angles, dtype=np.float64)
    stimulus = np.asarray(stimulus, dtype=np.float64)
    if stimulus.size == 0:
        raise ValueError("stimulus must not be empty")

    stim_bands = band_energies(stimulus, params.fs, bands)
    floor = silence_floor * float(np.mean(stimulus**2))
    silent = np.nonzero(stim_bands < floor)[0]
    if silent.size:
        names = ", ".join(bands.labels[i] for i in silent)
        raise BandSilenceError(f"stimulus is below the noise floor in bands: {names}")

    omni_params = replace(params, m=1.0)
    mags = np.empty((angles.size, bands.n_bands))
    for i, theta in enumerate(angles):
        pose = ScenePose(r=r, theta=theta)
        rendered = render_pose(stimulus, params, pose, interpolation=interpolation)
        reference = render_pose(stimulus, omni_params, pose, interpolation=interpolation)
        e_dir = band_energies(rendered, params.fs, bands)
        e_ref = band_energies(reference, params.fs, bands)
        mags[i] = np.sqrt(e_dir / e_ref)
    return PatternTable(
        angles=angles, freqs=bands.centers, distances=np.array([r]),
        magnitude=mags.reshape(angles.size, bands.n_bands, 1),
        integrator="lossy", params=_params_snapshot(params, r),
        freq_labels=bands.labels,
    )


def proximity_curve(params: MicParams, theta: float, f_low: float, f_ref: float,
                    rs: np.ndarray, integrator: str = "lossy") -> np.ndarray:
    """Low-frequency boost in dB per distance, 0 dB at the farthest point.

    boost(r) = 20 log10(|H_dir(f_low, r)| / |H_dir(f_ref, r)|), normalized
    so the largest distance reads 0 dB.
    """
    if not f_low < f_ref:
        raise ValueError(f"f_low ({f_low}) must be below f_ref ({f_ref})")
    rs = np.atleast_1d(np.asarray(rs, dtype=np.float64))
    boost = np.empty(rs.size)
    grid = np.array([f_low, f_ref])
    for i, r in enumerate(rs):
        resp = directivity_response(ScenePose(r=r, theta=theta), params, grid, integrator)
        boost[i] = 20.0 * math.log10(abs(resp.gain[0]) / abs(resp.gain[1]))
    far = rs.argmax()
    return boost - boost[far]


def energy_balance(signal: np.ndarray, fs: float, bands: BandSet,
                   frame_ms: float = 50.0) -> EnergyBalance:
    """Time-varying band energies: one row of mean-square energies per frame."""
    signal = np.asarray(signal, dtype=np.float64)
    if signal.size == 0:
        raise ValueError("cannot analyze an empty signal")
    if frame_ms < 10.0:
        raise ValueError(f"frame must be at least 10 ms, got {frame_ms}")
    frame = int(round(frame_ms * fs / 1000.0))
    n_frames = signal.size // frame
    if n_frames == 0:
        raise ValueError("signal shorter than one frame")
    energies = np.empty((n_frames, bands.n_bands))
    totals = np.empty(n_frames)
    for k in range(n_frames):
        chunk = signal[k * frame:(k + 1) * frame]
        energies[k] = band_energies(chunk, fs, bands)
        totals[k] = float(np.mean(chunk**2))
    return EnergyBalance(frame_duration=frame / fs, bands=bands,
                         energies=energies, totals=totals)


def pink_noise(n: int, seed: int = 0) -> np.ndarray:
    """Deterministic pink (1/f power) noise, unit peak, via FFT shaping."""
    rng = np.random.default_rng(seed)
    white = rng.standard_normal(n)
    spec = np.fft.rfft(white)
    k = np.arange(spec.shape[0], dtype=np.float64)
    k[0] = 1.0
    spec /= np.sqrt(k)
    spec[0] = 0.0
    out = np.fft.irfft(spec, n=n)
    return out / np.max(np.abs(out))
