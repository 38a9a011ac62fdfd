"""Third-octave band partition for subband analysis.

Band edges follow the exact base-2 third-octave lattice (center frequencies
1000 * 2**(n/3), edges a factor 2**(1/6) either side), so adjacent bands
share edges exactly: no gaps, no overlap. Band energies are computed by
partitioning FFT bins, which conserves total energy (Parseval), so the sum
of band energies can never exceed the frame energy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# IEC-style nominal labels for base-2 centers 1000 * 2**(n/3), n = -15 .. 12
_NOMINAL = [
    "31.5", "40", "50", "63", "80", "100", "125", "160", "200", "250",
    "315", "400", "500", "630", "800", "1k", "1.25k", "1.6k", "2k", "2.5k",
    "3.15k", "4k", "5k", "6.3k", "8k", "10k", "12.5k", "16k",
]
_N_LOW = -15


@dataclass(frozen=True)
class BandSet:
    """Contiguous frequency bands: edges (len n+1, increasing) plus labels."""

    edges: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", np.asarray(self.edges, dtype=np.float64))
        if self.edges.ndim != 1 or self.edges.size < 2:
            raise ValueError("a band set needs at least two edges")
        if np.any(np.diff(self.edges) <= 0.0):
            raise ValueError("band edges must be strictly increasing")
        if self.edges[0] <= 0.0:
            raise ValueError("band edges must be positive")
        if len(self.labels) != self.edges.size - 1:
            raise ValueError("need exactly one label per band")

    @property
    def n_bands(self) -> int:
        return self.edges.size - 1

    @property
    def centers(self) -> np.ndarray:
        return np.sqrt(self.edges[:-1] * self.edges[1:])

    def index_of(self, f: float) -> int:
        """Index of the band containing frequency f."""
        if not self.edges[0] <= f < self.edges[-1]:
            raise ValueError(f"{f} Hz is outside the band set")
        return int(np.searchsorted(self.edges, f, side="right") - 1)


def third_octave_bands(fs: float, n_low: int = _N_LOW, n_high: int = _N_LOW + len(_NOMINAL) - 1) -> BandSet:
    """Standard third-octave bands (31.5 Hz .. 16 kHz) that fit below fs/2."""
    ns = np.arange(n_low, n_high + 1)
    edges = 1000.0 * 2.0 ** ((np.concatenate([ns, [n_high + 1]]) - 0.5) / 3.0)
    labels = [_NOMINAL[n - _N_LOW] for n in ns]
    keep = int(np.searchsorted(edges, fs / 2.0, side="right")) - 1
    if keep < 1:
        raise ValueError(f"sampling rate {fs} too low for the requested bands")
    return BandSet(edges=edges[: keep + 1], labels=tuple(labels[:keep]))


def band_energies(x: np.ndarray, fs: float, bands: BandSet) -> np.ndarray:
    """Mean-square energy of x inside each band (FFT-bin partition).

    Bins outside the band set (including DC) are discarded, so the result
    sums to at most the total mean square of the frame.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if n == 0:
        raise ValueError("cannot analyze an empty signal")
    spec = np.fft.rfft(x)
    weights = np.full(spec.shape[0], 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    power = weights * np.abs(spec) ** 2 / (n * n)
    freqs = np.arange(spec.shape[0]) * (fs / n)
    idx = np.searchsorted(bands.edges, freqs, side="right") - 1
    valid = (idx >= 0) & (idx < bands.n_bands) & (freqs > 0.0)
    out = np.zeros(bands.n_bands)
    np.add.at(out, idx[valid], power[valid])
    return out
