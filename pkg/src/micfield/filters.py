"""Digital filter kernels of the captured-field model.

Time-domain building blocks (fractional delay line, lossy integrator) feed
the block renderer; the analytic frequency responses of the omnidirectional,
dipolar, bidirectional, global and directivity filters feed the analysis
tools. The directivity filter exists only in the frequency domain because
its delay differences can be non-causal advances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .geometry import MicParams, ScenePose, tap_set

INTERPOLATION_MODES = ("linear", "lagrange")
INTEGRATOR_MODES = ("lossy", "ideal")


class DelayLine:
    """Ring buffer with fractional-delay reads.

    Reading at delay 0 returns the most recently written sample. Fractional
    delays interpolate between the bracketing integer delays: 2-point linear
    by default, 4-point (3rd-order) Lagrange for analysis-grade renders.
    Lagrange reads need one future-side neighbor, so they require delay >= 1.
    """

    def __init__(self, max_delay: float, block_size: int = 4096):
        if max_delay < 0:
            raise ValueError("max_delay must be >= 0")
        self.max_delay = float(max_delay)
        self.block_size = int(block_size)
        self._cap = int(math.ceil(self.max_delay)) + self.block_size + 4
        self._buf = np.zeros(self._cap)
        self._total = 0  # samples written since reset

    def write(self, sample: float) -> None:
        self._buf[self._total % self._cap] = sample
        self._total += 1

    def write_block(self, block: np.ndarray) -> None:
        block = np.asarray(block, dtype=np.float64)
        n = block.shape[0]
        if n > self.block_size:
            raise ValueError(f"block of {n} exceeds configured block size {self.block_size}")
        idx = (self._total + np.arange(n)) % self._cap
        self._buf[idx] = block
        self._total += n

    def read(self, delay: float, mode: str = "linear") -> float:
        return float(self.read_block(delay, 1, mode)[0])

    def read_block(self, delay: float, n: int, mode: str = "linear") -> np.ndarray:
        """Read the n most recent output positions at a fractional delay.

        Element i corresponds to input time (total_written - n + i); the
        last element is the newest position (same as a scalar read).
        """
        if not 0.0 <= delay <= self.max_delay:
            raise ValueError(
                f"delay {delay} outside configured range [0, {self.max_delay}]"
            )
        if mode not in INTERPOLATION_MODES:
            raise ValueError(f"unknown interpolation mode {mode!r}")
        q = int(math.floor(delay))
        frac = delay - q
        t = self._total - n + np.arange(n)
        if mode == "linear":
            s0 = self._buf[(t - q) % self._cap]
            s1 = self._buf[(t - q - 1) % self._cap]
            return (1.0 - frac) * s0 + frac * s1
        # 4-point Lagrange around integer delays q-1 .. q+2
        if delay < 1.0:
            raise ValueError("lagrange interpolation requires delay >= 1")
        a = frac
        h0 = -a * (a - 1.0) * (a - 2.0) / 6.0
        h1 = (a + 1.0) * (a - 1.0) * (a - 2.0) / 2.0
        h2 = -(a + 1.0) * a * (a - 2.0) / 2.0
        h3 = (a + 1.0) * a * (a - 1.0) / 6.0
        s = (
            h0 * self._buf[(t - q + 1) % self._cap]
            + h1 * self._buf[(t - q) % self._cap]
            + h2 * self._buf[(t - q - 1) % self._cap]
            + h3 * self._buf[(t - q - 2) % self._cap]
        )
        return s

    def reset(self) -> None:
        self._buf[:] = 0.0
        self._total = 0


class LossyIntegrator:
    """First-order lossy integrator y[n] = g*y[n-1] + (x[n] + x[n-1]) / (2*fs).

    Bilinear-transform approximation of 1/(j*omega) with its pole pulled to
    g < 1 for stability. Block processing carries exact filter state, so a
    stream split into blocks of any size produces bit-identical output.
    """

    def __init__(self, g: float, fs: float):
        if not 0.0 <= g < 1.0:
            raise ValueError(f"loss coefficient g must be in [0, 1), got {g}")
        self.g = float(g)
        self.fs = float(fs)
        self.prev_in = 0.0
        self.prev_out = 0.0
        self._b = np.array([0.5 / self.fs, 0.5 / self.fs])
        self._a = np.array([1.0, -self.g])
        self._zi = np.zeros(1)

    def step(self, x: float) -> float:
        y = self.g * self.prev_out + (x + self.prev_in) / (2.0 * self.fs)
        self.prev_in = x
        self.prev_out = y
        self._zi[0] = self._b[1] * x + self.g * y
        return y

    def process_block(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        y, zf = lfilter(self._b, self._a, x, zi=self._zi)
        self._zi = zf
        if x.shape[0]:
            self.prev_in = float(x[-1])
            self.prev_out = float(y[-1])
        return y

    def clone(self) -> "LossyIntegrator":
        other = LossyIntegrator(self.g, self.fs)
        other.prev_in = self.prev_in
        other.prev_out = self.prev_out
        other._zi = self._zi.copy()
        return other

    def reset(self) -> None:
        self.prev_in = 0.0
        self.prev_out = 0.0
        self._zi[:] = 0.0

    @property
    def dc_gain(self) -> float:
        return 1.0 / (self.fs * (1.0 - self.g))


@dataclass(frozen=True)
class FrequencyResponse:
    """Complex gain sampled on a frequency grid in (0, fs/2]."""

    freqs: np.ndarray
    gain: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "freqs", np.asarray(self.freqs, dtype=np.float64))
        object.__setattr__(self, "gain", np.asarray(self.gain, dtype=np.complex128))
        if self.freqs.shape != self.gain.shape:
            raise ValueError("frequency grid and gain must have the same shape")

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.gain)


def default_grid(fs: float, n: int = 1024, f_min: float = 20.0) -> np.ndarray:
    """Log-spaced frequency grid in [f_min, fs/2], n points."""
    grid = np.logspace(math.log10(f_min), math.log10(fs / 2.0), n)
    grid[-1] = fs / 2.0  # the log/exp round trip can overshoot by an ulp
    return grid


def _check_grid(freqs: np.ndarray, fs: float) -> np.ndarray:
    freqs = np.atleast_1d(np.asarray(freqs, dtype=np.float64))
    if freqs.ndim != 1 or freqs.size == 0:
        raise ValueError("frequency grid must be a non-empty 1-D array")
    if np.any(np.diff(freqs) <= 0.0):
        raise ValueError("frequency grid must be strictly increasing")
    if freqs[0] <= 0.0 or freqs[-1] > fs / 2.0:
        raise ValueError(f"frequency grid must lie in (0, fs/2] for fs={fs}")
    return freqs


def integrator_response(freqs: np.ndarray, fs: float, g: float, mode: str = "lossy") -> np.ndarray:
    """Complex gain of the integrator on a grid: ideal 1/(j*2*pi*f) or the
    lossy recurrence evaluated on the unit circle."""
    freqs = _check_grid(freqs, fs)
    if mode == "ideal":
        return 1.0 / (1j * 2.0 * np.pi * freqs)
    if mode == "lossy":
        z1 = np.exp(-1j * 2.0 * np.pi * freqs / fs)
        return (1.0 / (2.0 * fs)) * (1.0 + z1) / (1.0 - g * z1)
    raise ValueError(f"unknown integrator mode {mode!r}")


def omni_response(pose: ScenePose, params: MicParams, freqs: np.ndarray) -> FrequencyResponse:
    """Center-point field: 1/r gain and a pure r/c0 delay."""
    freqs = _check_grid(freqs, params.fs)
    taps = tap_set(pose, params)
    tau0 = taps.delay0 / params.fs
    gain = taps.gain0 * np.exp(-1j * 2.0 * np.pi * freqs * tau0)
    return FrequencyResponse(freqs, gain)


def dipole_response(pose: ScenePose, params: MicParams, freqs: np.ndarray) -> FrequencyResponse:
    """Difference of the two capsule-point fields."""
    freqs = _check_grid(freqs, params.fs)
    taps = tap_set(pose, params)
    tau1 = taps.delay1 / params.fs
    tau2 = taps.delay2 / params.fs
    w = 2.0 * np.pi * freqs
    gain = taps.gain1 * np.exp(-1j * w * tau1) - taps.gain2 * np.exp(-1j * w * tau2)
    return FrequencyResponse(freqs, gain)


def bidi_response(
    pose: ScenePose, params: MicParams, freqs: np.ndarray, integrator: str = "lossy"
) -> FrequencyResponse:
    """Dipolar field through the (c0/d)-scaled integrator."""
    dip = dipole_response(pose, params, freqs)
    integ = integrator_response(dip.freqs, params.fs, params.g, integrator)
    return FrequencyResponse(dip.freqs, integ * (params.c0 / params.d) * dip.gain)


def global_response(
    pose: ScenePose, params: MicParams, freqs: np.ndarray, integrator: str = "lossy"
) -> FrequencyResponse:
    """Directional captured field: m * omni + (1 - m) * bidi."""
    omni = omni_response(pose, params, freqs)
    bidi = bidi_response(pose, params, freqs, integrator)
    return FrequencyResponse(omni.freqs, params.m * omni.gain + (1.0 - params.m) * bidi.gain)


def directivity_response(
    pose: ScenePose, params: MicParams, freqs: np.ndarray, integrator: str = "lossy"
) -> FrequencyResponse:
    """Departure from the omnidirectional case: global / omni.

    Computed directly from the delay differences (a "double" comb over a
    direct channel), so the non-causal advances are well-defined. Reduces to
    m + (1-m)*cos(theta) in the monochromatic low-frequency far-field limit.
    """
    freqs = _check_grid(freqs, params.fs)
    taps = tap_set(pose, params)
    integ = integrator_response(freqs, params.fs, params.g, integrator)
    dtau1 = (taps.delay0 - taps.delay1) / params.fs
    dtau2 = (taps.delay0 - taps.delay2) / params.fs
    w = 2.0 * np.pi * freqs
    comb = (
        taps.gain1 * pose.r * np.exp(1j * w * dtau1)
        - taps.gain2 * pose.r * np.exp(1j * w * dtau2)
    )
    gain = params.m + (1.0 - params.m) * integ * (params.c0 / params.d) * comb
    return FrequencyResponse(freqs, gain)
