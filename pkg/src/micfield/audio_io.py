"""RIFF/WAVE reading and writing.

The engine works in float64 throughout; file bit depth only matters at the
boundary. Readers accept 16/24-bit PCM and 32-bit IEEE float, little-endian,
and skip unknown chunks. The 16/24-bit writers quantize with
round-half-away-from-zero and clamp, reporting how many samples clipped.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass

import numpy as np


class WavFormatError(ValueError):
    """Malformed or unsupported RIFF/WAVE content."""


@dataclass
class AudioBuffer:
    """Planar float audio: samples has shape (channels, n), nominal range [-1, 1]."""

    fs: int
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=np.float64))
        if self.fs <= 0:
            raise ValueError(f"sampling rate must be > 0, got {self.fs}")
        if self.samples.ndim != 2 or self.samples.shape[0] < 1:
            raise ValueError("samples must have shape (channels, n)")

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.fs


def to_mono(buffer: AudioBuffer) -> AudioBuffer:
    """Average all channels down to one; mono passes through unchanged."""
    if buffer.channels == 1:
        return buffer
    mono = buffer.samples.mean(axis=0, keepdims=True)
    return AudioBuffer(fs=buffer.fs, samples=mono)


def quantize(x: np.ndarray, bits: int) -> tuple[np.ndarray, int]:
    """Quantize floats to bits-wide signed PCM codes.

    Rounds half away from zero, clamps to the code range, and returns the
    codes plus the count of samples that had to be clamped.
    """
    full = float(1 << (bits - 1))
    scaled = x * full
    rounded = np.where(scaled >= 0.0, np.floor(scaled + 0.5), np.ceil(scaled - 0.5))
    lo, hi = -full, full - 1.0
    clipped = int(np.count_nonzero((rounded < lo) | (rounded > hi)))
    codes = np.clip(rounded, lo, hi).astype(np.int32)
    return codes, clipped


def read_wav(path) -> AudioBuffer:
    """Read a RIFF/WAVE file (PCM 16/24-bit or IEEE float 32-bit)."""
    with open(path, "rb") as fh:
        data = fh.read()
    return _parse_wav(data)


def read_wav_bytes(data: bytes) -> AudioBuffer:
    """Parse WAV content already held in memory (e.g. an upload body)."""
    return _parse_wav(data)


def _parse_wav(data: bytes) -> AudioBuffer:
    if len(data) < 12:
        raise WavFormatError("file too short for a RIFF header")
    riff, _size, wave = struct.unpack("<4sI4s", data[:12])
    if riff != b"RIFF":
        raise WavFormatError(f"not a RIFF file (leading chunk id {riff!r})")
    if wave != b"WAVE":
        raise WavFormatError(f"RIFF form type is {wave!r}, expected b'WAVE'")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        cid, csize = struct.unpack("<4sI", data[pos : pos + 8])
        body = data[pos + 8 : pos + 8 + csize]
        if cid == b"fmt ":
            if csize < 16 or len(body) < 16:
                raise WavFormatError("fmt chunk truncated")
            fmt = struct.unpack("<HHIIHH", body[:16])
        elif cid == b"data":
            if len(body) < csize:
                raise WavFormatError(
                    f"data chunk truncated: header says {csize} bytes, "
                    f"{len(body)} present"
                )
            payload = body
        # unknown chunks are skipped
        pos += 8 + csize + (csize & 1)

    if fmt is None:
        raise WavFormatError("missing fmt chunk")
    if payload is None:
        raise WavFormatError("missing data chunk")

    tag, channels, fs, _byte_rate, _block_align, bits = fmt
    if channels < 1:
        raise WavFormatError(f"fmt chunk declares {channels} channels")

    if tag == 1 and bits == 16:
        raw = np.frombuffer(payload, dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif tag == 1 and bits == 24:
        frames = len(payload) // 3
        b = np.frombuffer(payload[: frames * 3], dtype=np.uint8).reshape(frames, 3)
        raw = (
            b[:, 0].astype(np.int32)
            | (b[:, 1].astype(np.int32) << 8)
            | (b[:, 2].astype(np.int32) << 16)
        )
        raw = np.where(raw >= 1 << 23, raw - (1 << 24), raw)
        samples = raw.astype(np.float64) / 8388608.0
    elif tag == 3 and bits == 32:
        samples = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    else:
        raise WavFormatError(
            f"unsupported codec in fmt chunk: format tag {tag}, {bits} bits "
            "(supported: PCM 16/24-bit, IEEE float 32-bit)"
        )

    n = samples.shape[0] // channels
    planar = samples[: n * channels].reshape(n, channels).T.copy()
    return AudioBuffer(fs=int(fs), samples=planar)


def write_wav(buffer: AudioBuffer, path, bit_depth: int = 16) -> int:
    """Write a RIFF/WAVE file; returns the number of clipped samples.

    16/24-bit output is PCM with round-half-away-from-zero quantization;
    32-bit output is IEEE float and never clips.
    """
    if bit_depth not in (16, 24, 32):
        raise ValueError(f"unsupported bit depth {bit_depth} (use 16, 24 or 32)")

    interleaved = buffer.samples.T.reshape(-1)
    clipped = 0
    if bit_depth == 16:
        codes, clipped = quantize(interleaved, 16)
        payload = codes.astype("<i2").tobytes()
        tag = 1
    elif bit_depth == 24:
        codes, clipped = quantize(interleaved, 24)
        u = codes.astype(np.int32).view(np.uint32)
        b = np.empty((codes.shape[0], 3), dtype=np.uint8)
        b[:, 0] = u & 0xFF
        b[:, 1] = (u >> 8) & 0xFF
        b[:, 2] = (u >> 16) & 0xFF
        payload = b.tobytes()
        tag = 1
    else:
        payload = interleaved.astype("<f4").tobytes()
        tag = 3

    channels = buffer.channels
    bytes_per = bit_depth // 8
    block_align = channels * bytes_per
    byte_rate = int(buffer.fs) * block_align

    out = io.BytesIO()
    out.write(b"RIFF")
    out.write(struct.pack("<I", 36 + len(payload)))
    out.write(b"WAVE")
    out.write(b"fmt ")
    out.write(struct.pack("<IHHIIHH", 16, tag, channels, int(buffer.fs), byte_rate, block_align, bit_depth))
    out.write(b"data")
    out.write(struct.pack("<I", len(payload)))
    out.write(payload)
    if len(payload) & 1:
        out.write(b"\x00")

    with open(path, "wb") as fh:
        fh.write(out.getvalue())
    return clipped
