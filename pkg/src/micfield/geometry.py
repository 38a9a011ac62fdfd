"""Source/capsule geometry for the three-point captured-field model.

A virtual microphone is three coplanar captation points: the center O at the
origin of the mic's local frame, and two capsule points O1(+d/2, 0) and
O2(-d/2, 0) on the mic axis. A source at polar (r, theta) sees three
spherical propagation paths; their 1/distance gains and distance/c0 delays
are everything the render and analysis filters need.

Validity domain: the source may not lie inside the capsule pair (r >= d/2),
and may not coincide with a captation point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

DEFAULT_SPEED_OF_SOUND = 343.0
DEFAULT_SAMPLE_RATE = 44100.0

TWO_PI = 2.0 * math.pi


class ValidityError(ValueError):
    """Scene geometry outside the model's validity domain."""


@dataclass(frozen=True)
class ScenePose:
    """Source position relative to one microphone.

    r: source-to-mic-center distance in meters (> 0).
    theta: incidence angle in radians, measured from the mic axis;
        normalized to [0, 2*pi).
    """

    r: float
    theta: float

    def __post_init__(self):
        if not (self.r > 0.0) or not math.isfinite(self.r):
            raise ValidityError(f"source distance must be > 0, got r={self.r}")
        if not math.isfinite(self.theta):
            raise ValidityError(f"incidence angle must be finite, got theta={self.theta}")
        object.__setattr__(self, "theta", self.theta % TWO_PI)


@dataclass(frozen=True)
class MicParams:
    """Static parameters of one virtual microphone.

    m: directivity coefficient in [0, 1] (1 = omni, 0 = bidirectional,
        0.5 = cardioid).
    d: capsule spacing in meters (> 0).
    g: integrator loss coefficient in [0, 1).
    c0: speed of sound in m/s.
    fs: sampling rate in Hz.
    """

    m: float
    d: float
    g: float = 0.9
    c0: float = DEFAULT_SPEED_OF_SOUND
    fs: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        if not 0.0 <= self.m <= 1.0:
            raise ValueError(f"directivity coefficient m must be in [0, 1], got {self.m}")
        if not self.d > 0.0:
            raise ValueError(f"capsule spacing d must be > 0, got {self.d}")
        if not 0.0 <= self.g < 1.0:
            raise ValueError(f"integrator loss g must be in [0, 1), got {self.g}")
        if not self.c0 > 0.0:
            raise ValueError(f"speed of sound c0 must be > 0, got {self.c0}")
        if not self.fs > 0.0:
            raise ValueError(f"sampling rate fs must be > 0, got {self.fs}")


@dataclass(frozen=True)
class TapSet:
    """The three propagation paths of one mic/source pairing.

    gain0/1/2 are the 1/distance amplitude factors (1/m) for the center and
    the two capsule points; delay0/1/2 the matching fractional delays in
    samples (fs * distance / c0).
    """

    gain0: float
    gain1: float
    gain2: float
    delay0: float
    delay1: float
    delay2: float

    @property
    def max_delay(self) -> float:
        return max(self.delay0, self.delay1, self.delay2)


def capsule_distances(pose: ScenePose, d: float) -> tuple[float, float]:
    """Distances from the source to the two capsule points O1(+d/2) and O2(-d/2).

    Raises ValidityError when r < d/2 (source inside the capsule pair).
    """
    if not d > 0.0:
        raise ValueError(f"capsule spacing d must be > 0, got {d}")
    r, theta = pose.r, pose.theta
    if r < d / 2.0:
        raise ValidityError(
            f"source distance r={r} violates the validity bound r >= d/2 (d={d})"
        )
    rdcos = r * d * math.cos(theta)
    quarter = d * d / 4.0
    r1 = math.sqrt(r * r + quarter - rdcos)
    r2 = math.sqrt(r * r + quarter + rdcos)
    return r1, r2


def check_pairing(pose: ScenePose, params: MicParams) -> None:
    """Raise ValidityError if the pose violates r >= d/2 for these params."""
    if pose.r < params.d / 2.0:
        raise ValidityError(
            f"source distance r={pose.r} violates the validity bound "
            f"r >= d/2 (d={params.d})"
        )


def tap_set(pose: ScenePose, params: MicParams, gain_ceiling: float | None = None) -> TapSet:
    """Gains and fractional sample delays of the three propagation paths.

    Gains are clamped at `gain_ceiling` (default 2/d, the 1/r value at the
    validity bound) so a source grazing a capsule point can never produce an
    unbounded gain. A source exactly on a capsule point is an error.
    """
    check_pairing(pose, params)
    r1, r2 = capsule_distances(pose, params.d)
    if r1 == 0.0 or r2 == 0.0:
        raise ValidityError(
            "source coincides with a captation point (r1 or r2 is zero)"
        )
    ceiling = gain_ceiling if gain_ceiling is not None else 2.0 / params.d
    scale = params.fs / params.c0
    return TapSet(
        gain0=min(1.0 / pose.r, ceiling),
        gain1=min(1.0 / r1, ceiling),
        gain2=min(1.0 / r2, ceiling),
        delay0=pose.r * scale,
        delay1=r1 * scale,
        delay2=r2 * scale,
    )


def pose_from_scene(
    source_position: tuple[float, float],
    mic_position: tuple[float, float],
    mic_orientation: float = 0.0,
) -> ScenePose:
    """Convert scene Cartesian coordinates to the mic's local polar pose.

    mic_orientation is the scene angle (radians) the mic axis points toward;
    incidence theta is measured from that axis.
    """
    dx = source_position[0] - mic_position[0]
    dy = source_position[1] - mic_position[1]
    r = math.hypot(dx, dy)
    if r == 0.0:
        raise ValidityError("source coincides with the microphone center")
    theta = math.atan2(dy, dx) - mic_orientation
    return ScenePose(r=r, theta=theta % TWO_PI)
