"""Block-based time-domain rendering of directional captured sound fields.

Per microphone the engine realizes m * omni + (1 - m) * (c0/d) * I{dipole}
with three fractional-delay taps over a shared source ring buffer and one
lossy integrator. Pose and parameter changes are queued and applied only at
block boundaries, optionally with a crossfade between the old-path and
new-path renders to avoid delay-line zipper noise.
"""

from __future__ import annotations

import math
import queue
from dataclasses import dataclass, field

import numpy as np

from .filters import DelayLine, LossyIntegrator, INTERPOLATION_MODES
from .geometry import MicParams, ScenePose, TapSet, pose_from_scene, tap_set

DEFAULT_BLOCK_SIZE = 256
DEFAULT_CROSSFADE_MS = 20.0
DEFAULT_MAX_DISTANCE = 50.0
TAIL_FLOOR_DB = -96.0


@dataclass
class MicSetup:
    """Scene-level description of one microphone."""

    params: MicParams
    position: tuple[float, float] = (0.0, 0.0)
    orientation: float = 0.0
    label: str = "mic"


@dataclass
class TrajectoryPoint:
    t: float
    position: tuple[float, float]


@dataclass
class Scene:
    """A mono source plus any number of microphones sharing one sample rate."""

    fs: float
    mics: list[MicSetup]
    source_position: tuple[float, float] = (1.0, 0.0)
    trajectory: list[TrajectoryPoint] = field(default_factory=list)

    def __post_init__(self):
        if self.fs <= 0:
            raise ValueError(f"scene sample rate must be > 0, got {self.fs}")
        if not self.mics:
            raise ValueError("scene needs at least one microphone")
        for mic in self.mics:
            if mic.params.fs != self.fs:
                raise ValueError(
                    f"mic {mic.label!r} fs={mic.params.fs} does not match scene fs={self.fs}"
                )
        if self.trajectory:
            ts = [p.t for p in self.trajectory]
            if sorted(ts) != ts:
                raise ValueError("trajectory timestamps must be non-decreasing")

    def pose_for(self, mic_index: int, source_position=None) -> ScenePose:
        mic = self.mics[mic_index]
        pos = source_position if source_position is not None else self.source_position
        return pose_from_scene(pos, mic.position, mic.orientation)


class _Fade:
    """State of an in-progress old-path/new-path crossfade."""

    __slots__ = ("taps", "integrator", "m", "cd_scale", "total", "done")

    def __init__(self, taps, integrator, m, cd_scale, total):
        self.taps = taps
        self.integrator = integrator
        self.m = m
        self.cd_scale = cd_scale
        self.total = total
        self.done = 0


class MicVoice:
    """Render state for one microphone: three taps + integrator + fade."""

    def __init__(self, params: MicParams, pose: ScenePose, ring: DelayLine,
                 interpolation: str = "linear"):
        if interpolation not in INTERPOLATION_MODES:
            raise ValueError(f"unknown interpolation mode {interpolation!r}")
        self.params = params
        self.pose = pose
        self.interpolation = interpolation
        self._ring = ring
        self._taps = tap_set(pose, params)
        self._integ = LossyIntegrator(params.g, params.fs)
        self._fade: _Fade | None = None

    @property
    def taps(self) -> TapSet:
        return self._taps

    def retarget(self, pose: ScenePose | None = None, params: MicParams | None = None,
                 crossfade_samples: int = 0, taps: TapSet | None = None) -> TapSet:
        """Switch to a new pose and/or params, optionally crossfading.

        Validation happens here (tap_set raises on invalid pairings), so
        callers queueing updates can surface errors before render time.
        """
        new_pose = pose if pose is not None else self.pose
        new_params = params if params is not None else self.params
        new_taps = taps if taps is not None else tap_set(new_pose, new_params)
        if crossfade_samples > 0:
            # the outgoing path keeps its own integrator copy; the incoming
            # path inherits the current state for continuity
            self._fade = _Fade(
                self._taps, self._integ.clone(), self.params.m,
                self.params.c0 / self.params.d, int(crossfade_samples),
            )
        else:
            self._fade = None
        if new_params.g != self.params.g:
            self._integ = LossyIntegrator(new_params.g, new_params.fs)
        self.pose = new_pose
        self.params = new_params
        self._taps = new_taps
        return new_taps

    def _path(self, taps: TapSet, integ: LossyIntegrator, m: float,
              cd_scale: float, n: int) -> np.ndarray:
        read = self._ring.read_block
        mode = self.interpolation
        direct = taps.gain0 * read(taps.delay0, n, mode)
        dip = taps.gain1 * read(taps.delay1, n, mode) - taps.gain2 * read(taps.delay2, n, mode)
        return m * direct + (1.0 - m) * cd_scale * integ.process_block(dip)

    def process(self, n: int) -> np.ndarray:
        """Output for the n source samples most recently written to the ring."""
        p = self.params
        out = self._path(self._taps, self._integ, p.m, p.c0 / p.d, n)
        fade = self._fade
        if fade is not None:
            old = self._path(fade.taps, fade.integrator, fade.m, fade.cd_scale, n)
            w = np.minimum((fade.done + 1.0 + np.arange(n)) / fade.total, 1.0)
            out = (1.0 - w) * old + w * out
            fade.done += n
            if fade.done >= fade.total:
                self._fade = None
        return out

    @property
    def fading(self) -> bool:
        return self._fade is not None

    def decay_samples(self, floor_db: float = TAIL_FLOOR_DB) -> int:
        if self.params.g <= 0.0:
            return 1
        return int(math.ceil(floor_db / 20.0 * math.log(10.0) / math.log(self.params.g)))


class SceneRenderer:
    """Owns all per-scene render state and advances it block by block.

    One thread owns process_block; other threads submit pose/parameter
    updates through set_* methods, which validate eagerly, queue the change,
    and return the derived taps. Queued changes land atomically at the next
    block boundary and bump the snapshot index.
    """

    def __init__(self, scene: Scene, block_size: int = DEFAULT_BLOCK_SIZE,
                 interpolation: str = "linear",
                 max_distance: float = DEFAULT_MAX_DISTANCE,
                 crossfade_ms: float = DEFAULT_CROSSFADE_MS):
        self.scene = scene
        self.block_size = int(block_size)
        self.interpolation = interpolation
        self.max_distance = float(max_distance)
        self.crossfade_ms = float(crossfade_ms)
        self.fs = scene.fs

        slowest = min(m.params.c0 for m in scene.mics)
        max_delay = scene.fs * self.max_distance / slowest
        self._ring = DelayLine(max_delay, block_size=self.block_size)
        self._voices = [
            MicVoice(m.params, scene.pose_for(i), self._ring, interpolation)
            for i, m in enumerate(scene.mics)
        ]
        self._source_position = tuple(scene.source_position)
        self._trajectory = list(scene.trajectory)
        self._next_waypoint = 0
        self._updates: queue.Queue = queue.Queue()
        self._blocks_done = 0
        self._snapshot = 0

    # -- introspection ----------------------------------------------------

    @property
    def n_mics(self) -> int:
        return len(self._voices)

    @property
    def voices(self) -> list[MicVoice]:
        return self._voices

    @property
    def blocks_done(self) -> int:
        return self._blocks_done

    @property
    def snapshot_index(self) -> int:
        return self._snapshot

    @property
    def source_position(self) -> tuple[float, float]:
        return self._source_position

    @property
    def fading(self) -> bool:
        return any(v.fading for v in self._voices)

    @property
    def tail_samples(self) -> int:
        """Samples needed to flush the longest delay plus integrator decay."""
        longest = max(v.taps.max_delay for v in self._voices)
        decay = max(v.decay_samples() for v in self._voices)
        return int(math.ceil(longest)) + 4 + decay

    def derived_state(self, mic_index: int) -> dict:
        v = self._voices[mic_index]
        t = v.taps
        return {
            "r": v.pose.r,
            "theta": v.pose.theta,
            "delays": [t.delay0, t.delay1, t.delay2],
            "gains": [t.gain0, t.gain1, t.gain2],
        }

    # -- updates (any thread) ----------------------------------------------

    def _crossfade_samples(self, smoothing) -> int:
        if smoothing is None:
            return 0
        if smoothing == "default":
            smoothing = self.crossfade_ms
        return int(round(float(smoothing) * self.fs / 1000.0))

    def update_pose(self, mic_index: int, pose: ScenePose, smoothing="default") -> TapSet:
        """Queue a pose change for one mic; validates and returns the new taps."""
        voice = self._voices[mic_index]
        taps = tap_set(pose, voice.params)  # raises ValidityError eagerly
        self._check_reach(taps)
        fade = self._crossfade_samples(smoothing)
        self._updates.put(lambda: voice.retarget(pose=pose, taps=taps, crossfade_samples=fade))
        return taps

    def update_params(self, mic_index: int, params: MicParams, smoothing="default") -> TapSet:
        voice = self._voices[mic_index]
        taps = tap_set(voice.pose, params)
        self._check_reach(taps)
        fade = self._crossfade_samples(smoothing)
        self._updates.put(lambda: voice.retarget(params=params, taps=taps, crossfade_samples=fade))
        return taps

    def set_source_position(self, x: float, y: float, smoothing="default") -> list[TapSet]:
        """Queue a source move; every mic revalidates and crossfades."""
        poses = [self.scene.pose_for(i, (x, y)) for i in range(self.n_mics)]
        taps = [tap_set(p, v.params) for p, v in zip(poses, self._voices)]
        for t in taps:
            self._check_reach(t)
        fade = self._crossfade_samples(smoothing)

        def apply():
            self._source_position = (x, y)
            for voice, pose, tap in zip(self._voices, poses, taps):
                voice.retarget(pose=pose, taps=tap, crossfade_samples=fade)

        self._updates.put(apply)
        return taps

    def _check_reach(self, taps: TapSet) -> None:
        if taps.max_delay > self._ring.max_delay:
            raise ValueError(
                f"tap delay {taps.max_delay:.1f} samples exceeds the ring sized "
                f"for max_distance={self.max_distance} m"
            )

    # -- rendering (single owner thread) ------------------------------------

    def apply_pending_updates(self) -> bool:
        """Drain queued updates outside a block (e.g. while playback is
        paused). Must be called from the thread that owns rendering."""
        return self._apply_pending()

    def _apply_pending(self) -> bool:
        applied = False
        while True:
            try:
                fn = self._updates.get_nowait()
            except queue.Empty:
                break
            fn()
            applied = True
        if applied:
            self._snapshot += 1
        return applied

    def _apply_trajectory(self) -> None:
        if self._next_waypoint >= len(self._trajectory):
            return
        now = self._blocks_done * self.block_size / self.fs
        target = None
        while (self._next_waypoint < len(self._trajectory)
               and self._trajectory[self._next_waypoint].t <= now):
            target = self._trajectory[self._next_waypoint].position
            self._next_waypoint += 1
        if target is not None:
            self.set_source_position(target[0], target[1])
            self._apply_pending()

    def process_block(self, block: np.ndarray) -> np.ndarray:
        """Render one source block; returns an (n_mics, block_size) array."""
        block = np.asarray(block, dtype=np.float64)
        if block.shape != (self.block_size,):
            raise ValueError(
                f"expected a block of exactly {self.block_size} samples, got {block.shape}"
            )
        self._apply_trajectory()
        self._apply_pending()
        self._ring.write_block(block)
        out = np.empty((self.n_mics, self.block_size))
        for i, voice in enumerate(self._voices):
            out[i] = voice.process(self.block_size)
        self._blocks_done += 1
        return out

    def render(self, source: np.ndarray) -> np.ndarray:
        """Offline render of a finite source, tail flushed; (n_mics, n + tail)."""
        source = np.asarray(source, dtype=np.float64)
        if source.ndim != 1:
            raise ValueError("offline rendering expects a mono 1-D source")
        n = source.shape[0]
        bs = self.block_size
        n_blocks = (n + bs - 1) // bs
        padded = np.zeros(n_blocks * bs)
        padded[:n] = source

        chunks = [self.process_block(padded[k * bs:(k + 1) * bs]) for k in range(n_blocks)]
        tail = self.tail_samples
        tail_blocks = (tail + bs - 1) // bs
        zeros = np.zeros(bs)
        for _ in range(tail_blocks):
            chunks.append(self.process_block(zeros))
        out = np.concatenate(chunks, axis=1)
        return out[:, : n + tail]


def render_pose(source: np.ndarray, params: MicParams, pose: ScenePose,
                block_size: int = DEFAULT_BLOCK_SIZE,
                interpolation: str = "linear",
                max_distance: float | None = None) -> np.ndarray:
    """One-mic offline render at a fixed local pose; returns a 1-D array."""
    mic = MicSetup(params=params, position=(0.0, 0.0), orientation=0.0)
    src_xy = (pose.r * math.cos(pose.theta), pose.r * math.sin(pose.theta))
    scene = Scene(fs=params.fs, mics=[mic], source_position=src_xy)
    if max_distance is None:
        max_distance = max(pose.r * 1.5, 2.0)
    renderer = SceneRenderer(scene, block_size=block_size, interpolation=interpolation,
                             max_distance=max_distance)
    # pin the exact pose rather than the Cartesian round-trip of it
    renderer.voices[0].retarget(pose=pose)
    return renderer.render(source)[0]
