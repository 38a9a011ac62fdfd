"""Scene configuration files.

A scene is one YAML document (schema=1): a mono source, engine options, and
a list of microphones. All physical quantities are SI (meters, radians,
seconds, Hz). Example:

    schema: 1
    source:
      file: voice.wav
      position: [1.0, 0.0]
      trajectory:
        - {t: 0.0, position: [1.0, 0.0]}
        - {t: 2.5, position: [0.2, 0.5]}
    engine:
      block_size: 256
      interpolation: linear   # or lagrange
      crossfade_ms: 20.0
      c0: 343.0
      max_distance: 50.0
      fs: 44100               # optional; must match the source file
    mics:
      - label: card_left
        position: [0.0, 0.0]
        orientation: 0.0
        m: 0.5
        d: 0.02
        g: 0.9
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .filters import INTERPOLATION_MODES
from .geometry import (
    DEFAULT_SPEED_OF_SOUND,
    MicParams,
    ValidityError,
    tap_set,
)
from .render import (
    DEFAULT_BLOCK_SIZE,
    DEFAULT_CROSSFADE_MS,
    DEFAULT_MAX_DISTANCE,
    MicSetup,
    Scene,
    TrajectoryPoint,
)

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Unusable scene configuration; message names the offending field."""


@dataclass
class EngineOptions:
    block_size: int = DEFAULT_BLOCK_SIZE
    interpolation: str = "linear"
    crossfade_ms: float = DEFAULT_CROSSFADE_MS
    c0: float = DEFAULT_SPEED_OF_SOUND
    max_distance: float = DEFAULT_MAX_DISTANCE
    fs: float | None = None


@dataclass
class SceneConfig:
    """Parsed scene file, not yet bound to audio."""

    source_file: str | None
    source_position: tuple[float, float]
    trajectory: list[TrajectoryPoint]
    mics: list[dict]
    engine: EngineOptions
    base_dir: Path = field(default_factory=Path)

    def resolve_source(self) -> Path:
        if not self.source_file:
            raise ConfigError("source.file: no source file configured")
        p = Path(self.source_file)
        return p if p.is_absolute() else self.base_dir / p

    def build_scene(self, fs: float) -> Scene:
        """Bind the config to a sample rate, validating every pairing."""
        if self.engine.fs is not None and self.engine.fs != fs:
            raise ConfigError(
                f"engine.fs: configured {self.engine.fs} Hz but the source is {fs} Hz"
            )
        mics = []
        for i, entry in enumerate(self.mics):
            try:
                params = MicParams(
                    m=entry["m"], d=entry["d"], g=entry["g"],
                    c0=self.engine.c0, fs=fs,
                )
            except ValueError as exc:
                raise ConfigError(f"mics[{i}]: {exc}") from exc
            mics.append(MicSetup(
                params=params,
                position=entry["position"],
                orientation=entry["orientation"],
                label=entry["label"],
            ))
        scene = Scene(
            fs=fs, mics=mics, source_position=self.source_position,
            trajectory=list(self.trajectory),
        )
        for i, mic in enumerate(mics):
            try:
                tap_set(scene.pose_for(i), mic.params)
            except ValidityError as exc:
                raise ValidityError(f"mic {mic.label!r} (mics[{i}]): {exc}") from exc
        return scene


def load_scene_config(path) -> SceneConfig:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return parse_scene_config(doc, base_dir=path.parent)


def parse_scene_config(doc: dict, base_dir: Path | None = None) -> SceneConfig:
    schema = doc.get("schema")
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"schema: expected {SCHEMA_VERSION}, got {schema!r}")

    source = doc.get("source", {})
    if not isinstance(source, dict):
        raise ConfigError("source: must be a mapping")
    source_file = source.get("file")
    position = _position(source.get("position", [1.0, 0.0]), "source.position")

    trajectory = []
    for k, wp in enumerate(source.get("trajectory") or []):
        if not isinstance(wp, dict) or "t" not in wp or "position" not in wp:
            raise ConfigError(f"source.trajectory[{k}]: needs t and position")
        t = _number(wp["t"], f"source.trajectory[{k}].t")
        if t < 0:
            raise ConfigError(f"source.trajectory[{k}].t: must be >= 0")
        trajectory.append(TrajectoryPoint(
            t=t, position=_position(wp["position"], f"source.trajectory[{k}].position"),
        ))
    if [p.t for p in trajectory] != sorted(p.t for p in trajectory):
        raise ConfigError("source.trajectory: timestamps must be non-decreasing")

    engine = _engine_options(doc.get("engine") or {})

    raw_mics = doc.get("mics")
    if not raw_mics or not isinstance(raw_mics, list):
        raise ConfigError("mics: need a non-empty list of microphones")
    mics = [_mic_entry(entry, i) for i, entry in enumerate(raw_mics)]

    return SceneConfig(
        source_file=source_file,
        source_position=position,
        trajectory=trajectory,
        mics=mics,
        engine=engine,
        base_dir=base_dir or Path(),
    )


def _engine_options(raw: dict) -> EngineOptions:
    if not isinstance(raw, dict):
        raise ConfigError("engine: must be a mapping")
    opts = EngineOptions()
    if "block_size" in raw:
        bs = raw["block_size"]
        if not isinstance(bs, int) or bs < 16:
            raise ConfigError(f"engine.block_size: need an integer >= 16, got {bs!r}")
        opts.block_size = bs
    if "interpolation" in raw:
        mode = raw["interpolation"]
        if mode not in INTERPOLATION_MODES:
            raise ConfigError(
                f"engine.interpolation: {mode!r} not in {INTERPOLATION_MODES}"
            )
        opts.interpolation = mode
    if "crossfade_ms" in raw:
        opts.crossfade_ms = _number(raw["crossfade_ms"], "engine.crossfade_ms")
        if opts.crossfade_ms < 0:
            raise ConfigError("engine.crossfade_ms: must be >= 0")
    if "c0" in raw:
        opts.c0 = _number(raw["c0"], "engine.c0")
        if opts.c0 <= 0:
            raise ConfigError("engine.c0: must be > 0")
    if "max_distance" in raw:
        opts.max_distance = _number(raw["max_distance"], "engine.max_distance")
        if opts.max_distance <= 0:
            raise ConfigError("engine.max_distance: must be > 0")
    if "fs" in raw:
        opts.fs = _number(raw["fs"], "engine.fs")
    return opts


def _mic_entry(entry, index: int) -> dict:
    where = f"mics[{index}]"
    if not isinstance(entry, dict):
        raise ConfigError(f"{where}: must be a mapping")
    for key in ("m", "d"):
        if key not in entry:
            raise ConfigError(f"{where}.{key}: required")
    out = {
        "label": str(entry.get("label", f"mic{index}")),
        "position": _position(entry.get("position", [0.0, 0.0]), f"{where}.position"),
        "orientation": _number(entry.get("orientation", 0.0), f"{where}.orientation"),
        "m": _number(entry["m"], f"{where}.m"),
        "d": _number(entry["d"], f"{where}.d"),
        "g": _number(entry.get("g", 0.9), f"{where}.g"),
    }
    if not 0.0 <= out["m"] <= 1.0:
        raise ConfigError(f"{where}.m: must be in [0, 1], got {out['m']}")
    if out["d"] <= 0.0:
        raise ConfigError(f"{where}.d: must be > 0, got {out['d']}")
    if not 0.0 <= out["g"] < 1.0:
        raise ConfigError(f"{where}.g: must be in [0, 1), got {out['g']}")
    return out


def _position(value, where: str) -> tuple[float, float]:
    if (not isinstance(value, (list, tuple))) or len(value) != 2:
        raise ConfigError(f"{where}: need [x, y] in meters")
    return (_number(value[0], f"{where}[0]"), _number(value[1], f"{where}[1]"))


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: need a number, got {value!r}")
    return float(value)
