import textwrap

import pytest

from micfield.config import ConfigError, load_scene_config
from micfield.geometry import ValidityError

GOOD = """
schema: 1
source:
  file: in.wav
  position: [1.0, 0.0]
  trajectory:
    - {t: 0.0, position: [1.0, 0.0]}
    - {t: 1.5, position: [0.5, 0.5]}
engine:
  block_size: 128
  interpolation: lagrange
  crossfade_ms: 30.0
  c0: 340.0
  max_distance: 20.0
mics:
  - label: card
    position: [0.0, 0.0]
    orientation: 0.0
    m: 0.5
    d: 0.02
    g: 0.9
  - label: omni
    position: [0.0, 0.3]
    orientation: 1.5707963
    m: 1.0
    d: 0.02
"""


def write_config(tmp_path, text, name="scene.yaml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return path


class TestGoodConfig:
    def test_full_parse(self, tmp_path):
        cfg = load_scene_config(write_config(tmp_path, GOOD))
        assert cfg.source_file == "in.wav"
        assert cfg.source_position == (1.0, 0.0)
        assert len(cfg.trajectory) == 2
        assert cfg.engine.block_size == 128
        assert cfg.engine.interpolation == "lagrange"
        assert cfg.engine.c0 == 340.0
        assert len(cfg.mics) == 2
        assert cfg.mics[1]["g"] == 0.9  # default fills in

    def test_resolves_source_relative_to_config(self, tmp_path):
        cfg = load_scene_config(write_config(tmp_path, GOOD))
        assert cfg.resolve_source() == tmp_path / "in.wav"

    def test_builds_scene(self, tmp_path):
        cfg = load_scene_config(write_config(tmp_path, GOOD))
        scene = cfg.build_scene(fs=44100.0)
        assert scene.fs == 44100.0
        assert scene.mics[0].params.c0 == 340.0
        assert scene.mics[1].label == "omni"

    def test_defaults_are_minimal(self, tmp_path):
        cfg = load_scene_config(write_config(tmp_path, """
            schema: 1
            mics:
              - {m: 1.0, d: 0.02}
        """))
        assert cfg.engine.block_size == 256
        assert cfg.engine.interpolation == "linear"
        assert cfg.mics[0]["label"] == "mic0"


class TestConfigErrors:
    @pytest.mark.parametrize("text,needle", [
        ("mics:\n  - {m: 1.0, d: 0.02}\n", "schema"),
        ("schema: 2\nmics:\n  - {m: 1.0, d: 0.02}\n", "schema"),
        ("schema: 1\n", "mics"),
        ("schema: 1\nmics:\n  - {d: 0.02}\n", r"mics\[0\].m"),
        ("schema: 1\nmics:\n  - {m: 2.0, d: 0.02}\n", r"mics\[0\].m"),
        ("schema: 1\nmics:\n  - {m: 1.0, d: -0.5}\n", r"mics\[0\].d"),
        ("schema: 1\nmics:\n  - {m: 1.0, d: 0.02, g: 1.0}\n", r"mics\[0\].g"),
        ("schema: 1\nmics:\n  - {m: 1.0, d: 0.02, position: [1]}\n", r"mics\[0\].position"),
        ("schema: 1\nengine: {block_size: 3}\nmics:\n  - {m: 1, d: 0.02}\n", "block_size"),
        ("schema: 1\nengine: {interpolation: cubic}\nmics:\n  - {m: 1, d: 0.02}\n",
         "interpolation"),
        ("schema: 1\nsource: {trajectory: [{t: -1.0, position: [1, 0]}]}\n"
         "mics:\n  - {m: 1, d: 0.02}\n", r"trajectory\[0\].t"),
        ("schema: 1\nsource: {trajectory: [{t: 2.0, position: [1, 0]},"
         " {t: 1.0, position: [2, 0]}]}\nmics:\n  - {m: 1, d: 0.02}\n", "trajectory"),
    ])
    def test_field_errors_name_the_field(self, tmp_path, text, needle):
        with pytest.raises(ConfigError, match=needle):
            load_scene_config(write_config(tmp_path, text))

    def test_invalid_yaml(self, tmp_path):
        with pytest.raises(ConfigError, match="YAML"):
            load_scene_config(write_config(tmp_path, "mics: [unclosed\n"))

    def test_fs_mismatch(self, tmp_path):
        cfg = load_scene_config(write_config(tmp_path, """
            schema: 1
            engine: {fs: 48000}
            mics:
              - {m: 1.0, d: 0.02}
        """))
        with pytest.raises(ConfigError, match="engine.fs"):
            cfg.build_scene(fs=44100.0)

    def test_initial_pose_validity_names_the_mic(self, tmp_path):
        cfg = load_scene_config(write_config(tmp_path, """
            schema: 1
            source: {position: [0.005, 0.0]}
            mics:
              - {label: tight, m: 0.5, d: 0.02}
        """))
        with pytest.raises(ValidityError, match="tight"):
            cfg.build_scene(fs=44100.0)

    def test_missing_source_file(self, tmp_path):
        cfg = load_scene_config(write_config(tmp_path, """
            schema: 1
            mics:
              - {m: 1.0, d: 0.02}
        """))
        with pytest.raises(ConfigError, match="source.file"):
            cfg.resolve_source()
