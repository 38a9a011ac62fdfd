import json
import math
import socket
import textwrap

import numpy as np
import pytest

from micfield.audio_io import AudioBuffer, read_wav, write_wav
from micfield.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_VALIDITY, main
from micfield.export import read_pattern_csv

FS = 44100


def make_source(tmp_path, samples, name="src.wav"):
    path = tmp_path / name
    write_wav(AudioBuffer(fs=FS, samples=samples), path, bit_depth=32)
    return path


def write_scene(tmp_path, body, name="scene.yaml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(body))
    return path


class TestRenderCommand:
    def test_omni_unit_distance_is_delayed_identity(self, tmp_path, capsys):
        src = np.zeros(512)
        src[0] = 1.0
        source = make_source(tmp_path, src)
        scene = write_scene(tmp_path, f"""
            schema: 1
            source:
              file: {source.name}
              position: [1.0, 0.0]
            mics:
              - {{label: omni, m: 1.0, d: 0.02}}
        """)
        out = tmp_path / "out.wav"
        assert main(["render", "--config", str(scene), "--out", str(out),
                     "--bit-depth", "32"]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["channels"] == 1
        assert report["clipped_samples"] == 0
        rendered = read_wav(out).samples[0]
        delay = FS / 343.0
        frac = delay - math.floor(delay)
        assert rendered[128] == pytest.approx(1.0 - frac, rel=1e-6)
        assert rendered[129] == pytest.approx(frac, rel=1e-6)
        assert np.sum(np.abs(rendered)) == pytest.approx(1.0, rel=1e-6)

    def test_two_mics_follow_config_order(self, tmp_path, capsys):
        t = np.arange(2048)
        source = make_source(tmp_path, 0.1 * np.sin(2 * np.pi * 500.0 * t / FS))
        scene = write_scene(tmp_path, f"""
            schema: 1
            source:
              file: {source.name}
              position: [1.0, 0.0]
            mics:
              - {{label: far, position: [0.0, 0.0], m: 1.0, d: 0.02}}
              - {{label: near, position: [0.5, 0.0], m: 1.0, d: 0.02}}
        """)
        out = tmp_path / "two.wav"
        assert main(["render", "--config", str(scene), "--out", str(out),
                     "--bit-depth", "32"]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert [m["label"] for m in report["mics"]] == ["far", "near"]
        rendered = read_wav(out)
        assert rendered.channels == 2
        # channel 1 is the mic at 0.5 m: double the gain of channel 0
        rms = np.sqrt(np.mean(rendered.samples**2, axis=1))
        assert rms[1] / rms[0] == pytest.approx(2.0, rel=1e-2)

    def test_validity_violation_exits_3(self, tmp_path, capsys):
        source = make_source(tmp_path, np.zeros(64))
        scene = write_scene(tmp_path, f"""
            schema: 1
            source:
              file: {source.name}
              position: [0.005, 0.0]
            mics:
              - {{label: bad, m: 0.5, d: 0.02}}
        """)
        code = main(["render", "--config", str(scene), "--out", str(tmp_path / "x.wav")])
        assert code == EXIT_VALIDITY
        assert "d/2" in capsys.readouterr().err

    def test_bad_config_exits_2(self, tmp_path, capsys):
        scene = write_scene(tmp_path, "schema: 9\nmics: []\n")
        code = main(["render", "--config", str(scene), "--out", str(tmp_path / "x.wav")])
        assert code == EXIT_CONFIG

    def test_missing_source_exits_4(self, tmp_path):
        scene = write_scene(tmp_path, """
            schema: 1
            source: {file: nowhere.wav}
            mics:
              - {m: 1.0, d: 0.02}
        """)
        code = main(["render", "--config", str(scene), "--out", str(tmp_path / "x.wav")])
        assert code == EXIT_IO

    def test_report_file(self, tmp_path, capsys):
        source = make_source(tmp_path, np.zeros(256))
        scene = write_scene(tmp_path, f"""
            schema: 1
            source: {{file: {source.name}}}
            mics:
              - {{m: 1.0, d: 0.02}}
        """)
        report_path = tmp_path / "report.json"
        assert main(["render", "--config", str(scene), "--out", str(tmp_path / "o.wav"),
                     "--report", str(report_path)]) == EXIT_OK
        capsys.readouterr()
        report = json.loads(report_path.read_text())
        assert report["mics"][0]["taps"]["delays"][0] > 0


class TestPatternCommand:
    def test_omni_pattern_is_all_ones(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["pattern", "--m", "1.0"]) == EXIT_OK
        capsys.readouterr()
        table = read_pattern_csv(tmp_path / "pattern.csv")
        assert np.all(table.magnitude == 1.0)
        assert (tmp_path / "pattern.svg").exists()
        assert (tmp_path / "pattern.png").exists()

    def test_far_field_cardioid_matches_first_order_law(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["pattern", "--m", "0.5", "--f", "500", "--r", "10",
                     "--d", "0.02", "--integrator", "ideal",
                     "--out-prefix", "card"]) == EXIT_OK
        capsys.readouterr()
        table = read_pattern_csv(tmp_path / "card.csv")
        want = np.abs(0.5 + 0.5 * np.cos(table.angles))
        assert np.max(np.abs(table.magnitude[:, 0, 0] - want)) < 0.01

    def test_bad_m_exits_2(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        assert main(["pattern", "--m", "1.5"]) == EXIT_CONFIG


class TestProximityCommand:
    def test_monotone_boost_curve(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["proximity", "--m", "0.5", "--theta", "0",
                     "--points", "12", "--out-prefix", "prox"]) == EXIT_OK
        capsys.readouterr()
        rows = [line.split(",") for line in (tmp_path / "prox.csv").read_text()
                .strip().splitlines() if not line.startswith("#")][1:]
        boost = np.array([float(b) for _, b in rows])
        assert np.all(np.diff(boost) < 0.0)
        assert (tmp_path / "prox.png").exists()


class TestSubbandCommand:
    def test_writes_all_artifacts(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["subband", "--m", "0.5", "--r", "0.5", "--angles", "8",
                     "--pink-seconds", "0.5", "--out-prefix", "sb"]) == EXIT_OK
        capsys.readouterr()
        table = read_pattern_csv(tmp_path / "sb.csv")
        assert table.freqs.shape[0] == 28
        assert (tmp_path / "sb.svg").exists()
        assert (tmp_path / "sb.png").exists()


class TestServeCommand:
    def test_busy_port_exits_4(self, tmp_path, capsys):
        blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(1)
        port = blocker.getsockname()[1]
        try:
            code = main(["serve", "--port", str(port)])
        finally:
            blocker.close()
        assert code == EXIT_IO
        assert "bind" in capsys.readouterr().err

    def test_bad_config_exits_before_binding(self, tmp_path, capsys):
        bad = write_scene(tmp_path, "schema: 1\nmics: []\n")
        code = main(["serve", "--config", str(bad), "--port", "0"])
        assert code == EXIT_CONFIG
