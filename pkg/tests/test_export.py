import numpy as np
import pytest

from micfield.analysis import (
    EnergyBalance,
    PatternTable,
    angle_grid,
    energy_balance,
    monochromatic_pattern,
    pink_noise,
    proximity_curve,
)
from micfield.bands import third_octave_bands
from micfield.export import (
    read_pattern_csv,
    read_pattern_svg_paths,
    write_curve_csv,
    write_energy_csv,
    write_pattern_csv,
    write_pattern_svg,
)
from micfield.geometry import MicParams
from micfield import plots

FS = 44100.0
CARDIOID = MicParams(m=0.5, d=0.02)


def cardioid_table(f=500.0, r=10.0, n=72):
    return monochromatic_pattern(CARDIOID, f, r, angles=angle_grid(n), integrator="ideal")


class TestPatternCsv:
    def test_round_trip_is_exact(self, tmp_path):
        table = cardioid_table()
        path = tmp_path / "pattern.csv"
        write_pattern_csv(table, path)
        back = read_pattern_csv(path)
        assert np.array_equal(back.magnitude, table.magnitude)
        assert np.allclose(back.angles, table.angles, rtol=0, atol=1e-12)
        assert np.array_equal(back.freqs, table.freqs)
        assert back.integrator == "ideal"
        assert back.params["m"] == 0.5
        assert back.distances[0] == 10.0

    def test_header_metadata_lines(self, tmp_path):
        path = tmp_path / "pattern.csv"
        write_pattern_csv(cardioid_table(), path)
        text = path.read_text()
        for key in ("# m=", "# d=", "# r=", "# fs=", "# c0=", "# g=", "# integrator="):
            assert key in text
        assert "angle_deg,freq_hz,magnitude" in text

    def test_empty_grid_never_writes_a_file(self, tmp_path):
        table = cardioid_table()
        empty = PatternTable(
            angles=np.zeros(0), freqs=table.freqs, distances=table.distances,
            magnitude=np.zeros((0, 1, 1)), integrator="ideal", params=table.params,
        )
        path = tmp_path / "empty.csv"
        with pytest.raises(ValueError):
            write_pattern_csv(empty, path)
        assert not path.exists()


class TestPatternSvg:
    def test_one_path_per_frequency(self, tmp_path):
        t1 = monochromatic_pattern(CARDIOID, 500.0, 1.0)
        t2 = monochromatic_pattern(CARDIOID, 4000.0, 1.0)
        table = PatternTable(
            angles=t1.angles, freqs=np.array([500.0, 4000.0]), distances=t1.distances,
            magnitude=np.concatenate([t1.magnitude, t2.magnitude], axis=1),
            integrator="lossy", params=t1.params,
        )
        path = tmp_path / "two.svg"
        write_pattern_svg(table, path)
        assert len(read_pattern_svg_paths(path)) == 2

    def test_cardioid_geometry_survives(self, tmp_path):
        path = tmp_path / "cardioid.svg"
        write_pattern_svg(cardioid_table(), path, title="cardioid")
        traces = read_pattern_svg_paths(path)
        assert len(traces) == 1
        pts = traces[0].points
        assert pts.shape[0] == 72
        center = np.array([320.0, 320.0])
        radii = np.linalg.norm(pts - center, axis=1)
        # closed polar curve with its null pointing left (theta = pi)
        null_idx = int(np.argmin(radii))
        assert radii[null_idx] < 0.02 * radii.max()
        assert abs(null_idx - 36) <= 1  # 36 * 5 degrees = 180
        front = pts[0]  # theta = 0 points right on the x axis
        assert front[0] > center[0]
        assert abs(front[1] - center[1]) < 1.0
        assert 'd="M' in path.read_text()
        assert "Z" in path.read_text()

    def test_empty_grid_rejected(self, tmp_path):
        table = cardioid_table()
        empty = PatternTable(
            angles=np.zeros(0), freqs=table.freqs, distances=table.distances,
            magnitude=np.zeros((0, 1, 1)), integrator="ideal", params=table.params,
        )
        with pytest.raises(ValueError):
            write_pattern_svg(empty, tmp_path / "no.svg")


class TestCurveAndEnergyCsv:
    def test_curve_csv(self, tmp_path):
        rs = np.array([0.05, 0.1, 0.5, 2.0])
        boost = proximity_curve(CARDIOID, 0.0, 50.0, 1000.0, rs)
        path = tmp_path / "prox.csv"
        write_curve_csv(rs, boost, path, "distance_m", "boost_db", meta={"m": 0.5})
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "# m=0.5"
        assert lines[1] == "distance_m,boost_db"
        assert len(lines) == 6

    def test_energy_csv(self, tmp_path):
        bands = third_octave_bands(FS)
        bal = energy_balance(pink_noise(int(0.5 * FS), seed=2), FS, bands, frame_ms=50.0)
        path = tmp_path / "energy.csv"
        write_energy_csv(bal, path)
        lines = path.read_text().strip().splitlines()
        assert lines[1].startswith("frame,band_31.5,")
        assert len(lines) == 2 + bal.n_frames

    def test_empty_energy_rejected(self, tmp_path):
        bands = third_octave_bands(FS)
        empty = EnergyBalance(frame_duration=0.05, bands=bands,
                              energies=np.zeros((0, bands.n_bands)))
        with pytest.raises(ValueError):
            write_energy_csv(empty, tmp_path / "no.csv")

    def test_mismatched_columns_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_curve_csv([1.0, 2.0], [1.0], tmp_path / "bad.csv", "x", "y")


class TestFigures:
    def test_pattern_figure(self, tmp_path):
        path = tmp_path / "pattern.png"
        plots.save_pattern_figure(cardioid_table(), path)
        assert path.stat().st_size > 5000

    def test_proximity_figure(self, tmp_path):
        rs = np.array([0.05, 0.1, 0.5, 2.0])
        boost = proximity_curve(CARDIOID, 0.0, 50.0, 1000.0, rs)
        path = tmp_path / "prox.png"
        plots.save_proximity_figure(rs, boost, path, title="proximity")
        assert path.stat().st_size > 5000

    def test_energy_figure(self, tmp_path):
        bands = third_octave_bands(FS)
        bal = energy_balance(pink_noise(int(0.5 * FS), seed=2), FS, bands, frame_ms=50.0)
        path = tmp_path / "energy.png"
        plots.save_energy_figure(bal, path)
        assert path.stat().st_size > 5000

    def test_deviation_figure(self, tmp_path):
        from micfield.analysis import limit_case_deviation

        freqs = [100.0, 1000.0]
        rs = [0.5, 5.0]
        dev = limit_case_deviation(CARDIOID, freqs, rs, angles=angle_grid(12))
        path = tmp_path / "dev.png"
        plots.save_deviation_figure(freqs, rs, dev, path)
        assert path.stat().st_size > 5000
