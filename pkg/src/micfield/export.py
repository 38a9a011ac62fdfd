"""Delimited and vector-graphic exports of analysis results.

CSV schema: comment header lines `# key=value` carrying the parameter
snapshot (m, d, r, fs, c0, g, integrator), a column header, then
`angle_deg,freq_hz,magnitude` rows. Values are written with full float
precision so a round-trip reproduces the table exactly.

SVG polar plots are standalone documents with one `<path>` per frequency
or band, vertices at center + scale * magnitude * (cos theta, -sin theta),
which keeps the geometry checkable by reading the path back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import EnergyBalance, PatternTable

_HEADER_KEYS = ("m", "d", "r", "fs", "c0", "g", "integrator")

SVG_SIZE = 640
SVG_MARGIN = 60
_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
)


def write_pattern_csv(table: PatternTable, path) -> None:
    """One CSV per distance: header metadata then angle/freq/magnitude rows."""
    if table.angles.size == 0:
        raise ValueError("refusing to export an empty angle grid")
    if table.distances.size != 1:
        raise ValueError("pattern CSV holds a single distance per file")
    meta = dict(table.params)
    meta["r"] = float(table.distances[0])
    meta["integrator"] = table.integrator
    lines = [f"# {k}={_fmt(meta[k])}" for k in _HEADER_KEYS]
    lines.append("angle_deg,freq_hz,magnitude")
    for j, f in enumerate(table.freqs):
        for i, a in enumerate(table.angles):
            lines.append(
                f"{_fmt(math.degrees(a))},{_fmt(f)},{_fmt(table.magnitude[i, j, 0])}"
            )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_pattern_csv(path) -> PatternTable:
    """Rebuild a PatternTable written by write_pattern_csv."""
    meta: dict = {}
    rows: list[tuple[float, float, float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = value.strip()
            elif line[0].isdigit() or line[0] in "+-.":
                a, f, m = line.split(",")
                rows.append((float(a), float(f), float(m)))
    if not rows:
        raise ValueError(f"no data rows in {path}")
    angles_deg = sorted({r[0] for r in rows})
    freqs = sorted({r[1] for r in rows})
    a_idx = {a: i for i, a in enumerate(angles_deg)}
    f_idx = {f: j for j, f in enumerate(freqs)}
    mag = np.zeros((len(angles_deg), len(freqs), 1))
    for a, f, m in rows:
        mag[a_idx[a], f_idx[f], 0] = m
    params = {k: float(meta[k]) for k in ("m", "d", "g", "c0", "fs") if k in meta}
    return PatternTable(
        angles=np.radians(angles_deg), freqs=np.array(freqs),
        distances=np.array([float(meta.get("r", "nan"))]),
        magnitude=mag, integrator=meta.get("integrator", "lossy"), params=params,
    )


def write_curve_csv(x, y, path, x_name: str, y_name: str, meta: dict | None = None) -> None:
    """Generic two-column CSV with `# key=value` header lines."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if x.size == 0 or x.size != y.size:
        raise ValueError("curve export needs matching non-empty columns")
    lines = [f"# {k}={_fmt(v)}" for k, v in (meta or {}).items()]
    lines.append(f"{x_name},{y_name}")
    lines.extend(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(x, y))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_energy_csv(balance: EnergyBalance, path) -> None:
    """Frame-by-frame band energies, one row per frame."""
    if balance.n_frames == 0:
        raise ValueError("refusing to export an empty energy balance")
    cols = ",".join(f"band_{label}" for label in balance.bands.labels)
    lines = [f"# frame_duration_s={_fmt(balance.frame_duration)}",
             f"frame,{cols}"]
    for k in range(balance.n_frames):
        row = ",".join(_fmt(v) for v in balance.energies[k])
        lines.append(f"{k},{row}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass
class PolarPath:
    """One decoded SVG polar trace (scene coordinates, y down)."""

    label: str
    points: np.ndarray  # shape (n, 2)


def write_pattern_svg(table: PatternTable, path, title: str | None = None) -> None:
    """Standalone polar plot, one closed path per frequency/band."""
    if table.angles.size == 0:
        raise ValueError("refusing to export an empty angle grid")
    if table.distances.size != 1:
        raise ValueError("pattern SVG holds a single distance per file")
    cx = cy = SVG_SIZE / 2.0
    radius = SVG_SIZE / 2.0 - SVG_MARGIN
    rmax = float(np.max(table.magnitude))
    if rmax <= 0.0:
        rmax = 1.0
    scale = radius / rmax

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" '
        f'height="{SVG_SIZE}" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
        f'<rect width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{cx:.1f}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>'
        )
    for frac in (0.25, 0.5, 0.75, 1.0):
        rr = radius * frac
        parts.append(
            f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="{rr:.1f}" fill="none" '
            'stroke="#cccccc" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{cx + rr + 3:.1f}" y="{cy - 3:.1f}" font-family="sans-serif" '
            f'font-size="10" fill="#888888">{rmax * frac:.3g}</text>'
        )
    parts.append(
        f'<line x1="{cx - radius:.1f}" y1="{cy:.1f}" x2="{cx + radius:.1f}" '
        f'y2="{cy:.1f}" stroke="#cccccc" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{cx:.1f}" y1="{cy - radius:.1f}" x2="{cx:.1f}" '
        f'y2="{cy + radius:.1f}" stroke="#cccccc" stroke-width="1"/>'
    )

    labels = table.freq_labels or tuple(f"{f:.5g} Hz" for f in table.freqs)
    for j, label in enumerate(labels):
        mags = table.magnitude[:, j, 0]
        xs = cx + scale * mags * np.cos(table.angles)
        ys = cy - scale * mags * np.sin(table.angles)
        d = "M " + " L ".join(f"{x:.3f} {y:.3f}" for x, y in zip(xs, ys)) + " Z"
        color = _PALETTE[j % len(_PALETTE)]
        parts.append(
            f'<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5" '
            f'data-label="{label}"/>'
        )
        parts.append(
            f'<text x="{SVG_SIZE - SVG_MARGIN + 6}" y="{40 + 16 * j}" '
            f'font-family="sans-serif" font-size="11" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def read_pattern_svg_paths(path) -> list[PolarPath]:
    """Decode the data paths of a pattern SVG back into point lists."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    out: list[PolarPath] = []
    for chunk in text.split("<path ")[1:]:
        attrs = chunk.split(">", 1)[0]
        d = _attr(attrs, "d")
        label = _attr(attrs, "data-label")
        if d is None:
            continue
        nums = [float(tok) for tok in d.replace("M", " ").replace("L", " ")
                .replace("Z", " ").split()]
        pts = np.array(nums).reshape(-1, 2)
        out.append(PolarPath(label=label or "", points=pts))
    return out


def _attr(attrs: str, name: str) -> str | None:
    marker = f'{name}="'
    start = attrs.find(marker)
    if start < 0:
        return None
    start += len(marker)
    return attrs[start : attrs.index('"', start)]


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    return repr(float(value))
