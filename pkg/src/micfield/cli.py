"""Command-line front end: rendering, analysis sweeps, and the service.

Every analysis command writes the delimited data (CSV, plus an SVG polar
plot for patterns) and a matplotlib PNG figure next to it. Angles on the
command line are degrees; configs and the library use radians.

Exit codes: 0 success, 2 configuration error, 3 geometry validity error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import socket
import sys
import time

import numpy as np

from . import __version__
from .analysis import (
    angle_grid,
    monochromatic_pattern,
    pink_noise,
    proximity_curve,
    subband_pattern,
)
from .audio_io import AudioBuffer, WavFormatError, read_wav, to_mono, write_wav
from .bands import third_octave_bands
from .config import ConfigError, load_scene_config
from .export import write_curve_csv, write_pattern_csv, write_pattern_svg
from .geometry import (
    DEFAULT_SPEED_OF_SOUND,
    MicParams,
    ValidityError,
)
from .render import SceneRenderer

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDITY = 3
EXIT_IO = 4


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidityError as exc:
        print(f"validity error: {exc}", file=sys.stderr)
        return EXIT_VALIDITY
    except WavFormatError as exc:
        print(f"audio error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="micfield",
        description="virtual microphone sound-field simulator",
    )
    parser.add_argument("--version", action="version", version=f"micfield {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render a scene config to a multichannel WAV")
    p.add_argument("--config", required=True, help="scene YAML file")
    p.add_argument("--out", required=True, help="output WAV path")
    p.add_argument("--bit-depth", type=int, default=16, choices=(16, 24, 32))
    p.add_argument("--report", help="write the run report as JSON here too")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("pattern", help="monochromatic directivity pattern sweep")
    _mic_flags(p)
    p.add_argument("--f", type=float, action="append",
                   help="frequency in Hz (repeatable; default 1000)")
    p.add_argument("--r", type=float, default=1.0, help="source distance in m")
    p.add_argument("--angles", type=int, default=72, help="angle count on the circle")
    p.add_argument("--integrator", choices=("lossy", "ideal"), default="lossy")
    p.add_argument("--out-prefix", default="pattern", help="basename for csv/svg/png")
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("proximity", help="low-frequency proximity boost vs distance")
    _mic_flags(p)
    p.add_argument("--theta", type=float, default=0.0, help="incidence in degrees")
    p.add_argument("--f-low", type=float, default=50.0)
    p.add_argument("--f-ref", type=float, default=1000.0)
    p.add_argument("--r-min", type=float, default=0.05)
    p.add_argument("--r-max", type=float, default=2.0)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--integrator", choices=("lossy", "ideal"), default="lossy")
    p.add_argument("--out-prefix", default="proximity")
    p.set_defaults(func=cmd_proximity)

    p = sub.add_parser("subband", help="third-octave subband directivity diagram")
    _mic_flags(p)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--angles", type=int, default=72)
    p.add_argument("--stimulus", help="mono WAV stimulus (default: pink noise)")
    p.add_argument("--pink-seconds", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", default="subband")
    p.set_defaults(func=cmd_subband)

    p = sub.add_parser("serve", help="run the interactive HTTP/WebSocket service")
    p.add_argument("--config", help="scene YAML used as the default session scene")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8733)
    p.set_defaults(func=cmd_serve)
    return parser


def _mic_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=float, required=True, help="directivity coefficient [0,1]")
    p.add_argument("--d", type=float, default=0.02, help="capsule spacing in m")
    p.add_argument("--g", type=float, default=0.9, help="integrator loss [0,1)")
    p.add_argument("--fs", type=float, default=44100.0)
    p.add_argument("--c0", type=float, default=DEFAULT_SPEED_OF_SOUND)


def _params(args) -> MicParams:
    try:
        return MicParams(m=args.m, d=args.d, g=args.g, c0=args.c0, fs=args.fs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_render(args) -> int:
    cfg = load_scene_config(args.config)
    source = to_mono(read_wav(cfg.resolve_source()))
    scene = cfg.build_scene(fs=float(source.fs))
    renderer = SceneRenderer(
        scene,
        block_size=cfg.engine.block_size,
        interpolation=cfg.engine.interpolation,
        max_distance=cfg.engine.max_distance,
        crossfade_ms=cfg.engine.crossfade_ms,
    )
    t0 = time.perf_counter()
    out = renderer.render(source.samples[0])
    elapsed = time.perf_counter() - t0
    clipped = write_wav(AudioBuffer(fs=source.fs, samples=out), args.out,
                        bit_depth=args.bit_depth)
    report = {
        "output": str(args.out),
        "channels": renderer.n_mics,
        "samples": int(out.shape[1]),
        "render_seconds": round(elapsed, 4),
        "realtime_factor": round(out.shape[1] / source.fs / elapsed, 1),
        "clipped_samples": clipped,
        "mics": [
            {
                "label": scene.mics[i].label,
                "taps": renderer.derived_state(i),
            }
            for i in range(renderer.n_mics)
        ],
    }
    print(json.dumps(report, indent=2))
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
    return EXIT_OK


def cmd_pattern(args) -> int:
    from . import plots

    params = _params(args)
    freqs = args.f or [1000.0]
    angles = angle_grid(args.angles)
    tables = [
        monochromatic_pattern(params, f, args.r, angles=angles, integrator=args.integrator)
        for f in sorted(freqs)
    ]
    table = tables[0]
    if len(tables) > 1:
        from .analysis import PatternTable

        table = PatternTable(
            angles=angles,
            freqs=np.array(sorted(freqs)),
            distances=table.distances,
            magnitude=np.concatenate([t.magnitude for t in tables], axis=1),
            integrator=args.integrator,
            params=table.params,
        )
    write_pattern_csv(table, f"{args.out_prefix}.csv")
    write_pattern_svg(table, f"{args.out_prefix}.svg",
                      title=f"m={args.m} r={args.r} m ({args.integrator})")
    plots.save_pattern_figure(table, f"{args.out_prefix}.png")
    print(f"wrote {args.out_prefix}.csv, {args.out_prefix}.svg, {args.out_prefix}.png")
    return EXIT_OK


def cmd_proximity(args) -> int:
    from . import plots

    params = _params(args)
    if args.points < 2:
        raise ConfigError("--points: need at least 2")
    rs = np.logspace(math.log10(args.r_min), math.log10(args.r_max), args.points)
    boost = proximity_curve(params, math.radians(args.theta),
                            args.f_low, args.f_ref, rs, integrator=args.integrator)
    meta = {
        "m": args.m, "d": args.d, "g": args.g, "theta_deg": args.theta,
        "f_low": args.f_low, "f_ref": args.f_ref, "integrator": args.integrator,
    }
    write_curve_csv(rs, boost, f"{args.out_prefix}.csv", "distance_m", "boost_db", meta)
    plots.save_proximity_figure(
        rs, boost, f"{args.out_prefix}.png",
        title=f"bass boost {args.f_low:g} Hz vs {args.f_ref:g} Hz, m={args.m}",
    )
    print(f"wrote {args.out_prefix}.csv, {args.out_prefix}.png")
    return EXIT_OK


def cmd_subband(args) -> int:
    from . import plots

    params = _params(args)
    bands = third_octave_bands(params.fs)
    if args.stimulus:
        buf = to_mono(read_wav(args.stimulus))
        if buf.fs != params.fs:
            raise ConfigError(
                f"--stimulus: file is {buf.fs} Hz but --fs is {params.fs:g}; "
                "resample externally"
            )
        stimulus = buf.samples[0]
    else:
        stimulus = pink_noise(int(args.pink_seconds * params.fs), seed=args.seed)
    table = subband_pattern(stimulus, params, args.r, bands,
                            angles=angle_grid(args.angles))
    write_pattern_csv(table, f"{args.out_prefix}.csv")
    write_pattern_svg(table, f"{args.out_prefix}.svg",
                      title=f"subband directivity, m={args.m}, r={args.r} m")
    plots.save_pattern_figure(table, f"{args.out_prefix}.png")
    print(f"wrote {args.out_prefix}.csv, {args.out_prefix}.svg, {args.out_prefix}.png")
    return EXIT_OK


def cmd_serve(args) -> int:
    # config problems must surface before we ever touch the port
    default_config = load_scene_config(args.config) if args.config else None

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, args.port))
    except OSError as exc:
        print(f"i/o error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_IO
    finally:
        probe.close()

    from .service import create_app

    app = create_app(default_config=default_config)
    print(f"micfield service listening on http://{args.host}:{args.port}")

    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
