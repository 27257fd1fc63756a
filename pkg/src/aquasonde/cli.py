"""aquasonde command line.

Subcommands wire the pieces together: `simulate` plays a scenario as a
device byte stream, `serve` runs the ingestion service, `calibrate`
fits and stores an electrode calibration, `capture` runs a dwell
session against a live or recorded stream, and `report` renders the
per-location table and chart.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
No command ever prompts.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .calibration import (
    BufferPoint,
    DegenerateCalibration,
    ElectrodeFault,
    load_calibration,
    save_calibration,
    two_point_calibrate,
)
from .capture import load_session_config, run_session
from .report import generate_report
from .samples import SEASONS, EmptyInput
from .scenario import ScenarioInvalid, load_scenario, with_overrides
from .service import open_service
from .simulator import serve_stream, simulate
from .store import LogCorrupt

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _fail(message: str, code: int) -> int:
    print(f"aquasonde: {message}", file=sys.stderr)
    return code


def _parse_listen(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"listen address must be host:port, got {value!r}")
    return host, int(port)


def cmd_simulate(args: argparse.Namespace) -> int:
    path = Path(args.scenario)
    if not path.is_file():
        return _fail(f"scenario file not found: {path}", EXIT_USAGE)
    try:
        script = with_overrides(load_scenario(path), args.seed, args.time_scale)
    except (ScenarioInvalid, ValueError) as exc:
        return _fail(f"invalid scenario {path}: {exc}", EXIT_USAGE)
    if args.out:
        data = simulate(script)
        Path(args.out).write_bytes(data)
        print(f"wrote {len(data) // 11} frames ({len(data)} bytes) to {args.out}")
        return EXIT_OK
    host, port = _parse_listen(args.listen)
    sent = serve_stream(
        script,
        host,
        port,
        on_listening=lambda h, p: print(f"serving device stream on {h}:{p}", flush=True),
    )
    print(f"stream complete: {sent} frames sent")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    host, port = _parse_listen(args.listen)
    token = args.token or os.environ.get("AQUASONDE_TOKEN") or None
    try:
        service = open_service(
            args.log,
            host=host,
            port=port,
            default_season=args.season,
            token=token,
            static_dir=args.static,
        )
    except LogCorrupt as exc:
        return _fail(f"refusing to start on a corrupt log: {exc}", EXIT_RUNTIME)
    if service.store.recovery_warning:
        print(f"warning: {service.store.recovery_warning}", file=sys.stderr)
    print(f"listening on {service.url}  (log: {args.log})", flush=True)
    try:
        service.serve_forever()
    except KeyboardInterrupt:
        service.shutdown()
    return EXIT_OK


def cmd_calibrate(args: argparse.Namespace) -> int:
    points = []
    for spec_text in args.buffer:
        try:
            ph_text, _, mv_text = spec_text.partition(":")
            points.append(BufferPoint(ph=float(ph_text), measured_mv=float(mv_text)))
        except ValueError:
            return _fail(f"--buffer must be <ph>:<mv>, got {spec_text!r}", EXIT_USAGE)
    if len(points) != 2:
        return _fail("exactly two --buffer points are required", EXIT_USAGE)
    try:
        cal = two_point_calibrate(points[0], points[1], args.temp)
    except (DegenerateCalibration, ElectrodeFault, ValueError) as exc:
        return _fail(f"{type(exc).__name__}: {exc}", EXIT_USAGE)
    save_calibration(args.out, cal)
    print(
        f"calibration written to {args.out}: offset {cal.offset_mv:.2f} mV, "
        f"slope {cal.slope_mv_per_ph:.2f} mV/pH at {cal.ref_temp_c:.1f} C"
    )
    return EXIT_OK


def cmd_capture(args: argparse.Namespace) -> int:
    path = Path(args.config)
    if not path.is_file():
        return _fail(f"config file not found: {path}", EXIT_USAGE)
    try:
        config = load_session_config(path)
    except ValueError as exc:
        return _fail(f"invalid capture config {path}: {exc}", EXIT_USAGE)
    try:
        cal = load_calibration(config.calibration_path)
    except (OSError, ValueError) as exc:
        return _fail(f"cannot load calibration {config.calibration_path}: {exc}", EXIT_USAGE)
    try:
        outcome = run_session(config, cal)
    except (OSError, ValueError) as exc:
        return _fail(f"capture failed: {exc}", EXIT_RUNTIME)
    print()
    print(f"captured {len(outcome.readings)} reading(s) -> {config.csv_out}")
    for label, reason in outcome.skipped:
        print(f"  skipped {label}: {reason}")
    if outcome.stats.lost_frames or outcome.stats.frame_errors:
        print(
            f"  link: {outcome.stats.frames} frames, "
            f"{outcome.stats.lost_frames} lost (seq gaps), "
            f"{len(outcome.stats.frame_errors)} stream errors"
        )
    if config.service_url and outcome.upload_warning is None:
        print(f"  uploaded {outcome.uploaded} reading(s) to {config.service_url}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    source = args.source
    if not source.startswith(("http://", "https://")) and not Path(source).is_file():
        return _fail(f"source not found: {source}", EXIT_USAGE)
    try:
        table_path, svg_path, table = generate_report(source, args.out, args.season)
    except EmptyInput as exc:
        return _fail(f"nothing to report: {exc}", EXIT_RUNTIME)
    except ValueError as exc:
        return _fail(f"cannot read source {source}: {exc}", EXIT_RUNTIME)
    print(table, end="")
    print(f"table -> {table_path}")
    print(f"chart -> {svg_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aquasonde",
        description="Portable water-quality survey tooling: device simulator, "
        "ingestion service, calibration, dwell capture, and reporting.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="play a scenario as a device byte stream")
    p.add_argument("--scenario", required=True, help="scenario file path")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--listen", help="serve one TCP client at host:port")
    target.add_argument("--out", help="write the stream to a file for replay")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument(
        "--time-scale", type=float, default=None, help="override the scenario time scale"
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the ingestion service")
    p.add_argument("--listen", default="127.0.0.1:8899", help="host:port (default %(default)s)")
    p.add_argument("--log", required=True, help="append-only reading log path")
    p.add_argument("--season", default="summer", choices=SEASONS, help="default season")
    p.add_argument(
        "--token",
        default=None,
        help="bearer token required on POST (default: AQUASONDE_TOKEN env, else open)",
    )
    p.add_argument("--static", default=None, help="directory of console files to serve at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("calibrate", help="two-point electrode calibration")
    p.add_argument(
        "--buffer",
        action="append",
        required=True,
        metavar="PH:MV",
        help="buffer point as <ph>:<mv>; give exactly twice",
    )
    p.add_argument("--temp", type=float, required=True, help="calibration temperature, C")
    p.add_argument("--out", required=True, help="calibration file to write")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("capture", help="run a dwell-capture session")
    p.add_argument("--config", required=True, help="capture config file")
    p.set_defaults(func=cmd_capture)

    p = sub.add_parser("report", help="per-location table and SVG chart")
    p.add_argument(
        "--from", dest="source", required=True, help="service URL or provenance CSV path"
    )
    p.add_argument("--out", required=True, help="output base path (writes .txt and .svg)")
    p.add_argument("--season", default="summer", choices=SEASONS)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except BrokenPipeError:
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
