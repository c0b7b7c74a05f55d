"""Command-line entry point.

Subcommands: replay (trace -> telemetry file), serve (live WebSocket
session service), bench (tick-loop self-benchmark), validate (check scene/
trace/calibration documents).

Exit codes: 0 success, 2 usage error (argparse), 3 input or I/O error,
4 safety violation.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .bench import run_bench
from .calibration import default_calibration, load_calibration
from .errors import PneusimError
from .pipeline import replay_ticks, summarize
from .scene import (
    bundled_scene_names,
    bundled_trace_names,
    load_bundled_scene,
    load_bundled_trace,
    load_scene,
    load_trace,
)
from .service import DEFAULT_PORT, PORT_ENV_VAR, ServiceConfig, serve
from .telemetry import write_telemetry

EXIT_OK = 0
EXIT_IO = 3
EXIT_SAFETY = 4


def _load_tables(ref: str | None):
    return load_calibration(ref) if ref else default_calibration()


def _load_scene_ref(ref: str):
    if ref in bundled_scene_names():
        return load_bundled_scene(ref)
    return load_scene(ref)


def _load_trace_ref(ref: str):
    if ref in bundled_trace_names():
        return load_bundled_trace(ref)
    return load_trace(ref)


def cmd_replay(args) -> int:
    try:
        tables = _load_tables(args.calib)
        scene = _load_scene_ref(args.scene)
        trace = _load_trace_ref(args.trace)
    except (PneusimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    results = []
    violation = None
    try:
        for r in replay_ticks(trace, scene, tables, args.tick_rate, stop_on_violation=False):
            results.append(r)
            if r.violation is not None:
                # keep the aborted all-exhaust tick in the log, then stop
                violation = r.violation
                break
    except PneusimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    records, summary = summarize(results)

    out_path = Path(args.out) if args.out else Path(f"{trace.name}.telemetry")
    tmp_path = out_path.with_suffix(out_path.suffix + ".tmp")
    try:
        tmp_path.write_text(write_telemetry(records, summary))
        tmp_path.replace(out_path)
    except OSError as exc:
        print(f"error: cannot write {out_path}: {exc}", file=sys.stderr)
        return EXIT_IO

    print(summary.to_line())
    print(f"telemetry written to {out_path}")
    if violation is not None:
        print(f"safety violation: {violation.describe()}", file=sys.stderr)
        return EXIT_SAFETY
    return EXIT_OK


def cmd_serve(args) -> int:
    try:
        tables = _load_tables(args.calib)
        if args.scene:
            scene = _load_scene_ref(args.scene)
            scenes = {scene.name: scene}
            default_scene = scene.name
        else:
            scenes = {name: load_bundled_scene(name) for name in bundled_scene_names()}
            default_scene = "frozen_meat"
    except (PneusimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    config = ServiceConfig(
        tables=tables,
        scenes=scenes,
        default_scene=default_scene,
        tick_rate_hz=args.tick_rate,
        decimation=args.decimation,
    )
    print(f"serving on ws://{args.host}:{args.port}/session (scenes: {sorted(scenes)})")
    serve(config, host=args.host, port=args.port)
    return EXIT_OK


def cmd_bench(args) -> int:
    tables = _load_tables(args.calib)
    report = run_bench(tables, ticks=args.ticks, tick_rate_hz=args.tick_rate)
    for line in report.lines():
        print(line)
    return EXIT_OK


def cmd_validate(args) -> int:
    checks = []
    if args.calib or args.check_default_calib:
        checks.append(("calibration", args.calib or "(bundled default)", lambda: _load_tables(args.calib)))
    if args.scene:
        checks.append(("scene", args.scene, lambda: _load_scene_ref(args.scene)))
    if args.trace:
        checks.append(("trace", args.trace, lambda: _load_trace_ref(args.trace)))
    if not checks:
        print("nothing to validate (pass --scene/--trace/--calib)", file=sys.stderr)
        return EXIT_IO
    status = EXIT_OK
    for label, ref, check in checks:
        try:
            check()
            print(f"{label} ok: {ref}")
        except (PneusimError, OSError) as exc:
            print(f"{label} invalid: {exc}", file=sys.stderr)
            status = EXIT_IO
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pneusim",
        description="Simulator for the multi-mode pneumatic fingertip actuator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("replay", help="replay a finger trace to a telemetry file")
    p.add_argument("--scene", required=True, help="bundled scene name or JSON path")
    p.add_argument("--trace", required=True, help="bundled trace name or trace path")
    p.add_argument("--calib", help="calibration file (default: bundled)")
    p.add_argument("--tick-rate", type=float, default=1000.0)
    p.add_argument("--out", help="telemetry output path (default: <trace>.telemetry)")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="run the live session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument(
        "--port",
        type=int,
        default=int(os.environ.get(PORT_ENV_VAR, DEFAULT_PORT)),
        help=f"listen port (default ${PORT_ENV_VAR} or {DEFAULT_PORT})",
    )
    p.add_argument("--scene", help="restrict to one scene (default: all bundled)")
    p.add_argument("--calib", help="calibration file (default: bundled)")
    p.add_argument("--tick-rate", type=float, default=1000.0)
    p.add_argument("--decimation", type=int, default=10, help="emit every Nth tick")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("bench", help="tick-loop self-benchmark")
    p.add_argument("--ticks", type=int, default=20000)
    p.add_argument("--tick-rate", type=float, default=1000.0)
    p.add_argument("--calib", help="calibration file (default: bundled)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", help="validate scene/trace/calibration documents")
    p.add_argument("--scene")
    p.add_argument("--trace")
    p.add_argument("--calib")
    p.add_argument(
        "--check-default-calib",
        action="store_true",
        help="also validate the bundled calibration",
    )
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
