"""Command-line entry points.

Four command families:

* ``detect run``      — batch-process a frame directory or a scripted
                        scenario; optionally persist the event log and
                        captures.
* ``simulate``        — sensor-accuracy sweep, dead-weevil counting
                        trials, gamma calibration.
* ``calibrate``       — similarity-threshold derivation and grayscale
                        corpus statistics.
* ``serve``           — run the HTTP API.

Exit status: 0 on success, 1 with a one-line reason on stderr for
operational failures, 2 for usage errors (argparse's convention).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from pathlib import Path

from . import calibration, simulator
from .detector import DetectionConfig, format_event_line, parse_ts, run_detection
from .errors import TrapSightError
from .store import Store

DEFAULT_START_TS = "2024-06-01T00:00:00Z"
DEFAULT_SIZES = "3.5,4.95,6.4,7.85,9.3,10.75,12.2,13.65,15.1,16.55,18"
DEFAULT_SPEEDS = "1.8,20,1518.17"


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trapsight",
        description="Image-based pest trap: detection, simulation, calibration, API.",
    )
    top = parser.add_subparsers(dest="command", required=True)

    detect = top.add_parser("detect", help="run the detection pipeline")
    detect_sub = detect.add_subparsers(dest="subcommand", required=True)
    run = detect_sub.add_parser("run", help="process a frame directory or scenario")
    run.add_argument(
        "--input",
        required=True,
        help="directory of .pgm/.png frames, or a scenario .json file",
    )
    run.add_argument("--config", required=True, help="detection config JSON file")
    run.add_argument("--out", help="directory for the event log and capture store")
    run.add_argument(
        "--start-ts",
        default=None,
        help=f"timestamp of the first frame (default {DEFAULT_START_TS}, "
        "or the scenario's own schedule)",
    )
    run.add_argument(
        "--interval",
        type=float,
        default=None,
        help="seconds between frames (default 1.0, or the scenario's)",
    )

    simulate = top.add_parser("simulate", help="virtual-trap experiments")
    sim_sub = simulate.add_subparsers(dest="subcommand", required=True)
    sweep = sim_sub.add_parser(
        "sweep", help="trigger-rate sweep over body size and speed"
    )
    sweep.add_argument("--sizes", type=_float_list, default=DEFAULT_SIZES)
    sweep.add_argument("--speeds", type=_float_list, default=DEFAULT_SPEEDS)
    sweep.add_argument("--trials", type=int, default=100)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument(
        "--gamma",
        type=float,
        default=None,
        help="detectability exponent (default: calibrated)",
    )
    sweep.add_argument("--out", help="write CSV here instead of stdout")
    dead = sim_sub.add_parser(
        "dead-weevil", help="counting accuracy with persistent dead blobs"
    )
    dead.add_argument("--trials", type=int, default=10)
    dead.add_argument("--seed", type=int, default=7)
    dead.add_argument(
        "--without-dead",
        action="store_true",
        help="control condition: no dead blobs in the first frame",
    )
    gamma = sim_sub.add_parser(
        "calibrate-gamma", help="grid-search the detectability exponent"
    )
    gamma.add_argument("--trials", type=int, default=400)
    gamma.add_argument("--seed", type=int, default=715)

    calibrate = top.add_parser("calibrate", help="derive the detection thresholds")
    cal_sub = calibrate.add_subparsers(dest="subcommand", required=True)
    sim_thresh = cal_sub.add_parser(
        "similarity-threshold",
        help="similarity threshold from the largest in-range object",
    )
    sim_thresh.add_argument("--max-area", type=int, required=True)
    sim_thresh.add_argument("--width", type=int, required=True)
    sim_thresh.add_argument("--height", type=int, required=True)
    gray = cal_sub.add_parser(
        "grayscale", help="per-class grayscale statistics from a labeled corpus"
    )
    gray.add_argument("--corpus", required=True, help="manifest.jsonl of the corpus")
    gray.add_argument(
        "--synthesize",
        action="store_true",
        help="generate a synthetic corpus at the manifest path first",
    )
    gray.add_argument("--seed", type=int, default=42)

    serve = top.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument(
        "--data",
        default=None,
        help="data directory (TRAPSIGHT_DATA overrides)",
    )
    serve.add_argument("--config", help="initial detection config JSON file")
    serve.add_argument(
        "--scenario", help="scenario .json served frame by frame via /api/capture"
    )
    serve.add_argument(
        "--frames", help="directory of images served via /api/capture"
    )

    return parser


def _cmd_detect_run(args) -> int:
    cfg = DetectionConfig.from_file(args.config)
    input_path = Path(args.input)

    if input_path.is_file():
        scenario = simulator.TrapScenario.from_file(input_path)
        frames = simulator.scenario_frames(scenario)
        frame_note = f"scenario {input_path.name} ({scenario.frame_count} frames)"
        start_ts = parse_ts(args.start_ts) if args.start_ts else scenario.start_ts
        interval = args.interval if args.interval is not None else scenario.interval_s
    elif input_path.is_dir():
        paths = sorted(
            p
            for p in input_path.iterdir()
            if p.suffix.lower() in (".pgm", ".png")
        )
        if not paths:
            raise TrapSightError(f"no .pgm/.png frames in {input_path}")
        frames = paths
        frame_note = f"{len(paths)} frames from {input_path}"
        start_ts = parse_ts(args.start_ts or DEFAULT_START_TS)
        interval = args.interval if args.interval is not None else 1.0
    else:
        raise TrapSightError(f"input not found: {input_path}")

    sink = None
    store = None
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        store = Store(out_dir)
        sink = lambda data, ts: store.put_image(data, ts).content_id  # noqa: E731

    run = run_detection(
        frames, cfg, start_ts=start_ts, interval_s=interval, sink=sink
    )

    if store is not None:
        log_path = Path(args.out) / "event_log.jsonl"
        with open(log_path, "w", encoding="utf-8") as fh:
            for event in run.events:
                store.append_event(event)
                fh.write(format_event_line(event) + "\n")
        print(f"event log: {log_path}")

    by_algorithm = Counter(e.algorithm.value for e in run.events)
    print(f"processed {frame_note}: {len(run.events)} events, {run.rejected} rejected")
    print(
        "algorithms: "
        + (
            " ".join(f"{k}={v}" for k, v in sorted(by_algorithm.items()))
            if by_algorithm
            else "none"
        )
    )
    print(f"total count: {run.total_count}")
    print(f"warnings: {len(run.warnings)}")
    return 0


def _cmd_simulate_sweep(args) -> int:
    sizes, speeds = args.sizes, args.speeds
    if args.gamma is None:
        model = simulator.default_sensor_model()
    else:
        model = simulator.SensorModel(gamma=args.gamma)
    result = simulator.trigger_rate_sweep(
        sizes, speeds, model, trials=args.trials, seed=args.seed
    )
    csv_text = result.to_csv()
    if args.out:
        Path(args.out).write_text(csv_text)
        print(f"wrote {args.out} ({len(sizes) * len(speeds)} cells)")
    else:
        sys.stdout.write(csv_text)
    return 0


def _cmd_simulate_dead_weevil(args) -> int:
    result = simulator.run_dead_weevil_trials(
        trials=args.trials, with_dead=not args.without_dead, seed=args.seed
    )
    condition = "without dead blobs" if args.without_dead else "with dead blobs"
    print(
        f"accuracy {result.accuracy_pct:.1f}% "
        f"({result.correct}/{result.trials} trials correct, {condition})"
    )
    return 0


def _cmd_simulate_calibrate_gamma(args) -> int:
    cal = simulator.calibrate_gamma(seed=args.seed, trials=args.trials)
    print("gamma  rate@16mm,20mm/s")
    for g, rate in cal.table:
        marker = "  <- selected" if g == cal.gamma else ""
        print(f"{g:<6.2f} {rate:6.1f}%{marker}")
    print(f"selected gamma {cal.gamma:g} (target {cal.target_rate:.0f}%)")
    return 0


def _cmd_calibrate_similarity(args) -> int:
    pct = calibration.similarity_threshold(args.max_area, args.width, args.height)
    print(f"{pct:.4f}")
    return 0


def _cmd_calibrate_grayscale(args) -> int:
    manifest = Path(args.corpus)
    if args.synthesize:
        corpus = calibration.synthetic_corpus(seed=args.seed)
        calibration.write_corpus(corpus, manifest.parent, manifest.name)
    stats = calibration.grayscale_stats(calibration.load_corpus(manifest))
    print(calibration.format_stats_table(stats))
    print(json.dumps([s.to_obj() for s in stats]))
    rec = calibration.recommend_thresholds(stats)
    if rec.feasible:
        print(f"recommended grayscale threshold: {rec.t}")
    else:
        print(f"no threshold recommendation: {rec.reason}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import (
        DirectoryFrameSource,
        ScenarioFrameSource,
        ServiceRuntime,
        create_app,
    )

    data_dir = os.environ.get("TRAPSIGHT_DATA") or args.data
    if not data_dir:
        raise TrapSightError("no data directory (use --data or TRAPSIGHT_DATA)")
    if args.scenario and args.frames:
        raise TrapSightError("--scenario and --frames are mutually exclusive")
    if args.scenario:
        source = ScenarioFrameSource(simulator.TrapScenario.from_file(args.scenario))
    elif args.frames:
        source = DirectoryFrameSource(args.frames)
    else:
        source = ScenarioFrameSource(simulator.demo_scenario())
    config = DetectionConfig.from_file(args.config) if args.config else None
    runtime = ServiceRuntime(Store(data_dir), source, config=config)
    app = create_app(runtime)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_HANDLERS = {
    ("detect", "run"): _cmd_detect_run,
    ("simulate", "sweep"): _cmd_simulate_sweep,
    ("simulate", "dead-weevil"): _cmd_simulate_dead_weevil,
    ("simulate", "calibrate-gamma"): _cmd_simulate_calibrate_gamma,
    ("calibrate", "similarity-threshold"): _cmd_calibrate_similarity,
    ("calibrate", "grayscale"): _cmd_calibrate_grayscale,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        return _HANDLERS[(args.command, args.subcommand)](args)
    except TrapSightError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
