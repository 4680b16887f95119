"""Command-line front end: airtime math, trace decoding, the probability
grid, the forced-collision CRC bench, and scenario-driven simulation sweeps
with plot-ready CSV (and rendered figures when an output directory is
given).

Exit codes: 0 success, 2 configuration or parse error, 3 a decode aborted
on a same-sub-slot collision.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .analysis import TABLE3_DEVICES, TABLE3_SUBSLOTS, distinct_probability_table
from .channel import TraceParseError, read_trace
from .chirp import LoRaParams, time_on_air
from .decoder import (
    SameSubslotCollisionError,
    decode_many,
    decode_two,
    format_symbols,
)
from .framing import symbols_to_frame
from .scenario import (
    FIGURE_META,
    FIGURE_SCENARIOS,
    expand_scenario,
    format_csv,
    parse_scenario,
    result_row,
)
from .sim import SimConfigError, run_crc_bench, run_simulation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COLLISION = 3


def _cmd_toa(args) -> int:
    params = LoRaParams(sf=args.sf, bw=args.bw, cr=args.cr, preamble_symbols=args.preamble)
    toa = time_on_air(params, args.payload)
    print(f"{toa * 1000:.3f} ms")
    return EXIT_OK


def _cmd_table3(args) -> int:
    table = distinct_probability_table()
    header = "n devices | " + " | ".join(f"s={s}" for s in TABLE3_SUBSLOTS)
    print(header)
    print("-" * len(header))
    for n in TABLE3_DEVICES:
        cells = " | ".join(f"{table[(n, s)]:.3f}" for s in TABLE3_SUBSLOTS)
        print(f"{n:9d} | {cells}")
    return EXIT_OK


def _cmd_decode(args) -> int:
    try:
        text = Path(args.trace).read_text()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        trace = read_trace(text)
    except TraceParseError as exc:
        print(f"error: {args.trace}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    n = args.n if args.n is not None else trace.node_count
    algorithm = args.algorithm
    if algorithm == "auto":
        algorithm = "two" if n == 2 else "many"
    try:
        if algorithm == "two":
            result = decode_two(trace, record_steps=args.trace_debug)
        else:
            result = decode_many(trace, n, record_steps=args.trace_debug)
    except SameSubslotCollisionError as exc:
        print(f"error: same sub-slot collision: {exc}", file=sys.stderr)
        return EXIT_COLLISION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.trace_debug:
        for step in result.steps:
            fm = "{" + ",".join(map(str, step.f_minus or ())) + "}"
            fp = "{" + ",".join(map(str, step.f_plus or ())) + "}"
            print(
                f"# t={step.time} owner=n{step.owner} idx={step.symbol_index} "
                f"F-={fm} F+={fp} {step.action}"
            )
    for frame in result.frames:
        line = f"n{frame.node_id}: {format_symbols(frame.symbols)}"
        if args.framed and frame.is_concrete:
            try:
                spec = symbols_to_frame(frame.symbols, trace.params)
                line += f"  payload={spec.payload.hex()}"
            except ValueError:
                line += "  payload=<not a framed payload>"
        print(line)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    if bool(args.scenario) == bool(args.figure):
        print("error: give exactly one of SCENARIO or --figure", file=sys.stderr)
        return EXIT_CONFIG
    if args.figure:
        if args.figure not in FIGURE_SCENARIOS:
            print(
                f"error: unknown figure {args.figure!r}; choose from "
                f"{', '.join(sorted(FIGURE_SCENARIOS))}",
                file=sys.stderr,
            )
            return EXIT_CONFIG
        text = FIGURE_SCENARIOS[args.figure]
        stem = FIGURE_META[args.figure].name
    else:
        try:
            text = Path(args.scenario).read_text()
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        stem = Path(args.scenario).stem
    try:
        scenario = parse_scenario(text)
        configs = expand_scenario(scenario, args.seed)
    except SimConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.duration is not None:
        configs = [replace(c, sim_duration=args.duration) for c in configs]

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            metrics = list(pool.map(run_simulation, configs))
    else:
        metrics = [run_simulation(c) for c in configs]
    rows = [result_row(c, m) for c, m in zip(configs, metrics)]
    csv_text = format_csv(rows)

    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{stem}.csv"
        csv_path.write_text(csv_text)
        print(f"wrote {csv_path}")
        if args.figure and not args.no_plot:
            from .plots import render_figure

            png_path = out_dir / f"{stem}.png"
            render_figure(rows, FIGURE_META[args.figure], str(png_path))
            print(f"wrote {png_path}")
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


def _cmd_crc_bench(args) -> int:
    caps = tuple(args.cap) if args.cap else (4, 100)
    rows_raw = run_crc_bench(
        max_frames=args.max_frames,
        caps=caps,
        trials=args.trials,
        payload_bytes=args.payload,
        sf=args.sf,
        sub_slots=args.sub_slots,
        seed=args.seed,
    )
    rows = [
        {
            "colliding_frames": r.colliding_frames,
            "cap": r.cap,
            "trials": r.trials,
            "decoded_no_crc": r.decoded_no_crc,
            "decoded_with_crc": r.decoded_with_crc,
            "avg_crc_attempts": r.avg_crc_attempts,
        }
        for r in rows_raw
    ]
    csv_text = format_csv(rows)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / "crc_bench.csv"
        csv_path.write_text(csv_text)
        print(f"wrote {csv_path}")
        if not args.no_plot:
            from .plots import render_crc_bench

            a = out_dir / "crc_bench_attempts.png"
            d = out_dir / "crc_bench_decoded.png"
            render_crc_bench(rows, str(a), str(d))
            print(f"wrote {a}")
            print(f"wrote {d}")
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crlora",
        description="Superposed-LoRa collision decoding and MAC simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("toa", help="time on air of a frame")
    p.add_argument("--sf", type=int, default=7)
    p.add_argument("--bw", type=float, default=125_000.0)
    p.add_argument("--cr", type=int, default=1)
    p.add_argument("--preamble", type=int, default=6)
    p.add_argument("--payload", type=int, required=True, help="payload bytes")
    p.set_defaults(func=_cmd_toa)

    p = sub.add_parser("table3", help="print the distinct sub-slot probability grid")
    p.set_defaults(func=_cmd_table3)

    p = sub.add_parser("decode", help="decode a frontier-event trace file")
    p.add_argument("trace")
    p.add_argument("--n", type=int, default=None, help="number of transmitters")
    p.add_argument("--algorithm", choices=("auto", "two", "many"), default="auto")
    p.add_argument("--framed", action="store_true", help="also deserialise payloads")
    p.add_argument("--trace-debug", action="store_true", help="print the decode steps")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("simulate", help="run a scenario or figure preset")
    p.add_argument("scenario", nargs="?", default=None)
    p.add_argument("--figure", default=None, help=f"preset id: {', '.join(sorted(FIGURE_SCENARIOS))}")
    p.add_argument("--seed", type=int, default=42, help="master seed")
    p.add_argument("--out", default=None, help="output directory for CSV and figures")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for sweep entries")
    p.add_argument("--duration", type=float, default=None, help="override sim_duration")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("crc-bench", help="forced-collision CRC disambiguation bench")
    p.add_argument("--cap", type=int, action="append", help="attempt cap (repeatable)")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-frames", type=int, default=8)
    p.add_argument("--payload", type=int, default=50)
    p.add_argument("--sf", type=int, default=7)
    p.add_argument("--sub-slots", type=int, default=8)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=None)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=_cmd_crc_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SimConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
