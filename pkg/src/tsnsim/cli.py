"""tsnsim command line: run, validate, plot and list scenarios.

Exit codes: 0 success, 1 invalid or infeasible configuration, 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from . import render, scenarios
from .config import load_config, parse_duration
from .engine import Simulator
from .model import ConfigError, hyperperiod
from .trace import TraceIOError, all_latencies, load_trace, read_latency_csv, save_trace
from .validator import check_feasibility, validate_config

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2

log = logging.getLogger("tsnsim")


def _err(msg):
    print(f"tsnsim: {msg}", file=sys.stderr)


def _load(path):
    return load_config(scenarios.resolve(path))


def summarize(config, sim, trace, seed=None, stamp=False):
    lat = {}
    for sid, recs in all_latencies(trace).items():
        vals = [r.latency_ns for r in recs if r.latency_ns is not None]
        lat[sid] = {"delivered": len(vals), "min_ns": min(vals, default=None),
                    "max_ns": max(vals, default=None),
                    "mean_ns": round(sum(vals) / len(vals), 1) if vals else None}
    peaks = {f"{pid}/{q}": port.peak[q] for pid, port in sorted(sim.ports.items())
             for q in range(8) if port.peak[q]}
    out = {
        "name": config.name,
        "sim_end_ns": config.sim_end,
        "hyperperiod_ns": hyperperiod(config.streams) if config.streams else 0,
        "accounting": trace.accounting(),
        "latency": lat,
        "peak_occupancy_bytes": peaks,
        "in_flight": sim.in_flight(),
    }
    if seed is not None:
        out["seed"] = seed
    if stamp:
        from datetime import datetime, timezone
        out["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return out


def run_one(path, out_dir, until=None, seed=None, stamp=False):
    """Validate, simulate and write one config. Returns an exit code."""
    try:
        config = _load(path)
    except ConfigError as exc:
        _err(f"{path}: {exc}")
        return EXIT_INVALID
    except OSError as exc:
        _err(f"{path}: {exc.strerror or exc}")
        return EXIT_IO
    if until is not None:
        config = replace(config, sim_end=until)
    problems = validate_config(config)
    if problems:
        for p in problems:
            _err(f"{path}: {p}")
        return EXIT_INVALID
    sim = Simulator(config)
    trace = sim.run()
    try:
        save_trace(trace, out_dir)
        with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
            json.dump(summarize(config, sim, trace, seed, stamp), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    log.info("%s: wrote %s", config.name or path, out_dir)
    return EXIT_OK


def _run_job(job):
    return run_one(*job)


def cmd_run(args):
    until = parse_duration(args.until) if args.until else None
    if len(args.config) == 1:
        return run_one(args.config[0], args.out, until, args.seed, args.stamp)
    jobs = []
    for path in args.config:
        name = os.path.splitext(os.path.basename(path))[0]
        jobs.append((path, os.path.join(args.out, name), until, args.seed, args.stamp))
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            codes = list(pool.map(_run_job, jobs))
    else:
        codes = [_run_job(j) for j in jobs]
    return max(codes)


def cmd_validate(args):
    try:
        config = _load(args.config)
    except ConfigError as exc:
        _err(f"{args.config}: {exc}")
        return EXIT_INVALID
    except OSError as exc:
        _err(f"{args.config}: {exc.strerror or exc}")
        return EXIT_IO
    problems = validate_config(config)
    if problems:
        if args.json:
            print(json.dumps({"valid": False, "diagnostics": [
                {"code": p.code, "message": p.message} for p in problems]}, indent=2))
        for p in problems:
            _err(str(p))
        return EXIT_INVALID
    report = check_feasibility(config)
    if args.json:
        print(json.dumps({"valid": True, **report.as_dict()}, indent=2))
    else:
        print(report.to_text())
    return EXIT_OK if report.feasible else EXIT_INVALID


def cmd_plot(args):
    try:
        if args.port:
            trace = load_trace(args.trace)
            queue = args.queue
            if queue is None:
                used = sorted({e.queue for e in trace.frame_events if e.node == args.port and e.queue is not None})
                queue = used[0] if used else 7
            svg = render.occupancy_svg(trace, args.port, queue, args.start, args.end,
                                       period=_period(args), streams=args.stream or None)
        else:
            lat = read_latency_csv(os.path.join(args.trace, "latency.csv"))
            svg = render.latency_svg(lat, args.latency or None, args.start, args.end)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(svg)
    except TraceIOError as exc:
        _err(str(exc))
        return EXIT_IO
    except OSError as exc:
        _err(f"{exc.filename or args.out}: {exc.strerror or exc}")
        return EXIT_IO
    except KeyError as exc:
        _err(str(exc))
        return EXIT_INVALID
    return EXIT_OK


def _period(args):
    if args.period:
        return parse_duration(args.period)
    try:
        with open(os.path.join(args.trace, "summary.json"), encoding="utf-8") as fh:
            return json.load(fh).get("hyperperiod_ns") or None
    except (OSError, ValueError):
        return None


def cmd_list(args):
    for name in scenarios.names():
        print(name)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="tsnsim", description="TSN time-aware shaper fault simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a config and write CSV traces")
    r.add_argument("--config", action="append", required=True,
                   help="config file or scenarios/<name>; repeat for a batch")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--until", help="override sim_end, e.g. 20ms")
    r.add_argument("--seed", type=int, help="reserved; recorded in summary.json")
    r.add_argument("--jobs", type=int, default=1, help="parallel runs in batch mode")
    r.add_argument("--stamp", action="store_true", help="embed a timestamp in summary.json")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="check a config and its fault-free feasibility")
    v.add_argument("--config", required=True)
    v.add_argument("--json", action="store_true", help="machine-readable report")
    v.set_defaults(func=cmd_validate)

    pl = sub.add_parser("plot", help="render an SVG chart from a trace directory")
    pl.add_argument("--trace", required=True)
    pl.add_argument("--out", required=True)
    pl.add_argument("--port", help="egress port id, e.g. SW->L (occupancy chart)")
    pl.add_argument("--queue", type=int)
    pl.add_argument("--stream", action="append", help="restrict occupancy chart to these streams")
    pl.add_argument("--latency", nargs="*", metavar="STREAM", help="latency chart (all streams if none given)")
    pl.add_argument("--start", type=parse_duration)
    pl.add_argument("--end", type=parse_duration)
    pl.add_argument("--period", help="marker spacing (default: hyperperiod from summary.json)")
    pl.set_defaults(func=cmd_plot)

    ls = sub.add_parser("list", help="list bundled scenarios")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
