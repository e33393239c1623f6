"""Command line front end: ``po-miner {discover,convert,replay}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .discovery import FREQUENCY_DESC, LEXICOGRAPHIC, DiscoveryConfig, discover
from .export import export_dot, export_pnml, read_pnml, replay_statistics
from .log_io import (
    SequentialLog,
    chains,
    fold_variants,
    parse_lpo_json,
    parse_sequential_csv,
    write_lpo_json,
)
from .model import EventLog, PoMinerError
from .oracle import alpha_partialize, granularity_partialize, parse_duration

log = logging.getLogger("po_miner")

EXIT_INPUT = 2


class UsageError(Exception):
    pass


def _default_threads() -> int:
    env = os.environ.get("PO_MINER_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"PO_MINER_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _tau(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError("tau must lie in [0, 1]")
    return value


def _add_log_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--log", required=True, type=Path, help="event log (.csv or LPO .json)")
    p.add_argument("--format", choices=["auto", "csv", "json"], default="auto")
    p.add_argument("--case-column", default="case")
    p.add_argument("--activity-column", default="activity")
    p.add_argument("--timestamp-column", default="timestamp")
    p.add_argument("--oracle", choices=["none", "alpha", "granularity"], default="none",
                   help="how to lift a sequential CSV log to partial orders")
    p.add_argument("--bucket", help="bucket width for --oracle granularity, e.g. 86400, 6h, 2w")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="po-miner", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discover", help="discover a workflow net")
    _add_log_options(p)
    p.add_argument("--tau", type=_tau, default=1.0)
    p.add_argument("--max-depth", type=int, default=5)
    p.add_argument("--no-prune", dest="prune", action="store_false")
    p.add_argument("--order", choices=[FREQUENCY_DESC, LEXICOGRAPHIC], default=FREQUENCY_DESC)
    p.add_argument("--out", type=Path, help="PNML output")
    p.add_argument("--dot", type=Path, help="Graphviz DOT output")
    p.add_argument("--report", type=Path, help="JSON replay report output")
    p.add_argument("--threads", type=int)

    p = sub.add_parser("convert", help="write a sequential log as an LPO log")
    _add_log_options(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("replay", help="replay a log on a PNML net")
    p.add_argument("--net", required=True, type=Path)
    _add_log_options(p)
    p.add_argument("--out", type=Path, help="JSON report output (default: stdout)")
    return parser


def _is_json(args) -> bool:
    if args.format != "auto":
        return args.format == "json"
    return args.log.suffix.lower() == ".json"


def load_log(args) -> tuple[EventLog, SequentialLog | None]:
    data = args.log.read_bytes()
    if _is_json(args):
        if args.oracle != "none":
            raise UsageError("--oracle only applies to sequential CSV logs")
        return fold_variants(parse_lpo_json(data)), None
    seq = parse_sequential_csv(
        data, case=args.case_column, activity=args.activity_column, timestamp=args.timestamp_column
    )
    if args.oracle == "alpha":
        return alpha_partialize(seq), seq
    if args.oracle == "granularity":
        if not args.bucket:
            raise UsageError("--oracle granularity needs --bucket")
        return granularity_partialize(seq, parse_duration(args.bucket)), seq
    if args.bucket:
        raise UsageError("--bucket only applies to --oracle granularity")
    return chains(seq), seq


def _write(path: Path, data: bytes) -> None:
    path.write_bytes(data)
    log.info("wrote %s", path)


def cmd_discover(args) -> int:
    threads = args.threads if args.threads is not None else _default_threads()
    cfg = DiscoveryConfig(tau=args.tau, max_depth=args.max_depth, transition_order=args.order,
                          prune=args.prune, threads=threads)
    elog, _ = load_log(args)
    started = time.perf_counter()
    net, stats = discover(elog, cfg)
    elapsed = time.perf_counter() - started
    if args.out:
        _write(args.out, export_pnml(net))
    if args.dot:
        _write(args.dot, export_dot(net))
    report = None
    if args.report:
        report = replay_statistics(net, elog)
        _write(args.report, report.to_json(net))
    hist = ", ".join(f"{k}={v}" for k, v in stats.as_dict()["decided_by"].items())
    print(f"cases: {elog.num_cases}  lpo variants: {len(elog)}")
    print(f"places: {len(net.places)} fitting places (tau={cfg.tau}, depth={cfg.max_depth})")
    print(f"candidates evaluated: {stats.candidates_evaluated}  pruned: {stats.candidates_pruned}")
    print(f"decided by: {hist}")
    if report is not None:
        print(f"net fitting fraction: {report.net_fitting_fraction:.4f}")
    disconnected = net.disconnected_transitions()
    if disconnected:
        print(f"transitions off every i-o path: {', '.join(disconnected)}")
    print(f"wall time: {elapsed:.3f}s")
    return 0


def cmd_convert(args) -> int:
    elog, seq = load_log(args)
    _write(args.out, write_lpo_json(elog))
    print(f"cases: {elog.num_cases}")
    if seq is not None:
        print(f"trace variants: {len(seq.trace_variants())}")
    print(f"lpo variants: {len(elog)}")
    return 0


def cmd_replay(args) -> int:
    net = read_pnml(args.net.read_bytes())
    elog, _ = load_log(args)
    report = replay_statistics(net, elog)
    data = report.to_json(net)
    if args.out:
        _write(args.out, data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    print(f"net fitting fraction: {report.net_fitting_fraction:.4f}",
          file=sys.stderr if not args.out else sys.stdout)
    return 0


COMMANDS = {"discover": cmd_discover, "convert": cmd_convert, "replay": cmd_replay}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, PoMinerError, ValueError, OSError) as exc:
        print(f"po-miner: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
