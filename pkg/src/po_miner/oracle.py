"""Concurrency oracles lifting sequential logs to partially ordered logs."""

from __future__ import annotations

import math
import re

from .log_io import SequentialLog, fold_variants
from .model import EventLog, Lpo


def directly_follows(log: SequentialLog) -> set[tuple[str, str]]:
    pairs = set()
    for trace in log.traces():
        pairs.update(zip(trace, trace[1:]))
    return pairs


def alpha_concurrency(log: SequentialLog) -> set[frozenset[str]]:
    """Unordered activity pairs that directly follow each other both ways."""
    df = directly_follows(log)
    return {frozenset((a, b)) for a, b in df if a != b and (b, a) in df}


def _trace_to_lpo(trace: tuple[str, ...], concurrent: set[frozenset[str]]) -> Lpo:
    arcs = [
        (i, j)
        for i in range(len(trace))
        for j in range(i + 1, len(trace))
        if trace[i] == trace[j] or frozenset((trace[i], trace[j])) not in concurrent
    ]
    return Lpo.from_arcs(trace, arcs)


def alpha_partialize(log: SequentialLog) -> EventLog:
    """Drop the order between events whose activities are Alpha-concurrent.

    Concurrency is decided once for the whole log.  Events sharing an
    activity always stay ordered by trace position, and order that the
    closure reinstates through an intermediate event is kept.
    """
    concurrent = alpha_concurrency(log)
    variants = [(_trace_to_lpo(trace, concurrent), 1) for trace in log.traces()]
    return fold_variants(EventLog.from_variants(variants, log.alphabet))


def granularity_partialize(log: SequentialLog, bucket: float) -> EventLog:
    """Order events only across time buckets of width ``bucket`` seconds."""
    if not bucket > 0:
        raise ValueError("bucket must be positive")
    variants = []
    for events in log.cases.values():
        slots = [math.floor(stamp / bucket) for _, stamp in events]
        arcs = [
            (i, j)
            for i in range(len(events))
            for j in range(len(events))
            if slots[i] < slots[j]
        ]
        variants.append((Lpo.from_arcs([a for a, _ in events], arcs), 1))
    return fold_variants(EventLog.from_variants(variants, log.alphabet))


_UNITS = {"s": 1, "m": 60, "h": 3600, "d": 86400, "w": 7 * 86400}


def parse_duration(text: str) -> float:
    """Seconds from ``"90"``, ``"90s"``, ``"15m"``, ``"6h"``, ``"1d"`` or ``"2w"``."""
    match = re.fullmatch(r"\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([smhdw]?)\s*", text)
    if not match:
        raise ValueError(f"cannot parse duration {text!r}")
    value = float(match.group(1)) * _UNITS.get(match.group(2) or "s")
    if value <= 0:
        raise ValueError("duration must be positive")
    return value
