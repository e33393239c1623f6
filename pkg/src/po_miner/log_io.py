"""Reading and writing event logs, variant folding and ▶/■ extension."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Sequence

from .model import (
    END,
    RESERVED,
    START,
    CycleError,
    EventLog,
    ExtendedLpo,
    Lpo,
    PoMinerError,
    ReservedLabelError,
)


class FormatError(PoMinerError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class SequentialLog:
    """Totally ordered cases: case id -> ((activity, timestamp), ...).

    Events inside a case are sorted by timestamp; ties keep file order.
    """

    cases: dict[str, tuple[tuple[str, float], ...]]

    @classmethod
    def from_traces(cls, traces: Iterable[Sequence[str]]) -> "SequentialLog":
        """Build a log from plain activity sequences, timestamps 0, 1, 2, ..."""
        return cls({
            str(k): tuple((a, float(t)) for t, a in enumerate(trace))
            for k, trace in enumerate(traces)
        })

    def traces(self) -> list[tuple[str, ...]]:
        return [tuple(a for a, _ in events) for events in self.cases.values()]

    @property
    def alphabet(self) -> frozenset[str]:
        return frozenset(a for events in self.cases.values() for a, _ in events)

    def trace_variants(self) -> dict[tuple[str, ...], int]:
        counts: dict[tuple[str, ...], int] = {}
        for trace in self.traces():
            counts[trace] = counts.get(trace, 0) + 1
        return counts

    def __len__(self) -> int:
        return len(self.cases)


def parse_timestamp(text: str) -> float:
    """Epoch seconds from a number or an RFC 3339 string (naive means UTC)."""
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    iso = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
    stamp = datetime.fromisoformat(iso.replace(" ", "T", 1))
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return stamp.timestamp()


def parse_sequential_csv(
    data: bytes | str,
    case: str = "case",
    activity: str = "activity",
    timestamp: str = "timestamp",
) -> SequentialLog:
    text = data.decode("utf-8-sig") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise FormatError("empty input, expected a header row", 1) from None
    columns = {}
    for name in (case, activity, timestamp):
        if name not in header:
            raise FormatError(f"header has no column named {name!r}", 1)
        columns[name] = header.index(name)

    rows: dict[str, list[tuple[float, int, str]]] = {}
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < len(header):
            raise FormatError(f"expected {len(header)} fields, found {len(row)}", line)
        name = row[columns[activity]].strip()
        if not name:
            raise FormatError("empty activity name", line)
        if name in RESERVED:
            raise FormatError(f"activity name {name!r} is reserved", line)
        try:
            stamp = parse_timestamp(row[columns[timestamp]])
        except ValueError:
            raise FormatError(f"cannot parse timestamp {row[columns[timestamp]]!r}", line) from None
        rows.setdefault(row[columns[case]].strip(), []).append((stamp, line, name))

    cases = {}
    for case_id, events in rows.items():
        events.sort(key=lambda e: (e[0], e[1]))
        cases[case_id] = tuple((name, stamp) for stamp, _, name in events)
    return SequentialLog(cases)


def parse_lpo_json(data: bytes | str) -> EventLog:
    """Parse an LPO log document; variants are normalized but not folded."""
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("variants"), list):
        raise FormatError('expected an object with a "variants" list')
    declared = doc.get("alphabet")
    if declared is not None and (
        not isinstance(declared, list) or not all(isinstance(a, str) and a for a in declared)
    ):
        raise FormatError('"alphabet" must be a list of non-empty strings')

    variants = []
    for k, entry in enumerate(doc["variants"]):
        if not isinstance(entry, dict):
            raise FormatError(f"variant {k} is not an object")
        count = entry.get("count", 1)
        if not isinstance(count, int) or isinstance(count, bool) or count < 1:
            raise FormatError(f"variant {k}: count must be an integer >= 1")
        nodes = entry.get("nodes")
        if not isinstance(nodes, list):
            raise FormatError(f'variant {k}: missing "nodes" list')
        labels: dict[int, str] = {}
        for node in nodes:
            try:
                node_id, label = node["id"], node["activity"]
            except (TypeError, KeyError):
                raise FormatError(f'variant {k}: nodes need "id" and "activity"') from None
            if not isinstance(node_id, int) or not isinstance(label, str) or not label:
                raise FormatError(f"variant {k}: bad node {node!r}")
            if label in RESERVED:
                raise ReservedLabelError(f"variant {k}: activity name {label!r} is reserved")
            if node_id in labels:
                raise FormatError(f"variant {k}: duplicate node id {node_id}")
            labels[node_id] = label
        if sorted(labels) != list(range(len(labels))):
            raise FormatError(f"variant {k}: node ids must be 0..{len(labels) - 1}")
        arcs = []
        for arc in entry.get("arcs", []):
            if (
                not isinstance(arc, list)
                or len(arc) != 2
                or not all(isinstance(x, int) and x in labels for x in arc)
            ):
                raise FormatError(f"variant {k}: bad arc {arc!r}")
            arcs.append((arc[0], arc[1]))
        try:
            lpo = Lpo.from_arcs([labels[v] for v in range(len(labels))], arcs)
        except CycleError as exc:
            raise CycleError(exc.cycle, variant=k) from None
        if declared is not None and not set(lpo.labels) <= set(declared):
            extra = sorted(set(lpo.labels) - set(declared))
            raise FormatError(f"variant {k}: activities {extra} not in the declared alphabet")
        variants.append((lpo, count))
    return EventLog.from_variants(variants, declared or ())


def write_lpo_json(log: EventLog) -> bytes:
    """Serialize ``log``; arcs are the skeleton, sorted."""
    doc = {
        "alphabet": sorted(log.alphabet),
        "variants": [
            {
                "count": count,
                "nodes": [{"id": v, "activity": a} for v, a in enumerate(lpo.labels)],
                "arcs": [list(arc) for arc in sorted(lpo.skeleton)],
            }
            for lpo, count in log.variants
        ],
    }
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


# -- canonical forms -------------------------------------------------------

# Upper bound on explored leaves of the individualization search.  Beyond it
# ties fall back to node ids: folding stays safe (never merges different
# serializations) but may leave isomorphic variants apart.
_LEAF_BUDGET = 512


def _rank(signatures: Sequence) -> list[int]:
    table = {sig: r for r, sig in enumerate(sorted(set(signatures)))}
    return [table[s] for s in signatures]


def _refine(lpo: Lpo, colors: list[int]) -> list[int]:
    preds, succs = lpo.predecessors, lpo.successors
    classes = len(set(colors))
    while True:
        sigs = [
            (
                colors[v],
                tuple(sorted(colors[u] for u in preds[v])),
                tuple(sorted(colors[w] for w in succs[v])),
            )
            for v in range(len(colors))
        ]
        colors = _rank(sigs)
        if len(set(colors)) == classes:
            return colors
        classes = len(set(colors))


def _serialize(lpo: Lpo, colors: list[int]) -> tuple:
    ordering = sorted(range(len(colors)), key=lambda v: colors[v])
    new_id = {v: k for k, v in enumerate(ordering)}
    labels = tuple(lpo.labels[v] for v in ordering)
    arcs = tuple(sorted((new_id[u], new_id[v]) for u, v in lpo.skeleton))
    return labels, arcs


def canonical_form(lpo: Lpo) -> tuple[tuple[str, ...], tuple[tuple[int, int], ...]]:
    """Isomorphism-invariant ``(labels, skeleton arcs)`` of ``lpo``.

    Colors start from (label, in-degree, out-degree) and are refined by the
    colors of skeleton neighbors; remaining ties are individualized one node
    at a time and the lexicographically smallest serialization wins.
    """
    preds, succs = lpo.predecessors, lpo.successors
    start = _rank([(l, len(preds[v]), len(succs[v])) for v, l in enumerate(lpo.labels)])
    budget = [_LEAF_BUDGET]
    best: list[tuple | None] = [None]

    def search(colors: list[int]) -> None:
        colors = _refine(lpo, colors)
        cells: dict[int, list[int]] = {}
        for v, c in enumerate(colors):
            cells.setdefault(c, []).append(v)
        target = next((c for c in sorted(cells) if len(cells[c]) > 1), None)
        if target is None:
            budget[0] -= 1
            form = _serialize(lpo, colors)
            if best[0] is None or form < best[0]:
                best[0] = form
            return
        tried: set[tuple] = set()
        for v in cells[target]:
            # twins (same neighbourhoods) give identical subtrees
            twin_key = (preds[v], succs[v])
            if twin_key in tried:
                continue
            tried.add(twin_key)
            split = [2 * c + (0 if (u == v or c != target) else 1) for u, c in enumerate(colors)]
            search(split)
            if budget[0] <= 0:
                return

    search(start)
    assert best[0] is not None
    return best[0]


def canonicalize(lpo: Lpo) -> Lpo:
    labels, arcs = canonical_form(lpo)
    return Lpo.from_arcs(labels, arcs)


def fold_variants(log: EventLog) -> EventLog:
    """Merge variants with equal canonical forms, summing multiplicities."""
    merged: dict[tuple, int] = {}
    for lpo, count in log.variants:
        form = canonical_form(lpo)
        merged[form] = merged.get(form, 0) + count
    variants = tuple(
        (Lpo.from_arcs(labels, arcs), merged[(labels, arcs)])
        for labels, arcs in sorted(merged)
    )
    return EventLog(log.alphabet, variants)


def chains(log: SequentialLog) -> EventLog:
    """Each trace as a chain Lpo, folded into variants."""
    variants = [(Lpo.chain(trace), 1) for trace in log.traces()]
    return fold_variants(EventLog.from_variants(variants, log.alphabet))


# -- endpoints -------------------------------------------------------------

def extend_with_endpoints(lpo: Lpo) -> ExtendedLpo:
    """Add ▶ before every node (as node 0) and ■ after every node (last)."""
    reserved = [v for v, l in enumerate(lpo.labels) if l in RESERVED]
    if reserved:
        raise ReservedLabelError(f"node {reserved[0]} already carries a reserved label")
    n = len(lpo.labels)
    end = n + 1
    arcs = [(u + 1, v + 1) for u, v in lpo.skeleton]
    arcs += [(0, v + 1) for v in lpo.minimal()]
    arcs += [(v + 1, end) for v in lpo.maximal()]
    if n == 0:
        arcs.append((0, end))
    return ExtendedLpo.from_arcs((START, *lpo.labels, END), arcs)


def strip_endpoints(lpo: ExtendedLpo) -> Lpo:
    """Inverse of :func:`extend_with_endpoints`."""
    last = len(lpo.labels) - 1
    arcs = [(u - 1, v - 1) for u, v in lpo.skeleton if u != 0 and v != last]
    return Lpo.from_arcs(lpo.labels[1:last], arcs)


def extend_log(log: EventLog) -> EventLog:
    return EventLog(
        log.alphabet,
        tuple((extend_with_endpoints(lpo), count) for lpo, count in log.variants),
    )
