"""Candidate-place enumeration, monotone pruning and net assembly.

Candidates form a forest.  Roots are all ``({a}, {b})``.  A candidate whose
preset is still its root singleton may grow its postset by a transition
later (in the transition order) than everything already in it; every
candidate may grow its preset the same way.  Each ``(I, O)`` therefore has
exactly one build path, and the subtree below a preset-child only ever
adds to the preset.

Pruning rests on two monotone laws:

* adding to the postset never cures an underfed place;
* adding to the preset never cures an overfed place.

A preset-child subtree only grows the preset, so it is cut whole when the
parent is overfed on more than ``1 - tau`` of the cases.  A postset-child
subtree also contains preset growth, which can repair underfeeding, so it
cannot be cut; instead, candidates that only grew the postset of a too
often underfed ancestor are known to be rejected and skip the tokenflow
replay altogether (only their final markings are counted, which is all
their own preset-children pruning needs).
"""

from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

from .log_io import extend_log
from .model import END, START, CandidatePlace, EventLog, PoMinerError, WorkflowNet
from .tokenflow import LogVerdict, aggregate_verdicts, final_marking

FREQUENCY_DESC = "frequency_desc"
LEXICOGRAPHIC = "lexicographic"


class EmptyLogError(PoMinerError):
    pass


@dataclass(frozen=True)
class DiscoveryConfig:
    tau: float = 1.0
    max_depth: int = 5
    transition_order: str = FREQUENCY_DESC
    prune: bool = True
    threads: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")
        if self.max_depth < 2:
            raise ValueError(f"max_depth must be at least 2, got {self.max_depth}")
        if self.transition_order not in (FREQUENCY_DESC, LEXICOGRAPHIC):
            raise ValueError(f"unknown transition order {self.transition_order!r}")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


@dataclass
class TraversalStats:
    candidates_evaluated: int = 0
    candidates_pruned: int = 0
    decided_by: Counter = field(default_factory=Counter)

    def merge(self, other: "TraversalStats") -> None:
        self.candidates_evaluated += other.candidates_evaluated
        self.candidates_pruned += other.candidates_pruned
        self.decided_by.update(other.decided_by)

    def as_dict(self) -> dict:
        return {
            "candidates_evaluated": self.candidates_evaluated,
            "candidates_pruned": self.candidates_pruned,
            "decided_by": {k: self.decided_by.get(k, 0)
                           for k in ("closed_form", "forward", "backward", "maxflow")},
        }


def transition_order(log: EventLog, mode: str = FREQUENCY_DESC) -> list[str]:
    """▶, then the alphabet, then ■.

    ``frequency_desc`` sorts activities by total occurrences over all cases
    (most frequent first, ties by name); ``lexicographic`` sorts by name.
    """
    if mode == LEXICOGRAPHIC:
        middle = sorted(log.alphabet)
    elif mode == FREQUENCY_DESC:
        counts = Counter({a: 0 for a in log.alphabet})
        for lpo, count in log.variants:
            for label in lpo.labels:
                if label in counts:
                    counts[label] += count
        middle = sorted(log.alphabet, key=lambda a: (-counts[a], a))
    else:
        raise ValueError(f"unknown transition order {mode!r}")
    return [START, *middle, END]


def _rank(order: Sequence[str]) -> dict[str, int]:
    return {t: k for k, t in enumerate(order)}


def roots(order: Sequence[str]) -> list[CandidatePlace]:
    return [
        CandidatePlace(frozenset([a]), frozenset([b]))
        for a in order if a != END
        for b in order if b != START
    ]


def postset_children(cand: CandidatePlace, cfg: DiscoveryConfig, order: Sequence[str]) -> list[CandidatePlace]:
    if len(cand.preset) != 1 or cand.size >= cfg.max_depth:
        return []
    rank = _rank(order)
    top = max(rank[t] for t in cand.postset)
    return [CandidatePlace(cand.preset, cand.postset | {u})
            for u in order[top + 1:] if u != START]


def preset_children(cand: CandidatePlace, cfg: DiscoveryConfig, order: Sequence[str]) -> list[CandidatePlace]:
    if cand.size >= cfg.max_depth:
        return []
    rank = _rank(order)
    top = max(rank[t] for t in cand.preset)
    return [CandidatePlace(cand.preset | {t}, cand.postset)
            for t in order[top + 1:] if t != END]


def candidate_children(
    cand: CandidatePlace, verdict: LogVerdict, cfg: DiscoveryConfig, order: Sequence[str]
) -> list[CandidatePlace]:
    """Children of ``cand`` that remain to be visited after pruning.

    Preset-children are dropped when the candidate is overfed too often.
    Postset-children always stay (their subtrees may contain valid places);
    the traversal treats them as already rejected when ``cand`` is underfed
    too often.
    """
    children = postset_children(cand, cfg, order)
    if not (cfg.prune and verdict.not_overfed_fraction < cfg.tau):
        children += preset_children(cand, cfg, order)
    return children


def preset_subtree_size(cand: CandidatePlace, cfg: DiscoveryConfig, order: Sequence[str]) -> int:
    """Number of candidates in the subtree of a candidate with ``|preset| >= 2``."""
    rank = _rank(order)
    top = max(rank[t] for t in cand.preset)
    later = sum(1 for t in order[top + 1:] if t != END)
    room = cfg.max_depth - cand.size
    return sum(comb(later, k) for k in range(room + 1))


def candidate_space_size(num_activities: int, max_depth: int) -> int:
    """All ``(I, O)`` with non-empty sides and ``|I| + |O| <= max_depth``."""
    side = num_activities + 1
    return sum(
        comb(side, i) * comb(side, j)
        for i in range(1, side + 1)
        for j in range(1, side + 1)
        if i + j <= max_depth
    )


def _not_overfed_fraction(cand: CandidatePlace, log: EventLog) -> float:
    total = log.num_cases
    ok = sum(count for lpo, count in log.variants if final_marking(cand, lpo) <= 0)
    return ok / total


def _explore(root: CandidatePlace, elog: EventLog, cfg: DiscoveryConfig,
             order: Sequence[str]) -> tuple[list[CandidatePlace], TraversalStats]:
    stats = TraversalStats()
    accepted: list[CandidatePlace] = []
    # (candidate, rejected because an ancestor was underfed too often)
    stack: list[tuple[CandidatePlace, bool]] = [(root, False)]
    while stack:
        cand, doomed = stack.pop()
        if doomed:
            stats.candidates_pruned += 1
            not_underfed = 0.0
            not_overfed = _not_overfed_fraction(cand, elog)
            verdict = LogVerdict(0.0, not_underfed, not_overfed)
        else:
            verdict = aggregate_verdicts(cand, elog)
            stats.candidates_evaluated += 1
            for v in verdict.verdicts:
                stats.decided_by[v.decided_by.value] += 1
            if verdict.fitting_fraction >= cfg.tau:
                accepted.append(cand)
        underfed_too_often = cfg.prune and (doomed or verdict.not_underfed_fraction < cfg.tau)
        kids = candidate_children(cand, verdict, cfg, order)
        if cfg.prune and verdict.not_overfed_fraction < cfg.tau:
            for child in preset_children(cand, cfg, order):
                stats.candidates_pruned += preset_subtree_size(child, cfg, order)
        for child in reversed(kids):
            same_preset = child.preset == cand.preset
            stack.append((child, same_preset and underfed_too_often))
    return accepted, stats


_WORKER_STATE: dict = {}


def _init_worker(elog: EventLog, cfg: DiscoveryConfig, order: list[str]) -> None:
    _WORKER_STATE.update(elog=elog, cfg=cfg, order=order)


def _explore_in_worker(root: CandidatePlace):
    s = _WORKER_STATE
    return _explore(root, s["elog"], s["cfg"], s["order"])


def discover(log: EventLog, cfg: DiscoveryConfig | None = None) -> tuple[WorkflowNet, TraversalStats]:
    """Discover a workflow net whose places each fit at least ``tau`` of the cases."""
    cfg = cfg or DiscoveryConfig()
    if not log.variants:
        raise EmptyLogError("cannot discover a net from an empty log")
    elog = extend_log(log)
    order = transition_order(log, cfg.transition_order)
    starts = roots(order)

    stats = TraversalStats()
    accepted: set[CandidatePlace] = set()
    if cfg.threads > 1 and len(starts) > 1:
        workers = min(cfg.threads, len(starts), os.cpu_count() or 1)
        with ProcessPoolExecutor(workers, initializer=_init_worker,
                                 initargs=(elog, cfg, order)) as pool:
            results = list(pool.map(_explore_in_worker, starts))
    else:
        results = [_explore(root, elog, cfg, order) for root in starts]
    for places, part in results:
        accepted.update(places)
        stats.merge(part)
    net = WorkflowNet(tuple(order), tuple(accepted))
    return net, stats
