"""Slow, independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools
from functools import lru_cache

from po_miner.model import END, CandidatePlace, Lpo


def floyd_warshall_closure(n, arcs):
    reach = [[False] * n for _ in range(n)]
    for u, v in arcs:
        reach[u][v] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    return {(i, j) for i in range(n) for j in range(n) if reach[i][j]}


def compositions(total, parts):
    """All ways to write ``total`` as an ordered sum of ``parts`` naturals."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first, *rest)


def tokenflow_exists(place: CandidatePlace, lpo: Lpo) -> bool:
    """Search every compact tokenflow on the skeleton for one where each
    consumer receives a token and production/consumption balance holds at
    every node; tokens may remain at the final ■ node."""
    n = len(lpo.labels)
    prod = [l in place.preset for l in lpo.labels]
    cons = [l in place.postset for l in lpo.labels]
    topo = floyd_topo(n, lpo.skeleton)
    succ = {v: sorted(w for u, w in lpo.skeleton if u == v) for v in range(n)}
    index = {v: k for k, v in enumerate(topo)}

    @lru_cache(maxsize=None)
    def search(k, pending):
        if k == n:
            return True
        v = topo[k]
        inflow = pending[k]
        if cons[v] and inflow < 1:
            return False
        if prod[v] and not cons[v]:
            out = inflow + 1
        elif cons[v] and not prod[v]:
            out = inflow - 1
        else:
            out = inflow
        heads = succ[v]
        if not heads:
            return out == 0 or lpo.labels[v] == END and search(k + 1, pending)
        for split in compositions(out, len(heads)):
            nxt = list(pending)
            for w, amount in zip(heads, split):
                nxt[index[w]] += amount
            if search(k + 1, tuple(nxt)):
                return True
        return False

    return search(0, tuple([0] * n))


def floyd_topo(n, arcs):
    order = []
    remaining = set(range(n))
    while remaining:
        v = min(x for x in remaining if not any((u, x) in arcs for u in remaining))
        order.append(v)
        remaining.remove(v)
    return order


def replay_sequence(place: CandidatePlace, trace) -> tuple[bool, bool]:
    """Classic token game on one place: (underfed, overfed).

    The marking may go negative; underfed means it ever did, overfed means
    tokens are left at the end.
    """
    tokens = 0
    underfed = False
    for activity in trace:
        if activity in place.postset:
            tokens -= 1
            underfed = underfed or tokens < 0
        if activity in place.preset:
            tokens += 1
    return underfed, tokens > 0


def brute_isomorphic(a: Lpo, b: Lpo) -> bool:
    if sorted(a.labels) != sorted(b.labels) or len(a.skeleton) != len(b.skeleton):
        return False
    n = len(a.labels)
    for perm in itertools.permutations(range(n)):
        if all(a.labels[v] == b.labels[perm[v]] for v in range(n)) and {
            (perm[u], perm[v]) for u, v in a.order
        } == set(b.order):
            return True
    return False


def check_compact_tokenflow(place: CandidatePlace, lpo: Lpo, flow) -> list[str]:
    """Violations of the tokenflow conditions for ``flow`` (empty if valid).

    Tokens left over at the final ■ node are allowed.
    """
    problems = []
    n = len(lpo.labels)
    inflow = [0] * n
    outflow = [0] * n
    for (u, v), amount in flow.items():
        if (u, v) not in lpo.skeleton:
            problems.append(f"flow on non-skeleton arc {(u, v)}")
        if amount < 0:
            problems.append(f"negative flow on {(u, v)}")
        inflow[v] += amount
        outflow[u] += amount
    for v, label in enumerate(lpo.labels):
        produces, consumes = label in place.preset, label in place.postset
        if consumes and inflow[v] < 1:
            problems.append(f"node {v} receives no token")
        if label == END:
            continue
        expected = inflow[v] + (1 if produces and not consumes else 0) - (1 if consumes and not produces else 0)
        if outflow[v] != expected:
            problems.append(f"node {v} breaks the firing rule")
    return problems
