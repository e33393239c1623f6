"""Core domain types: labeled partial orders, event logs, candidate places
and workflow nets, plus order normalization (closure and skeleton).
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

START = "▶"
END = "■"
RESERVED = frozenset({START, END})


class PoMinerError(Exception):
    """Base class for all errors raised by this package."""


class CycleError(PoMinerError):
    def __init__(self, cycle: Sequence[int], variant: int | None = None):
        self.cycle = tuple(cycle)
        self.variant = variant
        where = f"variant {variant}: " if variant is not None else ""
        path = " -> ".join(str(v) for v in (*self.cycle, self.cycle[0]))
        super().__init__(f"{where}order contains a cycle {path}")


class ReservedLabelError(PoMinerError):
    pass


def transition_key(name: str) -> tuple[int, str]:
    """Sort key placing ▶ first, ■ last and everything else by name."""
    if name == START:
        return (0, "")
    if name == END:
        return (2, "")
    return (1, name)


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _find_cycle(arcs: Iterable[tuple[int, int]], leftover: set[int]) -> list[int]:
    # every node Kahn's method leaves behind keeps a leftover predecessor
    pred: dict[int, int] = {}
    for u, v in sorted(arcs):
        if u in leftover and v in leftover:
            pred.setdefault(v, u)
    seen: dict[int, int] = {}
    walk: list[int] = []
    v = min(leftover)
    while v not in seen:
        seen[v] = len(walk)
        walk.append(v)
        v = pred[v]
    return walk[seen[v]:][::-1]


def normalize_order(
    n: int, raw_arcs: Iterable[tuple[int, int]]
) -> tuple[frozenset[tuple[int, int]], frozenset[tuple[int, int]]]:
    """Return ``(order, skeleton)`` for the relation generated by ``raw_arcs``.

    ``order`` is the transitive closure and ``skeleton`` its transitive
    reduction.  Both depend only on the closure of the input, so any two
    generating sets with the same closure normalize identically.
    """
    arcs = set()
    for u, v in raw_arcs:
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"arc ({u}, {v}) references a node outside 0..{n - 1}")
        if u == v:
            raise CycleError([u])
        arcs.add((u, v))

    succ: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for u, v in arcs:
        succ[u].append(v)
        indeg[v] += 1
    queue = deque(v for v in range(n) if indeg[v] == 0)
    topo: list[int] = []
    while queue:
        u = queue.popleft()
        topo.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    if len(topo) < n:
        leftover = set(range(n)) - set(topo)
        raise CycleError(_find_cycle(arcs, leftover))

    desc = [0] * n
    for u in reversed(topo):
        mask = 0
        for v in succ[u]:
            mask |= desc[v] | (1 << v)
        desc[u] = mask

    order = []
    skeleton = []
    for u in range(n):
        covered = 0
        for w in _bits(desc[u]):
            covered |= desc[w]
        for v in _bits(desc[u]):
            order.append((u, v))
        for v in _bits(desc[u] & ~covered):
            skeleton.append((u, v))
    return frozenset(order), frozenset(skeleton)


@dataclass(frozen=True)
class Lpo:
    """A labeled partial order over dense node ids ``0..n-1``.

    ``labels[v]`` is the activity of node ``v``.  ``order`` is the strict
    (transitively closed) relation and ``skeleton`` its transitive reduction.
    """

    labels: tuple[str, ...]
    order: frozenset[tuple[int, int]]
    skeleton: frozenset[tuple[int, int]]

    @classmethod
    def from_arcs(cls, labels: Sequence[str], arcs: Iterable[tuple[int, int]]) -> "Lpo":
        order, skeleton = normalize_order(len(labels), arcs)
        return cls(tuple(labels), order, skeleton)

    @classmethod
    def chain(cls, labels: Sequence[str]) -> "Lpo":
        return cls.from_arcs(labels, [(k, k + 1) for k in range(len(labels) - 1)])

    def __len__(self) -> int:
        return len(self.labels)

    @cached_property
    def topological_order(self) -> tuple[int, ...]:
        """Kahn's method over the skeleton, ties broken by smallest node id."""
        n = len(self.labels)
        indeg = [0] * n
        for _, v in self.skeleton:
            indeg[v] += 1
        heap = [v for v in range(n) if indeg[v] == 0]
        heapq.heapify(heap)
        out = []
        while heap:
            u = heapq.heappop(heap)
            out.append(u)
            for v in self.successors[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    heapq.heappush(heap, v)
        return tuple(out)

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        """Skeleton successors of every node, ascending."""
        succ: list[list[int]] = [[] for _ in self.labels]
        for u, v in self.skeleton:
            succ[u].append(v)
        return tuple(tuple(sorted(s)) for s in succ)

    @cached_property
    def predecessors(self) -> tuple[tuple[int, ...], ...]:
        pred: list[list[int]] = [[] for _ in self.labels]
        for u, v in self.skeleton:
            pred[v].append(u)
        return tuple(tuple(sorted(p)) for p in pred)

    @cached_property
    def position(self) -> tuple[int, ...]:
        """Index of every node in :attr:`topological_order`."""
        pos = [0] * len(self.labels)
        for k, v in enumerate(self.topological_order):
            pos[v] = k
        return tuple(pos)

    @cached_property
    def successors_by_position(self) -> tuple[tuple[int, ...], ...]:
        pos = self.position
        return tuple(tuple(sorted(s, key=pos.__getitem__)) for s in self.successors)

    @cached_property
    def predecessors_by_position(self) -> tuple[tuple[int, ...], ...]:
        """Skeleton predecessors, latest in the topological order first."""
        pos = self.position
        return tuple(
            tuple(sorted(p, key=pos.__getitem__, reverse=True)) for p in self.predecessors
        )

    def minimal(self) -> list[int]:
        return [v for v in range(len(self.labels)) if not self.predecessors[v]]

    def maximal(self) -> list[int]:
        return [v for v in range(len(self.labels)) if not self.successors[v]]


class ExtendedLpo(Lpo):
    """An Lpo whose node 0 is ▶ and whose last node is ■."""


@dataclass(frozen=True)
class Violation:
    invariant: str
    witness: tuple[int, ...] = ()

    def __str__(self) -> str:
        return f"{self.invariant} (witness {self.witness})"


def validate_lpo(lpo: Lpo) -> Violation | None:
    """Check every Lpo invariant; return the first violation or ``None``."""
    n = len(lpo.labels)
    for v, label in enumerate(lpo.labels):
        if not isinstance(label, str) or not label:
            return Violation("labeling not total", (v,))
    for rel, name in ((lpo.order, "order"), (lpo.skeleton, "skeleton")):
        for u, v in sorted(rel):
            if not (0 <= u < n and 0 <= v < n):
                return Violation(f"{name} references unknown node", (u, v))
    for u, v in sorted(lpo.order):
        if u == v:
            return Violation("not irreflexive", (u,))
    succ: dict[int, set[int]] = {v: set() for v in range(n)}
    for u, v in lpo.order:
        succ[u].add(v)
    for a in range(n):
        for b in sorted(succ[a]):
            for c in sorted(succ[b]):
                if c not in succ[a]:
                    return Violation("not transitive", (a, b, c))
    for u, v in sorted(lpo.order):
        if u in succ[v]:
            return Violation("not acyclic", (u, v))
    for u, v in sorted(lpo.skeleton):
        if (u, v) not in lpo.order:
            return Violation("skeleton not contained in order", (u, v))
    try:
        closure, _ = normalize_order(n, lpo.skeleton)
    except CycleError as exc:
        return Violation("not acyclic", exc.cycle)
    if closure != lpo.order:
        missing = sorted(lpo.order - closure)
        return Violation("skeleton closure differs from order", missing[0] if missing else ())
    for u, v in sorted(lpo.skeleton):
        for w in sorted(succ[u]):
            if v in succ[w]:
                return Violation("skeleton not reduced", (u, w, v))
    return None


@dataclass(frozen=True)
class EventLog:
    """A multiset of Lpo variants with case multiplicities."""

    alphabet: frozenset[str]
    variants: tuple[tuple[Lpo, int], ...]

    def __post_init__(self) -> None:
        for k, (lpo, count) in enumerate(self.variants):
            if count < 1:
                raise ValueError(f"variant {k} has multiplicity {count} < 1")
            unknown = {l for l in lpo.labels if l not in RESERVED} - self.alphabet
            if unknown:
                raise ValueError(f"variant {k} uses labels outside the alphabet: {sorted(unknown)}")

    @classmethod
    def from_variants(cls, variants: Iterable[tuple[Lpo, int]], alphabet: Iterable[str] = ()) -> "EventLog":
        variants = tuple(variants)
        names = set(alphabet)
        for lpo, _ in variants:
            names.update(l for l in lpo.labels if l not in RESERVED)
        return cls(frozenset(names), variants)

    @property
    def num_cases(self) -> int:
        return sum(count for _, count in self.variants)

    def __len__(self) -> int:
        return len(self.variants)


@dataclass(frozen=True, order=False)
class CandidatePlace:
    preset: frozenset[str]
    postset: frozenset[str]

    def __post_init__(self) -> None:
        if not self.preset or not self.postset:
            raise ValueError("candidate places need a non-empty preset and postset")
        if START in self.postset:
            raise ValueError(f"{START} cannot consume from a place")
        if END in self.preset:
            raise ValueError(f"{END} cannot produce into a place")

    @classmethod
    def of(cls, preset: Iterable[str], postset: Iterable[str]) -> "CandidatePlace":
        return cls(frozenset(preset), frozenset(postset))

    @property
    def size(self) -> int:
        return len(self.preset) + len(self.postset)

    def sort_key(self) -> tuple:
        return (
            self.size,
            tuple(sorted(map(transition_key, self.preset))),
            tuple(sorted(map(transition_key, self.postset))),
        )

    def __str__(self) -> str:
        pre = ", ".join(sorted(self.preset, key=transition_key))
        post = ", ".join(sorted(self.postset, key=transition_key))
        return f"({{{pre}}} | {{{post}}})"


@dataclass(frozen=True)
class WorkflowNet:
    """Transitions plus inner places; ``i`` feeds ▶ and ■ feeds ``o``.

    Places are kept deduplicated and in canonical order, so two nets with
    the same place set compare (and serialize) identically.
    """

    transitions: tuple[str, ...]
    places: tuple[CandidatePlace, ...] = field(default=())

    def __post_init__(self) -> None:
        transitions = tuple(sorted(set(self.transitions) | RESERVED, key=transition_key))
        places = tuple(sorted(set(self.places), key=CandidatePlace.sort_key))
        object.__setattr__(self, "transitions", transitions)
        object.__setattr__(self, "places", places)
        known = set(transitions)
        for p in places:
            missing = (p.preset | p.postset) - known
            if missing:
                raise ValueError(f"place {p} references unknown transitions {sorted(missing)}")

    @property
    def activities(self) -> tuple[str, ...]:
        return tuple(t for t in self.transitions if t not in RESERVED)

    def place_names(self) -> dict[CandidatePlace, str]:
        return {p: f"p{k}" for k, p in enumerate(self.places, start=1)}

    def arcs(self) -> list[tuple[str, str]]:
        """All arcs as (source, target) with places named i, o, p1..pn."""
        names = self.place_names()
        out = [("i", START)]
        for p in self.places:
            name = names[p]
            out.extend((t, name) for t in sorted(p.preset, key=transition_key))
            out.extend((name, t) for t in sorted(p.postset, key=transition_key))
        out.append((END, "o"))
        return out

    def disconnected_transitions(self) -> list[str]:
        """Transitions not on a directed path from ``i`` to ``o``."""
        fwd: dict[str, set[str]] = {}
        bwd: dict[str, set[str]] = {}
        for u, v in self.arcs():
            fwd.setdefault(u, set()).add(v)
            bwd.setdefault(v, set()).add(u)

        def reach(start: str, adj: dict[str, set[str]]) -> set[str]:
            seen = {start}
            stack = [start]
            while stack:
                for w in adj.get(stack.pop(), ()):
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            return seen

        on_path = reach("i", fwd) & reach("o", bwd)
        return [t for t in self.transitions if t not in on_path]
