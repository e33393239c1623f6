"""Deciding whether a candidate place is underfed and/or overfed for an Lpo.

Every decision works on compact tokenflows: token counts on the skeleton
arcs of a ▶/■-extended Lpo.  The overfed part is closed form (the final
marking does not depend on how tokens are distributed).  The underfed part
climbs a ladder: a negative final marking, a greedy forward distribution,
a greedy backward distribution of demands, and finally an exact max-flow.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .maxflow import FlowNetwork
from .model import CandidatePlace, EventLog, Lpo


class Stage(str, Enum):
    CLOSED_FORM = "closed_form"
    FORWARD = "forward"
    BACKWARD = "backward"
    MAXFLOW = "maxflow"


@dataclass(frozen=True)
class FlowAssignment:
    """One token (or, backward, demand) distribution on the skeleton arcs.

    ``satisfied[v]`` is False for a consumer that found no token (forward)
    or for a node where demands were stranded without a predecessor
    (backward); it is True everywhere else.
    """

    flow: Mapping[tuple[int, int], int]
    satisfied: tuple[bool, ...]
    choice_points: bool

    @property
    def all_satisfied(self) -> bool:
        return all(self.satisfied)


@dataclass(frozen=True)
class PlaceVerdict:
    underfed: bool
    overfed: bool
    final_marking: int
    decided_by: Stage

    @property
    def fitting(self) -> bool:
        return not self.underfed and not self.overfed


@dataclass(frozen=True)
class LogVerdict:
    fitting_fraction: float
    not_underfed_fraction: float
    not_overfed_fraction: float
    verdicts: tuple[PlaceVerdict, ...] = ()


def _roles(place: CandidatePlace, lpo: Lpo) -> tuple[list[bool], list[bool]]:
    pre, post = place.preset, place.postset
    return [l in pre for l in lpo.labels], [l in post for l in lpo.labels]


def final_marking(place: CandidatePlace, lpo: Lpo) -> int:
    """Tokens produced minus tokens consumed over the whole Lpo."""
    pre, post = place.preset, place.postset
    return sum((l in pre) - (l in post) for l in lpo.labels)


def _forward(prod, cons, lpo: Lpo, flow: dict | None = None) -> tuple[list[bool], bool]:
    succs = lpo.successors_by_position
    order = lpo.topological_order
    n = len(order)
    wants = [False] * n
    for v in reversed(order):
        wants[v] = cons[v] or any(wants[w] for w in succs[v])
    inflow = [0] * n
    satisfied = [True] * n
    choice = False
    for v in order:
        budget = inflow[v]
        if cons[v]:
            if budget:
                budget -= 1
            else:
                satisfied[v] = False
        if prod[v]:
            budget += 1
        outs = succs[v]
        if budget and outs:
            if len(outs) > 1:
                choice = True
            target = next((w for w in outs if wants[w]), outs[0])
            inflow[target] += budget
            if flow is not None:
                flow[(v, target)] += budget
    return satisfied, choice


def _backward(prod, cons, lpo: Lpo, flow: dict | None = None) -> tuple[list[bool], bool]:
    preds = lpo.predecessors_by_position
    order = lpo.topological_order
    n = len(order)
    supplies = [False] * n
    for v in order:
        supplies[v] = prod[v] or any(supplies[u] for u in preds[v])
    demand = [0] * n
    satisfied = [True] * n
    choice = False
    for v in reversed(order):
        budget = demand[v]
        # a producer settles one demand of a later node, never its own
        if prod[v] and budget:
            budget -= 1
        if cons[v]:
            budget += 1
        ins = preds[v]
        if not budget:
            continue
        if not ins:
            satisfied[v] = False
            continue
        if len(ins) > 1:
            choice = True
        target = next((u for u in ins if supplies[u]), ins[0])
        demand[target] += budget
        if flow is not None:
            flow[(target, v)] += budget
    return satisfied, choice


def forward_pass(place: CandidatePlace, lpo: Lpo) -> FlowAssignment:
    """Greedily route every token towards the earliest successor that can use it.

    Nodes are visited in the Lpo's topological order.  A consumer takes one
    token if it has one; whatever is left plus its own production is pushed
    along a single outgoing skeleton arc.  ``choice_points`` records whether
    any non-empty budget had more than one arc to choose from.
    """
    prod, cons = _roles(place, lpo)
    flow = dict.fromkeys(sorted(lpo.skeleton), 0)
    satisfied, choice = _forward(prod, cons, lpo, flow)
    return FlowAssignment(flow, tuple(satisfied), choice)


def backward_pass(place: CandidatePlace, lpo: Lpo) -> FlowAssignment:
    """Mirror of :func:`forward_pass` that routes demands towards producers."""
    prod, cons = _roles(place, lpo)
    flow = dict.fromkeys(sorted(lpo.skeleton), 0)
    satisfied, choice = _backward(prod, cons, lpo, flow)
    return FlowAssignment(flow, tuple(satisfied), choice)


def _maxflow_underfed(prod, cons, lpo: Lpo) -> bool:
    demand = sum(cons)
    supply = sum(prod)
    if demand == 0:
        return False
    if supply < demand:
        return True
    n = len(lpo.labels)
    # 0 = source, 1 = sink, 2v+2 = v_in, 2v+3 = v_out
    net = FlowNetwork(2 * n + 2)
    for v in range(n):
        net.add_edge(2 * v + 2, 2 * v + 3, supply)
        if prod[v]:
            net.add_edge(0, 2 * v + 3, 1)
        if cons[v]:
            net.add_edge(2 * v + 2, 1, 1)
    for u, v in lpo.skeleton:
        net.add_edge(2 * u + 3, 2 * v + 2, supply)
    return net.max_flow(0, 1, limit=demand) < demand


def maxflow_classify(place: CandidatePlace, lpo: Lpo) -> bool:
    """Exact underfed test: can every consumer get a token from an earlier producer?

    Nodes are split into in/out halves so a node's own production only
    reaches its successors; unit source and sink edges model production
    and consumption.  Returns True iff the place is underfed.
    """
    prod, cons = _roles(place, lpo)
    return _maxflow_underfed(prod, cons, lpo)


def classify_lpo(place: CandidatePlace, lpo: Lpo) -> PlaceVerdict:
    prod, cons = _roles(place, lpo)
    fm = sum(prod) - sum(cons)
    overfed = fm > 0
    if fm < 0:
        return PlaceVerdict(True, overfed, fm, Stage.CLOSED_FORM)
    for stage, greedy in ((Stage.FORWARD, _forward), (Stage.BACKWARD, _backward)):
        satisfied, choice = greedy(prod, cons, lpo)
        if all(satisfied):
            return PlaceVerdict(False, overfed, fm, stage)
        if not choice:
            return PlaceVerdict(True, overfed, fm, stage)
    return PlaceVerdict(_maxflow_underfed(prod, cons, lpo), overfed, fm, Stage.MAXFLOW)


def aggregate_verdicts(place: CandidatePlace, log: EventLog) -> LogVerdict:
    """Case-weighted fractions of fitting, not underfed and not overfed variants.

    ``log`` must already be extended with ▶/■.
    """
    total = log.num_cases
    verdicts = tuple(classify_lpo(place, lpo) for lpo, _ in log.variants)
    if total == 0:
        return LogVerdict(1.0, 1.0, 1.0, verdicts)
    fitting = not_underfed = not_overfed = 0
    for verdict, (_, count) in zip(verdicts, log.variants):
        if not verdict.underfed:
            not_underfed += count
        if not verdict.overfed:
            not_overfed += count
        if verdict.fitting:
            fitting += count
    return LogVerdict(fitting / total, not_underfed / total, not_overfed / total, verdicts)
