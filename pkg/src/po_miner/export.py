"""Net post-processing, replay statistics and PNML / DOT serialization."""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from .log_io import FormatError, extend_log
from .model import END, START, CandidatePlace, EventLog, PoMinerError, WorkflowNet
from .tokenflow import LogVerdict, aggregate_verdicts

PNML_NS = "http://www.pnml.org/version-2009/grammar/pnml"
PTNET_TYPE = "http://www.pnml.org/version-2009/grammar/ptnet"


class AlphabetMismatchError(PoMinerError):
    pass


def dedupe_places(net: WorkflowNet) -> WorkflowNet:
    # WorkflowNet already canonicalizes; rebuilding makes that explicit for
    # nets whose places came from elsewhere
    return WorkflowNet(net.transitions, tuple(dict.fromkeys(net.places)))


@dataclass(frozen=True)
class ReplayReport:
    places: tuple[tuple[CandidatePlace, LogVerdict], ...]
    net_fitting_fraction: float
    disconnected_transitions: tuple[str, ...]
    num_cases: int

    def to_dict(self, net: WorkflowNet) -> dict:
        names = net.place_names()
        return {
            "num_cases": self.num_cases,
            "net_fitting_fraction": self.net_fitting_fraction,
            "disconnected_transitions": list(self.disconnected_transitions),
            "places": [
                {
                    "id": names[place],
                    "preset": _ordered(place.preset, net),
                    "postset": _ordered(place.postset, net),
                    "fitting_fraction": verdict.fitting_fraction,
                    "not_underfed_fraction": verdict.not_underfed_fraction,
                    "not_overfed_fraction": verdict.not_overfed_fraction,
                }
                for place, verdict in self.places
            ],
        }

    def to_json(self, net: WorkflowNet) -> bytes:
        return (json.dumps(self.to_dict(net), ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def _ordered(transitions, net: WorkflowNet) -> list[str]:
    rank = {t: k for k, t in enumerate(net.transitions)}
    return sorted(transitions, key=rank.__getitem__)


def replay_statistics(net: WorkflowNet, log: EventLog) -> ReplayReport:
    missing = log.alphabet - set(net.transitions)
    if missing:
        raise AlphabetMismatchError(f"log activities without a transition: {sorted(missing)}")
    elog = extend_log(log)
    scored = tuple((place, aggregate_verdicts(place, elog)) for place in net.places)
    total = log.num_cases
    fitting_cases = sum(
        count
        for k, (_, count) in enumerate(log.variants)
        if all(verdict.verdicts[k].fitting for _, verdict in scored)
    )
    return ReplayReport(
        places=scored,
        net_fitting_fraction=fitting_cases / total if total else 1.0,
        disconnected_transitions=tuple(net.disconnected_transitions()),
        num_cases=total,
    )


def _transition_ids(net: WorkflowNet) -> dict[str, str]:
    return {t: f"t{k}" for k, t in enumerate(net.transitions)}


def export_dot(net: WorkflowNet) -> bytes:
    def quote(text: str) -> str:
        return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'

    tids = _transition_ids(net)
    places = ["i", *net.place_names().values(), "o"]
    lines = ["digraph workflow_net {", "  rankdir=LR;"]
    for name in places:
        lines.append(f"  {quote(name)} [shape=circle, label={quote(name)}];")
    for t in net.transitions:
        lines.append(f"  {quote(tids[t])} [shape=box, label={quote(t)}];")
    for src, dst in net.arcs():
        lines.append(f"  {quote(tids.get(src, src))} -> {quote(tids.get(dst, dst))};")
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _named(parent: ET.Element, tag: str, ident: str, name: str) -> ET.Element:
    element = ET.SubElement(parent, tag, id=ident)
    ET.SubElement(ET.SubElement(element, "name"), "text").text = name
    return element


def export_pnml(net: WorkflowNet, name: str = "discovered") -> bytes:
    root = ET.Element("pnml", xmlns=PNML_NS)
    xnet = ET.SubElement(root, "net", id="net1", type=PTNET_TYPE)
    ET.SubElement(ET.SubElement(xnet, "name"), "text").text = name
    page = ET.SubElement(xnet, "page", id="page1")
    source = _named(page, "place", "i", "i")
    ET.SubElement(ET.SubElement(source, "initialMarking"), "text").text = "1"
    for place, ident in net.place_names().items():
        _named(page, "place", ident, ident)
    _named(page, "place", "o", "o")
    tids = _transition_ids(net)
    for t in net.transitions:
        _named(page, "transition", tids[t], t)
    for k, (src, dst) in enumerate(net.arcs()):
        ET.SubElement(page, "arc", id=f"a{k}", source=tids.get(src, src), target=tids.get(dst, dst))
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def export_net(net: WorkflowNet, fmt: str) -> bytes:
    if fmt == "dot":
        return export_dot(net)
    if fmt == "pnml":
        return export_pnml(net)
    raise ValueError(f"unknown export format {fmt!r}")


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _text_of(element: ET.Element) -> str | None:
    for child in element:
        if _local(child.tag) == "name":
            for text in child:
                if _local(text.tag) == "text":
                    return (text.text or "").strip()
    return None


def read_pnml(data: bytes | str) -> WorkflowNet:
    """Read a PNML workflow net that carries ▶/■ transitions.

    The source place is the one with an initial token (or id ``i``); the
    sink place is the one fed only by ■.  Every other place becomes a
    candidate place given by its preset and postset labels.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise FormatError(f"invalid PNML: {exc}") from None
    places: dict[str, ET.Element] = {}
    labels: dict[str, str] = {}
    arcs: list[tuple[str, str]] = []
    for element in root.iter():
        tag = _local(element.tag)
        ident = element.get("id")
        if tag == "place":
            places[ident] = element
        elif tag == "transition":
            labels[ident] = _text_of(element) or ident
        elif tag == "arc":
            arcs.append((element.get("source"), element.get("target")))
    if START not in labels.values() or END not in labels.values():
        raise FormatError(f"PNML net needs {START} and {END} transitions")

    pre: dict[str, set[str]] = {p: set() for p in places}
    post: dict[str, set[str]] = {p: set() for p in places}
    for src, dst in arcs:
        if src in labels and dst in places:
            pre[dst].add(labels[src])
        elif src in places and dst in labels:
            post[src].add(labels[dst])
        else:
            raise FormatError(f"arc {src} -> {dst} does not join a place and a transition")

    def marked(element: ET.Element) -> bool:
        for child in element:
            if _local(child.tag) == "initialMarking":
                return any((t.text or "").strip() not in ("", "0") for t in child)
        return False

    inner = []
    for ident, element in places.items():
        if marked(element) or ident == "i" and not pre[ident]:
            if pre[ident] or post[ident] != {START}:
                raise FormatError(f"source place {ident} must feed exactly {START}")
            continue
        if pre[ident] == {END} and not post[ident]:
            continue
        try:
            inner.append(CandidatePlace(frozenset(pre[ident]), frozenset(post[ident])))
        except ValueError as exc:
            raise FormatError(f"place {ident}: {exc}") from None
    return WorkflowNet(tuple(set(labels.values())), tuple(inner))
