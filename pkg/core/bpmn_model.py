from __future__ import annotations

import logging
import re
import unicodedata
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Set, Tuple

from lxml import etree

from .errors import (
    DanglingReferenceError,
    DuplicateIdError,
    MalformedXmlError,
    UnsupportedElementError,
)

logger = logging.getLogger(__name__)

BPMN_NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"


# ============================================================
# Data model (authoritative)
# ============================================================

class NodeKind(str, Enum):
    """Supported node kinds. Values are the BPMN local element names."""
    START_EVENT = "startEvent"
    END_EVENT = "endEvent"
    TASK = "task"
    EXCLUSIVE_GATEWAY = "exclusiveGateway"
    PARALLEL_GATEWAY = "parallelGateway"

    @property
    def is_gateway(self) -> bool:
        return self in (NodeKind.EXCLUSIVE_GATEWAY, NodeKind.PARALLEL_GATEWAY)

    @property
    def is_event(self) -> bool:
        return self in (NodeKind.START_EVENT, NodeKind.END_EVENT)


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    label: str = ""

    @property
    def norm_label(self) -> str:
        return normalize_label(self.label)


@dataclass(frozen=True)
class SequenceFlow:
    id: str
    source: str
    target: str


@dataclass(frozen=True)
class ProcessGraph:
    """
    Directed attributed graph of BPMN nodes and sequence flows.

    Node and flow order follow document order. Self-loops and parallel
    flows between the same pair of nodes are representable.
    """
    id: str
    nodes: Tuple[Node, ...] = ()
    flows: Tuple[SequenceFlow, ...] = ()

    def __post_init__(self):
        seen: Set[str] = set()
        for n in self.nodes:
            if not n.id:
                raise MalformedXmlError("Node with empty id")
            if n.id in seen:
                raise DuplicateIdError(n.id)
            seen.add(n.id)

        flow_ids: Set[str] = set()
        for f in self.flows:
            if f.id in flow_ids:
                raise DuplicateIdError(f.id)
            flow_ids.add(f.id)
            for ref in (f.source, f.target):
                if ref not in seen:
                    raise DanglingReferenceError(ref, f.id)

    @cached_property
    def node_by_id(self) -> Dict[str, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def outgoing(self) -> Dict[str, List[SequenceFlow]]:
        out: Dict[str, List[SequenceFlow]] = {n.id: [] for n in self.nodes}
        for f in self.flows:
            out[f.source].append(f)
        return out

    @cached_property
    def incoming(self) -> Dict[str, List[SequenceFlow]]:
        inc: Dict[str, List[SequenceFlow]] = {n.id: [] for n in self.nodes}
        for f in self.flows:
            inc[f.target].append(f)
        return inc

    def nodes_of_kind(self, kind: NodeKind) -> List[Node]:
        return [n for n in self.nodes if n.kind is kind]


class ViolationKind(str, Enum):
    NO_START_EVENT = "NoStartEvent"
    NO_END_EVENT = "NoEndEvent"
    UNREACHABLE_NODE = "UnreachableNode"
    DEAD_END_NODE = "DeadEndNode"
    GATEWAY_DEGENERATE = "GatewayDegenerate"
    START_HAS_INCOMING = "StartHasIncoming"
    END_HAS_OUTGOING = "EndHasOutgoing"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    element_id: str
    message: str


@dataclass(frozen=True)
class SyntaxReport:
    violations: Tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def deficit_count(self) -> int:
        return len(self.violations)

    def kinds(self) -> List[ViolationKind]:
        return [v.kind for v in self.violations]


# ============================================================
# Normalization
# ============================================================

_NON_WORD_RE = re.compile(r"[\W_]+")
_XML_DECL_RE = re.compile(r"^\s*<\?xml[^>]*\?>")


def normalize_label(raw: str) -> str:
    """
    Canonical label key used by matching and traces.

    "Check  Invoice!"           -> "check invoice"
    "Send\\tOrder_Confirmation" -> "send order confirmation"
    """
    if not raw:
        return ""
    s = unicodedata.normalize("NFC", raw).lower()
    s = unicodedata.normalize("NFC", s)
    s = _NON_WORD_RE.sub(" ", s)
    return s.strip()


# ============================================================
# Parsing
# ============================================================

_NODE_TAGS: Dict[str, NodeKind] = {k.value: k for k in NodeKind}

# Skipped wherever they occur (layout and annotations).
_IGNORED_TAGS = {"BPMNDiagram", "documentation", "extensionElements"}

_NODE_CHILD_TAGS = {"incoming", "outgoing"}
_FLOW_CHILD_TAGS = {"conditionExpression"}


def _local_name(el) -> str:
    return etree.QName(el).localname


def _element_children(el):
    # Comments and processing instructions carry a non-string tag.
    return [c for c in el if isinstance(c.tag, str)]


def _require_id(el, local: str) -> str:
    el_id = (el.get("id") or "").strip()
    if not el_id:
        raise MalformedXmlError(f"<{local}> element without id")
    return el_id


def _check_children(el, local: str, allowed: Set[str]) -> None:
    for child in _element_children(el):
        name = _local_name(child)
        if name in _IGNORED_TAGS or name in allowed:
            continue
        raise UnsupportedElementError(name)


def _parse_process(process_el, graph_id: str) -> ProcessGraph:
    nodes: List[Node] = []
    flows: List[SequenceFlow] = []
    seen_ids: Set[str] = set()

    for el in _element_children(process_el):
        local = _local_name(el)
        if local in _IGNORED_TAGS:
            continue

        if local in _NODE_TAGS:
            node_id = _require_id(el, local)
            if node_id in seen_ids:
                raise DuplicateIdError(node_id)
            seen_ids.add(node_id)
            _check_children(el, local, _NODE_CHILD_TAGS)
            nodes.append(Node(id=node_id, kind=_NODE_TAGS[local], label=(el.get("name") or "").strip()))
            continue

        if local == "sequenceFlow":
            flow_id = _require_id(el, local)
            if flow_id in seen_ids:
                raise DuplicateIdError(flow_id)
            seen_ids.add(flow_id)
            _check_children(el, local, _FLOW_CHILD_TAGS)
            source = (el.get("sourceRef") or "").strip()
            target = (el.get("targetRef") or "").strip()
            if not source or not target:
                raise MalformedXmlError(f"sequenceFlow {flow_id} lacks sourceRef/targetRef")
            flows.append(SequenceFlow(id=flow_id, source=source, target=target))
            continue

        raise UnsupportedElementError(local)

    node_ids = {n.id for n in nodes}
    for f in flows:
        for ref in (f.source, f.target):
            if ref not in node_ids:
                raise DanglingReferenceError(ref, f.id)

    logger.debug("Parsed process %s: %d nodes, %d flows", graph_id, len(nodes), len(flows))
    return ProcessGraph(id=graph_id, nodes=tuple(nodes), flows=tuple(flows))


def parse_bpmn(xml_text: str) -> ProcessGraph:
    """
    Parse the supported BPMN 2.0 subset into a ProcessGraph.

    Element names are matched on their local name, so any namespace prefix
    (or none) is accepted. Exactly one `process` may be present.
    """
    text = (xml_text or "").lstrip("\ufeff")
    text = _XML_DECL_RE.sub("", text, count=1)

    parser = etree.XMLParser(resolve_entities=False, no_network=True, remove_comments=True)
    try:
        root = etree.fromstring(text, parser)
    except (etree.XMLSyntaxError, ValueError) as e:
        raise MalformedXmlError(f"Not well-formed XML: {e}") from e

    root_name = _local_name(root)
    if root_name == "process":
        return _parse_process(root, _require_id(root, root_name))

    if root_name != "definitions":
        raise UnsupportedElementError(root_name)

    processes = []
    for child in _element_children(root):
        name = _local_name(child)
        if name in _IGNORED_TAGS:
            continue
        if name != "process":
            raise UnsupportedElementError(name)
        processes.append(child)

    if len(processes) > 1:
        raise UnsupportedElementError("process")
    if not processes:
        return ProcessGraph(id=(root.get("id") or "process"))

    process_el = processes[0]
    graph_id = (process_el.get("id") or "").strip() or "process"
    return _parse_process(process_el, graph_id)


def parse_bpmn_file(path: str | Path) -> ProcessGraph:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"BPMN file not found: {path}")
    return parse_bpmn(p.read_text(encoding="utf-8"))


# ============================================================
# Serialization
# ============================================================

def serialize_bpmn(graph: ProcessGraph) -> str:
    """Canonical dump: nodes then flows, each sorted by id, two-space indentation."""
    root = etree.Element(f"{{{BPMN_NS}}}definitions", nsmap={None: BPMN_NS})
    root.set("id", "definitions")
    root.set("targetNamespace", "urn:bpmn-bench")

    process = etree.SubElement(root, f"{{{BPMN_NS}}}process")
    process.set("id", graph.id or "process")

    for node in sorted(graph.nodes, key=lambda n: n.id):
        el = etree.SubElement(process, f"{{{BPMN_NS}}}{node.kind.value}")
        el.set("id", node.id)
        if node.label:
            el.set("name", node.label)

    for flow in sorted(graph.flows, key=lambda f: f.id):
        el = etree.SubElement(process, f"{{{BPMN_NS}}}sequenceFlow")
        el.set("id", flow.id)
        el.set("sourceRef", flow.source)
        el.set("targetRef", flow.target)

    etree.indent(root, space="  ")
    body = etree.tostring(root, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"


# ============================================================
# Syntactic validation
# ============================================================

def _reachable_from_starts(graph: ProcessGraph) -> Set[str]:
    seen: Set[str] = set()
    queue = deque(n.id for n in graph.nodes_of_kind(NodeKind.START_EVENT))
    while queue:
        node_id = queue.popleft()
        if node_id in seen:
            continue
        seen.add(node_id)
        for f in graph.outgoing[node_id]:
            if f.target not in seen:
                queue.append(f.target)
    return seen


def validate_syntax(graph: ProcessGraph) -> SyntaxReport:
    """
    Count syntactic deficits. Never raises; one violation per rule breach.

    Rules (fixed list):
      - NoStartEvent / NoEndEvent (graph level)
      - UnreachableNode: not reachable from any start event
      - DeadEndNode: non-end node without outgoing flow
      - GatewayDegenerate: gateway with <=1 incoming AND <=1 outgoing flow
      - StartHasIncoming / EndHasOutgoing
    """
    violations: List[Violation] = []

    if not graph.nodes_of_kind(NodeKind.START_EVENT):
        violations.append(Violation(ViolationKind.NO_START_EVENT, graph.id, "Process has no start event"))
    if not graph.nodes_of_kind(NodeKind.END_EVENT):
        violations.append(Violation(ViolationKind.NO_END_EVENT, graph.id, "Process has no end event"))

    reachable = _reachable_from_starts(graph)

    for node in graph.nodes:
        n_in = len(graph.incoming[node.id])
        n_out = len(graph.outgoing[node.id])

        if node.id not in reachable:
            violations.append(Violation(ViolationKind.UNREACHABLE_NODE, node.id, f"{node.id} is not reachable from a start event"))

        if node.kind is not NodeKind.END_EVENT and n_out == 0:
            violations.append(Violation(ViolationKind.DEAD_END_NODE, node.id, f"{node.id} has no outgoing flow"))

        if node.kind.is_gateway and n_in <= 1 and n_out <= 1:
            violations.append(Violation(ViolationKind.GATEWAY_DEGENERATE, node.id, f"Gateway {node.id} neither splits nor joins"))

        if node.kind is NodeKind.START_EVENT and n_in > 0:
            violations.append(Violation(ViolationKind.START_HAS_INCOMING, node.id, f"Start event {node.id} has incoming flow"))

        if node.kind is NodeKind.END_EVENT and n_out > 0:
            violations.append(Violation(ViolationKind.END_HAS_OUTGOING, node.id, f"End event {node.id} has outgoing flow"))

    return SyntaxReport(violations=tuple(violations))


def empty_graph(graph_id: str = "empty") -> ProcessGraph:
    return ProcessGraph(id=graph_id)


def graph_from_edges(
    graph_id: str,
    nodes: List[Tuple[str, NodeKind, str]],
    edges: List[Tuple[str, str]],
    *,
    flow_prefix: str = "f",
) -> ProcessGraph:
    """Build a graph programmatically; flow ids are generated in edge order."""
    return ProcessGraph(
        id=graph_id,
        nodes=tuple(Node(id=i, kind=k, label=l) for i, k, l in nodes),
        flows=tuple(SequenceFlow(id=f"{flow_prefix}{idx}", source=s, target=t) for idx, (s, t) in enumerate(edges, start=1)),
    )

