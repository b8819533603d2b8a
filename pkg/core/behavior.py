from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Set, Tuple

from .bpmn_model import Node, NodeKind, ProcessGraph
from .errors import NoStartEventError
from .matching import NodeMatching
from .quality_metrics import harmonic_mean

logger = logging.getLogger(__name__)

DEFAULT_LOOP_BOUND = 1
DEFAULT_MAX_TRACES = 10_000
DEFAULT_MAX_LEN = 64
DEFAULT_TOKEN_CAP = 64

Trace = Tuple[str, ...]


# ============================================================
# Data model
# ============================================================

@dataclass(frozen=True)
class ExecutionState:
    """
    One configuration of the token game.

    marking: sorted (flow id, tokens) pairs with tokens > 0
    fired:   sorted (node id, firings) pairs, for cycle unrolling
    """
    marking: Tuple[Tuple[str, int], ...]
    fired: Tuple[Tuple[str, int], ...]
    trace: Trace
    ended: bool

    @property
    def tokens(self) -> int:
        return sum(n for _f, n in self.marking)


@dataclass(frozen=True)
class TraceSet:
    traces: FrozenSet[Trace] = frozenset()
    truncated: bool = False
    deadlocks: int = 0

    def __len__(self) -> int:
        return len(self.traces)


@dataclass(frozen=True)
class TraceBounds:
    loop_bound: int = DEFAULT_LOOP_BOUND
    max_traces: int = DEFAULT_MAX_TRACES
    max_len: int = DEFAULT_MAX_LEN
    token_cap: int = DEFAULT_TOKEN_CAP

    def __post_init__(self):
        if self.loop_bound < 0 or self.max_traces < 1 or self.max_len < 1 or self.token_cap < 1:
            raise ValueError(f"Invalid trace bounds: {self}")


@dataclass
class _Tally:
    deadlocks: int = 0
    truncated: bool = False
    traces: Set[Trace] = field(default_factory=set)


# ============================================================
# Token game
# ============================================================

def _freeze(counter: Counter) -> Tuple[Tuple[str, int], ...]:
    return tuple(sorted((k, v) for k, v in counter.items() if v > 0))


def initial_state(graph: ProcessGraph) -> ExecutionState:
    """Every start event fires once, putting a token on each outgoing flow."""
    starts = graph.nodes_of_kind(NodeKind.START_EVENT)
    if not starts:
        raise NoStartEventError(f"Process {graph.id} has no start event")
    marking: Counter = Counter()
    fired: Counter = Counter()
    for s in starts:
        fired[s.id] += 1
        for f in graph.outgoing[s.id]:
            marking[f.id] += 1
    return ExecutionState(marking=_freeze(marking), fired=_freeze(fired), trace=(), ended=False)


def successors(graph: ProcessGraph, state: ExecutionState) -> Iterator[Tuple[Node, ExecutionState]]:
    """
    Enabled firings in node order, then incoming/outgoing flow order.

    Task and end event: consume one token from one incoming flow (tasks
    produce a token on every outgoing flow). Exclusive gateway: consume one
    token, produce on one chosen outgoing flow. Parallel gateway: consume one
    token from every incoming flow, produce on every outgoing flow.
    Start events never fire after initialization.
    """
    marking = dict(state.marking)
    fired = dict(state.fired)

    def build(node: Node, consume: List[str], produce: List[str]) -> ExecutionState:
        m = Counter(marking)
        for fid in consume:
            m[fid] -= 1
        for fid in produce:
            m[fid] += 1
        fc = Counter(fired)
        fc[node.id] += 1
        trace = state.trace + (node.norm_label,) if node.kind is NodeKind.TASK else state.trace
        ended = state.ended or node.kind is NodeKind.END_EVENT
        return ExecutionState(marking=_freeze(m), fired=_freeze(fc), trace=trace, ended=ended)

    for node in graph.nodes:
        if node.kind is NodeKind.START_EVENT:
            continue
        incoming = [f.id for f in graph.incoming[node.id]]
        outgoing = [f.id for f in graph.outgoing[node.id]]

        if node.kind is NodeKind.PARALLEL_GATEWAY:
            if incoming and all(marking.get(fid, 0) > 0 for fid in incoming):
                yield node, build(node, incoming, outgoing)
            continue

        for fid in incoming:
            if marking.get(fid, 0) <= 0:
                continue
            if node.kind is NodeKind.EXCLUSIVE_GATEWAY and outgoing:
                for out in outgoing:
                    yield node, build(node, [fid], [out])
            elif node.kind is NodeKind.END_EVENT:
                yield node, build(node, [fid], [])
            else:
                yield node, build(node, [fid], outgoing)


def enumerate_traces(
    graph: ProcessGraph,
    loop_bound: int = DEFAULT_LOOP_BOUND,
    max_traces: int = DEFAULT_MAX_TRACES,
    max_len: int = DEFAULT_MAX_LEN,
    *,
    token_cap: int = DEFAULT_TOKEN_CAP,
) -> TraceSet:
    """
    Exhaustive depth-first exploration of the token game.

    A run completes when no tokens remain and at least one end event fired.
    Runs that get stuck with tokens left (or that swallow every token without
    reaching an end event) are deadlocks and only counted. Each node fires at
    most loop_bound + 1 times; runs cut by that limit, by max_len or by the
    token cap, and an enumeration stopped at max_traces, set truncated.
    """
    bounds = TraceBounds(loop_bound=loop_bound, max_traces=max_traces, max_len=max_len, token_cap=token_cap)
    tally = _Tally()
    fire_limit = bounds.loop_bound + 1

    stack: List[ExecutionState] = [initial_state(graph)]
    visited: Set[ExecutionState] = set()

    while stack:
        if len(tally.traces) >= bounds.max_traces:
            tally.truncated = True
            break

        state = stack.pop()
        if state in visited:
            continue
        visited.add(state)

        if state.tokens > bounds.token_cap:
            tally.truncated = True
            continue

        children: List[ExecutionState] = []
        cut = False
        for node, nxt in successors(graph, state):
            if dict(nxt.fired)[node.id] > fire_limit or len(nxt.trace) > bounds.max_len:
                cut = True
                continue
            children.append(nxt)

        if cut:
            tally.truncated = True
        if children:
            # Reverse so the first enabled firing is explored first.
            stack.extend(reversed(children))
            continue

        if cut:
            continue
        if state.tokens == 0 and state.ended:
            tally.traces.add(state.trace)
        else:
            tally.deadlocks += 1

    if tally.deadlocks:
        logger.debug("Process %s: %d deadlocking runs discarded", graph.id, tally.deadlocks)

    return TraceSet(traces=frozenset(tally.traces), truncated=tally.truncated, deadlocks=tally.deadlocks)


# ============================================================
# Path inclusion measures
# ============================================================

def rewrite_trace(trace: Trace, label_map: Dict[str, str]) -> Trace:
    return tuple(label_map.get(label, label) for label in trace)


def rewrite_traces(traces: TraceSet, matching: NodeMatching) -> FrozenSet[Trace]:
    """Translate candidate labels into gold labels through the matching."""
    return frozenset(rewrite_trace(trace, matching.label_map) for trace in traces.traces)


def behavioral_recall(candidate_traces: TraceSet, gold_traces: TraceSet, matching: NodeMatching) -> float:
    """Share of gold paths the candidate reproduces; an empty gold set gives 1."""
    if not gold_traces.traces:
        return 1.0
    rewritten = rewrite_traces(candidate_traces, matching)
    return len(gold_traces.traces & rewritten) / len(gold_traces.traces)


def behavioral_precision(candidate_traces: TraceSet, gold_traces: TraceSet, matching: NodeMatching) -> float:
    """Share of candidate paths the gold permits; an empty candidate set gives 0."""
    if not candidate_traces.traces:
        return 0.0
    # Counted per candidate path, so paths merged by the rewrite each count.
    permitted = sum(
        1 for trace in candidate_traces.traces if rewrite_trace(trace, matching.label_map) in gold_traces.traces
    )
    return permitted / len(candidate_traces.traces)


def behavioral_f1(recall: float, precision: float) -> float:
    return harmonic_mean(recall, precision)
