from __future__ import annotations

import heapq
import itertools
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .bpmn_model import Node, NodeKind, ProcessGraph
from .errors import BudgetExceededError
from .matching import NodeMatching

logger = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 12


# ============================================================
# Data model
# ============================================================

@dataclass(frozen=True)
class PrecisionRecall:
    precision: float
    recall: float

    @property
    def f1(self) -> float:
        return harmonic_mean(self.precision, self.recall)


@dataclass(frozen=True)
class EditCostModel:
    node_insert: float = 1.0
    node_delete: float = 1.0
    node_substitute: float = 1.0
    edge_insert: float = 1.0
    edge_delete: float = 1.0

    def __post_init__(self):
        for name in ("node_insert", "node_delete", "node_substitute", "edge_insert", "edge_delete"):
            if not getattr(self, name) > 0:
                raise ValueError(f"EditCostModel.{name} must be > 0")


@dataclass(frozen=True)
class EditOperation:
    kind: str   # node_substitute | node_delete | node_insert | edge_delete | edge_insert
    candidate_ref: str
    gold_ref: str
    cost: float


@dataclass(frozen=True)
class EditDistanceResult:
    distance: float
    script: Tuple[EditOperation, ...]
    exact: bool


@dataclass(frozen=True)
class QualityWeights:
    w_pr: float = 1.0 / 3.0
    w_ged: float = 1.0 / 3.0
    w_behavior: float = 1.0 / 3.0

    def __post_init__(self):
        parts = (self.w_pr, self.w_ged, self.w_behavior)
        if any(p < 0 for p in parts):
            raise ValueError("Quality weights must be non-negative")
        if abs(sum(parts) - 1.0) > 1e-9:
            raise ValueError(f"Quality weights must sum to 1, got {sum(parts)}")


def harmonic_mean(a: float, b: float) -> float:
    if a + b <= 0:
        return 0.0
    return 2.0 * a * b / (a + b)


# ============================================================
# Concept precision / recall
# ============================================================

def concept_precision_recall(matching: NodeMatching, candidate: ProcessGraph, gold: ProcessGraph) -> PrecisionRecall:
    """Concepts are nodes; an empty side scores 0 rather than undefined."""
    matched = len(matching.pairs)
    precision = matched / len(candidate.nodes) if candidate.nodes else 0.0
    recall = matched / len(gold.nodes) if gold.nodes else 0.0
    return PrecisionRecall(precision=precision, recall=recall)


# ============================================================
# Edit scripts
# ============================================================

def _content(n: Node) -> Tuple[NodeKind, str]:
    return n.kind, n.norm_label


def _same_content(c: Node, g: Node) -> bool:
    return c.kind is g.kind and c.norm_label == g.norm_label


def edit_script_for_mapping(
    candidate: ProcessGraph,
    gold: ProcessGraph,
    mapping: Dict[str, str],
    costs: EditCostModel,
) -> List[EditOperation]:
    """
    Edit script turning candidate into gold under a node mapping.

    mapping holds candidate id -> gold id for kind-compatible pairs; every
    other candidate node is deleted and every other gold node inserted.
    Flows are reconciled as (source, target) multisets under the mapping.
    """
    ops: List[EditOperation] = []

    for c in candidate.nodes:
        g_id = mapping.get(c.id)
        if g_id is None:
            ops.append(EditOperation("node_delete", c.id, "", costs.node_delete))
        elif not _same_content(c, gold.node_by_id[g_id]):
            ops.append(EditOperation("node_substitute", c.id, g_id, costs.node_substitute))

    used = set(mapping.values())
    for g in gold.nodes:
        if g.id not in used:
            ops.append(EditOperation("node_insert", "", g.id, costs.node_insert))

    available: Dict[Tuple[str, str], List[str]] = defaultdict(list)
    for f in gold.flows:
        available[(f.source, f.target)].append(f.id)

    for f in candidate.flows:
        key = (mapping.get(f.source), mapping.get(f.target))
        if None not in key and available.get(key):
            available[key].pop(0)
            continue
        ops.append(EditOperation("edge_delete", f.id, "", costs.edge_delete))

    leftover = {fid for ids in available.values() for fid in ids}
    for f in gold.flows:
        if f.id in leftover:
            ops.append(EditOperation("edge_insert", "", f.id, costs.edge_insert))

    return ops


def _result(ops: List[EditOperation], exact: bool) -> EditDistanceResult:
    return EditDistanceResult(distance=float(sum(op.cost for op in ops)), script=tuple(ops), exact=exact)


# ============================================================
# Exact GED (A*)
# ============================================================

class _ExactSearch:
    """
    A* over partial node assignments.

    Candidate nodes are assigned in document order, each to an unused
    gold node of any kind or to deletion. Edge costs are charged as soon
    as both endpoints of a candidate/gold pair are decided; the completion
    step inserts the unused gold nodes and their flows.
    """

    def __init__(self, candidate: ProcessGraph, gold: ProcessGraph, costs: EditCostModel):
        self.c = candidate
        self.g = gold
        self.costs = costs
        self.c_ids = [n.id for n in candidate.nodes]
        self.c_nodes = list(candidate.nodes)
        self.g_nodes = list(gold.nodes)
        self.c_edges = Counter((f.source, f.target) for f in candidate.flows)
        self.g_edges = Counter((f.source, f.target) for f in gold.flows)
        self.c_pos = {nid: i for i, nid in enumerate(self.c_ids)}

    # -- cost pieces ---------------------------------------------------

    def _node_cost(self, c: Node, g: Optional[Node]) -> float:
        if g is None:
            return self.costs.node_delete
        return 0.0 if _same_content(c, g) else self.costs.node_substitute

    def _edge_cost(self, k: int, assign: Tuple[Optional[str], ...]) -> float:
        """Edges between candidate node k and already-decided nodes (<= k)."""
        u = self.c_ids[k]
        total = 0.0
        for j in range(k + 1):
            v = self.c_ids[j]
            pairs = [(u, v)] if j == k else [(u, v), (v, u)]
            for a, b in pairs:
                mc = self.c_edges.get((a, b), 0)
                ga, gb = assign[self.c_pos[a]], assign[self.c_pos[b]]
                mg = self.g_edges.get((ga, gb), 0) if ga is not None and gb is not None else 0
                if mc > mg:
                    total += (mc - mg) * self.costs.edge_delete
                elif mg > mc:
                    total += (mg - mc) * self.costs.edge_insert
        return total

    def _completion_cost(self, used: frozenset) -> float:
        unused_nodes = sum(1 for n in self.g_nodes if n.id not in used)
        unused_edges = sum(m for (s, t), m in self.g_edges.items() if s not in used or t not in used)
        return unused_nodes * self.costs.node_insert + unused_edges * self.costs.edge_insert

    def _heuristic(self, k: int, used: frozenset) -> float:
        """
        Lower bound on the remaining cost.

        Unresolved nodes with identical content pair up for free; the rest
        pair by substitution while that beats delete plus insert, and the
        surplus side is deleted or inserted. Flows add the surplus of
        undecided candidate flows over undecided gold flows (either way).
        """
        costs = self.costs
        rest_c = Counter(_content(n) for n in self.c_nodes[k:])
        rest_g = Counter(_content(n) for n in self.g_nodes if n.id not in used)
        free = sum((rest_c & rest_g).values())
        rc = len(self.c_nodes) - k - free
        rg = len(self.g_nodes) - len(used) - free
        paired = min(rc, rg) if costs.node_substitute < costs.node_delete + costs.node_insert else 0
        h = paired * costs.node_substitute + (rc - paired) * costs.node_delete + (rg - paired) * costs.node_insert

        decided = set(self.c_ids[:k])
        ec = sum(m for (s, t), m in self.c_edges.items() if s not in decided or t not in decided)
        eg = sum(m for (s, t), m in self.g_edges.items() if s not in used or t not in used)
        if ec > eg:
            h += (ec - eg) * self.costs.edge_delete
        elif eg > ec:
            h += (eg - ec) * self.costs.edge_insert
        return h

    # -- search --------------------------------------------------------

    def run(self) -> Dict[str, str]:
        n = len(self.c_ids)
        counter = itertools.count()
        start: Tuple[Optional[str], ...] = ()
        heap = [(self._heuristic(0, frozenset()), 0, next(counter), 0.0, start, frozenset(), False)]
        expanded = 0

        while heap:
            _f, _neg_depth, _tie, g_cost, assign, used, complete = heapq.heappop(heap)
            if complete:
                logger.debug("Exact GED: %d states expanded, distance %.4f", expanded, g_cost)
                return {self.c_ids[i]: gid for i, gid in enumerate(assign) if gid is not None}

            expanded += 1
            k = len(assign)
            if k == n:
                total = g_cost + self._completion_cost(used)
                heapq.heappush(heap, (total, -k - 1, next(counter), total, assign, used, True))
                continue

            c_node = self.c_nodes[k]
            options: List[Optional[Node]] = [g for g in self.g_nodes if g.id not in used]
            options.append(None)
            for g_node in options:
                new_assign = assign + ((g_node.id if g_node else None),)
                new_used = used | {g_node.id} if g_node else used
                step = self._node_cost(c_node, g_node) + self._edge_cost(k, new_assign)
                g_new = g_cost + step
                f_new = g_new + self._heuristic(k + 1, new_used)
                heapq.heappush(heap, (f_new, -(k + 1), next(counter), g_new, new_assign, new_used, False))

        return {}


def ged_exact(
    candidate: ProcessGraph,
    gold: ProcessGraph,
    costs: EditCostModel,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> EditDistanceResult:
    """Exact minimum-cost edit distance; a substitution may change kind and label."""
    total_nodes = len(candidate.nodes) + len(gold.nodes)
    if total_nodes > node_budget:
        raise BudgetExceededError(f"Exact GED needs {total_nodes} nodes, budget is {node_budget}")

    mapping = _ExactSearch(candidate, gold, costs).run()
    return _result(edit_script_for_mapping(candidate, gold, mapping, costs), exact=True)


def ged_approx(
    candidate: ProcessGraph,
    gold: ProcessGraph,
    costs: EditCostModel,
    matching: NodeMatching,
) -> EditDistanceResult:
    """Upper bound induced by the node matching."""
    return _result(edit_script_for_mapping(candidate, gold, matching.id_map, costs), exact=False)


def ged_similarity(
    result: EditDistanceResult,
    candidate: ProcessGraph,
    gold: ProcessGraph,
    costs: EditCostModel,
) -> float:
    """1 - distance / worst case (delete all of candidate, insert all of gold)."""
    worst = (
        len(candidate.nodes) * costs.node_delete
        + len(candidate.flows) * costs.edge_delete
        + len(gold.nodes) * costs.node_insert
        + len(gold.flows) * costs.edge_insert
    )
    if worst <= 0:
        return 1.0
    return min(1.0, max(0.0, 1.0 - result.distance / worst))


# ============================================================
# Scalar quality
# ============================================================

def quality_score(pr: PrecisionRecall, ged_sim: float, behavior_f1: float, weights: QualityWeights) -> float:
    score = weights.w_pr * pr.f1 + weights.w_ged * ged_sim + weights.w_behavior * behavior_f1
    return min(1.0, max(0.0, score))
