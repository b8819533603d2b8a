from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from strsimpy.normalized_levenshtein import NormalizedLevenshtein

from .bpmn_model import Node, NodeKind, ProcessGraph

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.5
_TIE_EPS = 1e-9

_levenshtein = NormalizedLevenshtein()

# Extension point: any symmetric (a, b) -> [0, 1] over normalized labels.
SimilarityFn = Callable[[str, str], float]


# ============================================================
# Data model
# ============================================================

@dataclass(frozen=True)
class MatchPair:
    candidate_id: str
    gold_id: str
    score: float


@dataclass(frozen=True)
class NodeMatching:
    """
    Partial injective correspondence between candidate and gold nodes.

    label_map rewrites normalized candidate task labels into the gold
    vocabulary; traces are compared after this rewrite.
    """
    pairs: Tuple[MatchPair, ...] = ()
    threshold: float = DEFAULT_THRESHOLD
    label_map: Dict[str, str] = field(default_factory=dict, compare=False, hash=False)

    @property
    def total_score(self) -> float:
        return float(sum(p.score for p in self.pairs))

    @property
    def id_map(self) -> Dict[str, str]:
        return {p.candidate_id: p.gold_id for p in self.pairs}

    def pair_ids(self) -> FrozenSet[Tuple[str, str]]:
        return frozenset((p.candidate_id, p.gold_id) for p in self.pairs)

    @classmethod
    def identity(cls, graph: ProcessGraph, threshold: float = DEFAULT_THRESHOLD) -> "NodeMatching":
        pairs = tuple(MatchPair(n.id, n.id, 1.0) for n in sorted(graph.nodes, key=lambda n: n.id))
        labels = {n.norm_label: n.norm_label for n in graph.nodes if n.kind is NodeKind.TASK and n.norm_label}
        return cls(pairs=pairs, threshold=threshold, label_map=labels)


# ============================================================
# Label similarity
# ============================================================

def label_similarity(a: str, b: str) -> float:
    """
    max(token-set Jaccard, 1 - normalized Levenshtein) on normalized labels.
    Empty labels never match by text.
    """
    if not a or not b:
        return 0.0
    ta, tb = set(a.split()), set(b.split())
    jaccard = len(ta & tb) / len(ta | tb) if (ta | tb) else 0.0
    lev = _levenshtein.similarity(a, b)
    return float(max(jaccard, lev))


# ============================================================
# Pair scoring
# ============================================================

def _compatible(a: NodeKind, b: NodeKind) -> bool:
    # Kinds are a closed enum; gateways only match the same gateway kind.
    return a is b


def _descriptor(node: Node) -> str:
    return node.norm_label or f"<{node.kind.value}>"


def _context_signature(graph: ProcessGraph, node: Node) -> Tuple:
    preds = sorted(_descriptor(graph.node_by_id[f.source]) for f in graph.incoming[node.id])
    succs = sorted(_descriptor(graph.node_by_id[f.target]) for f in graph.outgoing[node.id])
    return (node.kind.value, tuple(preds), tuple(succs))


def _pair_score(
    candidate: ProcessGraph,
    gold: ProcessGraph,
    c: Node,
    g: Node,
    kind_counts: Tuple[Counter, Counter],
    similarity: SimilarityFn,
) -> float:
    cl, gl = c.norm_label, g.norm_label
    if cl and gl:
        return similarity(cl, gl)

    # A labeled node never matches an unlabeled one.
    if cl or gl:
        return 0.0

    # Both unlabeled: structural anchors only.
    c_counts, g_counts = kind_counts
    if c.kind.is_event:
        return 1.0 if c_counts[c.kind] == 1 and g_counts[g.kind] == 1 else 0.0
    if _context_signature(candidate, c) == _context_signature(gold, g):
        return 1.0
    return 0.0


def score_matrix(
    candidate: ProcessGraph,
    gold: ProcessGraph,
    similarity: SimilarityFn = label_similarity,
) -> np.ndarray:
    """
    Kind-blocked similarity matrix; incompatible pairs are NaN.
    Rows follow candidate node order, columns gold node order.
    """
    c_counts = Counter(n.kind for n in candidate.nodes)
    g_counts = Counter(n.kind for n in gold.nodes)
    m = np.full((len(candidate.nodes), len(gold.nodes)), np.nan)
    for i, c in enumerate(candidate.nodes):
        for j, g in enumerate(gold.nodes):
            if _compatible(c.kind, g.kind):
                m[i, j] = _pair_score(candidate, gold, c, g, (c_counts, g_counts), similarity)
    return m


# ============================================================
# Optimal assignment
# ============================================================

def _solve(allowed: np.ndarray, scores: np.ndarray, fixed: Dict[int, Optional[int]]) -> Tuple[float, Dict[int, int]]:
    """
    Maximum-weight partial assignment via the Hungarian method.

    The matrix is padded with one "unmatched" slot per row and per column;
    forbidden cells get a penalty larger than any achievable gain.
    fixed pins rows to a column (int) or to unmatched (None).
    """
    n_c, n_g = scores.shape
    size = n_c + n_g
    forbidden = -(size + 1.0)

    w = np.full((size, size), forbidden)
    w[:n_c, :n_g] = np.where(allowed, scores, forbidden)
    for i in range(n_c):
        w[i, n_g + i] = 0.0
    for j in range(n_g):
        w[n_c + j, j] = 0.0
    w[n_c:, n_g:] = 0.0

    for i, col in fixed.items():
        keep = w[i, col] if col is not None else 0.0
        w[i, :] = forbidden
        if col is None:
            w[i, n_g + i] = 0.0
        else:
            w[i, col] = keep

    rows, cols = linear_sum_assignment(w, maximize=True)
    assignment: Dict[int, int] = {}
    total = 0.0
    for r, c in zip(rows, cols):
        if r < n_c and c < n_g:
            if not allowed[r, c]:
                return float("-inf"), {}
            assignment[int(r)] = int(c)
            total += float(scores[r, c])
        elif w[r, c] == forbidden:
            return float("-inf"), {}
    return total, assignment


def compute_node_matching(
    candidate: ProcessGraph,
    gold: ProcessGraph,
    threshold: float = DEFAULT_THRESHOLD,
    *,
    similarity: SimilarityFn = label_similarity,
) -> NodeMatching:
    """
    Optimal injective matching restricted to kind-compatible pairs with
    score >= threshold.

    Among equal-total matchings the lexicographically smallest sorted list
    of (candidate id, gold id) pairs wins.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")

    if not candidate.nodes or not gold.nodes:
        return NodeMatching(pairs=(), threshold=threshold)

    raw = score_matrix(candidate, gold, similarity)
    scores = np.nan_to_num(raw, nan=0.0)
    # Zero-score pairs never match, even at threshold 0.
    allowed = ~np.isnan(raw) & (scores > 0.0) & (scores >= threshold - _TIE_EPS)

    best, _ = _solve(allowed, scores, {})

    # Lexicographic refinement: pin candidates in id order to the smallest
    # gold id (then to "unmatched") that still attains the optimum.
    c_order = sorted(range(len(candidate.nodes)), key=lambda i: candidate.nodes[i].id)
    g_order = sorted(range(len(gold.nodes)), key=lambda j: gold.nodes[j].id)
    fixed: Dict[int, Optional[int]] = {}
    for i in c_order:
        options: List[Optional[int]] = [j for j in g_order if allowed[i, j] and j not in fixed.values()]
        options.append(None)
        for opt in options:
            total, _ = _solve(allowed, scores, {**fixed, i: opt})
            if total >= best - _TIE_EPS:
                fixed[i] = opt
                break

    pairs: List[MatchPair] = []
    label_map: Dict[str, str] = {}
    for i in c_order:
        j = fixed.get(i)
        if j is None:
            continue
        c, g = candidate.nodes[i], gold.nodes[j]
        pairs.append(MatchPair(c.id, g.id, float(scores[i, j])))
        if c.kind is NodeKind.TASK and c.norm_label and g.norm_label:
            label_map.setdefault(c.norm_label, g.norm_label)

    logger.debug("Matched %d/%d candidate nodes (threshold %.2f)", len(pairs), len(candidate.nodes), threshold)
    return NodeMatching(pairs=tuple(pairs), threshold=threshold, label_map=label_map)
