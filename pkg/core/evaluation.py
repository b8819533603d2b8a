from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Dict, List, Sequence, Tuple

from .behavior import TraceSet, behavioral_f1, behavioral_precision, behavioral_recall, enumerate_traces
from .bpmn_model import ProcessGraph
from .config import EvalConfig
from .errors import BudgetExceededError, NoStartEventError
from .matching import compute_node_matching
from .quality_metrics import (
    EditDistanceResult,
    concept_precision_recall,
    ged_approx,
    ged_exact,
    ged_similarity,
    quality_score,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricComponents:
    matched_pairs: int
    concept_precision: float
    concept_recall: float
    concept_f1: float
    ged_distance: float
    ged_exact: bool
    ged_similarity: float
    candidate_traces: int
    gold_traces: int
    traces_truncated: bool
    behavioral_recall: float
    behavioral_precision: float
    behavioral_f1: float
    quality: float
    diagnostics: Tuple[str, ...] = ()

    def as_dict(self) -> Dict[str, object]:
        d = asdict(self)
        d["diagnostics"] = list(self.diagnostics)
        return d


def _traces(graph: ProcessGraph, cfg: EvalConfig) -> TraceSet:
    b = cfg.bounds
    return enumerate_traces(graph, b.loop_bound, b.max_traces, b.max_len, token_cap=b.token_cap)


def evaluate_candidate(candidate: ProcessGraph, gold: ProcessGraph, eval_config: EvalConfig) -> MetricComponents:
    """
    matching -> concept P/R -> GED -> traces on both sides -> behavioral
    recall/precision -> quality. Deterministic for fixed inputs.
    """
    cfg = eval_config
    diagnostics: List[str] = []

    matching = compute_node_matching(candidate, gold, cfg.threshold)
    pr = concept_precision_recall(matching, candidate, gold)

    ged: EditDistanceResult
    try:
        ged = ged_exact(candidate, gold, cfg.costs, cfg.node_budget)
    except BudgetExceededError as e:
        diagnostics.append(f"approximate GED: {e}")
        ged = ged_approx(candidate, gold, cfg.costs, matching)
    ged_sim = ged_similarity(ged, candidate, gold, cfg.costs)

    b_recall = b_precision = 0.0
    n_cand = n_gold = 0
    truncated = False
    try:
        gold_traces = _traces(gold, cfg)
        cand_traces = _traces(candidate, cfg)
    except NoStartEventError as e:
        diagnostics.append(f"behavior scored 0: {e}")
    else:
        n_cand, n_gold = len(cand_traces), len(gold_traces)
        truncated = cand_traces.truncated or gold_traces.truncated
        if truncated:
            diagnostics.append("trace enumeration truncated")
        if cand_traces.deadlocks:
            diagnostics.append(f"candidate has {cand_traces.deadlocks} deadlocking runs")
        b_recall = behavioral_recall(cand_traces, gold_traces, matching)
        b_precision = behavioral_precision(cand_traces, gold_traces, matching)
    b_f1 = behavioral_f1(b_recall, b_precision)

    quality = quality_score(pr, ged_sim, b_f1, cfg.weights)
    logger.debug("Evaluated %s vs %s: quality %.4f", candidate.id, gold.id, quality)

    return MetricComponents(
        matched_pairs=len(matching.pairs),
        concept_precision=pr.precision,
        concept_recall=pr.recall,
        concept_f1=pr.f1,
        ged_distance=ged.distance,
        ged_exact=ged.exact,
        ged_similarity=ged_sim,
        candidate_traces=n_cand,
        gold_traces=n_gold,
        traces_truncated=truncated,
        behavioral_recall=b_recall,
        behavioral_precision=b_precision,
        behavioral_f1=b_f1,
        quality=quality,
        diagnostics=tuple(diagnostics),
    )


def evaluate_against_golds(
    candidate: ProcessGraph,
    golds: Sequence[ProcessGraph],
    eval_config: EvalConfig,
) -> Tuple[int, List[MetricComponents]]:
    """Score against every gold model; the best is the first with maximal quality."""
    if not golds:
        raise ValueError("No gold model to compare against")
    components = [evaluate_candidate(candidate, g, eval_config) for g in golds]
    best = max(range(len(components)), key=lambda i: (components[i].quality, -i))
    return best, components
