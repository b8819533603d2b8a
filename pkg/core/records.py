from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .bpmn_model import SyntaxReport
from .economics import MetricPoint, RunStats, TokenUsage, aggregate_runs
from .evaluation import MetricComponents

PARSE_OK = "ok"
PARSE_FAILURE_NOTE = "parse failure"


@dataclass(frozen=True)
class RunRecord:
    """
    One repetition of one model on one case. Either `point` is set (the run
    was scored) or `error_note` explains why not.
    """
    model_name: str
    case_id: str
    repetition: int
    raw_output: str = ""
    parse_outcome: str = PARSE_OK
    syntax: Optional[SyntaxReport] = None
    components: Tuple[MetricComponents, ...] = ()
    best_gold: Optional[int] = None
    point: Optional[MetricPoint] = None
    usage: TokenUsage = field(default_factory=TokenUsage)
    elapsed_seconds: float = 0.0
    attempts: int = 0
    error_note: Optional[str] = None

    def __post_init__(self):
        if (self.point is None) == (self.error_note is None):
            raise ValueError("A run record carries either a metric point or an error note")
        if self.usage.api_calls > 0 and not self.elapsed_seconds > 0:
            raise ValueError("elapsed_seconds must be positive once a call was made")

    @property
    def ok(self) -> bool:
        return self.point is not None

    @property
    def best(self) -> Optional[MetricComponents]:
        if self.best_gold is None:
            return None
        return self.components[self.best_gold]


@dataclass(frozen=True)
class CaseSummary:
    runs: int
    failed: int
    stats: Optional[RunStats]


@dataclass(frozen=True)
class ModelSummary:
    model_name: str
    runs: int
    failed: int
    overall: Optional[RunStats]
    cases: Dict[str, CaseSummary]

    @property
    def mean_point(self) -> Optional[MetricPoint]:
        return None if self.overall is None else self.overall.mean_point()


def _stats(points: List[MetricPoint]) -> Optional[RunStats]:
    return aggregate_runs(points) if points else None


def summarize_records(records: Sequence[RunRecord], models: Sequence[str]) -> Dict[str, ModelSummary]:
    """
    RunStats per model and per (model, case) over the scored runs only;
    failed runs are counted separately.
    """
    out: Dict[str, ModelSummary] = {}
    for model in models:
        mine = [r for r in records if r.model_name == model]
        case_ids = sorted({r.case_id for r in mine})
        cases: Dict[str, CaseSummary] = {}
        for case_id in case_ids:
            rs = [r for r in mine if r.case_id == case_id]
            cases[case_id] = CaseSummary(
                runs=len(rs),
                failed=sum(1 for r in rs if not r.ok),
                stats=_stats([r.point for r in rs if r.ok]),
            )
        out[model] = ModelSummary(
            model_name=model,
            runs=len(mine),
            failed=sum(1 for r in mine if not r.ok),
            overall=_stats([r.point for r in mine if r.ok]),
            cases=cases,
        )
    return out
