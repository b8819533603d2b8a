from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

from .bpmn_model import ProcessGraph, parse_bpmn, validate_syntax
from .errors import BpmnParseError, DatasetError, GoldParseError, MissingDescriptionError, NoGoldModelError

logger = logging.getLogger(__name__)

DESCRIPTION_FILE = "description.txt"
GOLD_GLOB = "gold*.bpmn"


@dataclass(frozen=True)
class Case:
    """
    One benchmark case: a plain-text domain description plus one or more
    gold-standard models. Every gold model counts as a valid answer.
    """
    case_id: str
    description_text: str
    gold_models: Tuple[ProcessGraph, ...]
    gold_files: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.gold_models:
            raise NoGoldModelError(self.case_id)


def load_case(case_dir: Path) -> Case:
    case_id = case_dir.name
    desc_path = case_dir / DESCRIPTION_FILE
    if not desc_path.is_file():
        raise MissingDescriptionError(case_id)

    gold_paths = sorted(p for p in case_dir.glob(GOLD_GLOB) if p.is_file())
    if not gold_paths:
        raise NoGoldModelError(case_id)

    golds: List[ProcessGraph] = []
    for gp in gold_paths:
        try:
            graph = parse_bpmn(gp.read_text(encoding="utf-8"))
        except BpmnParseError as e:
            raise GoldParseError(str(gp), e) from e

        report = validate_syntax(graph)
        if report.deficit_count:
            logger.warning(
                "Gold model %s has %d syntactic deficits: %s",
                gp, report.deficit_count, ", ".join(v.kind.value for v in report.violations),
            )
        golds.append(graph)

    return Case(
        case_id=case_id,
        description_text=desc_path.read_text(encoding="utf-8"),
        gold_models=tuple(golds),
        gold_files=tuple(p.name for p in gold_paths),
    )


def load_dataset(root_path: str | Path) -> List[Case]:
    """
    Dataset layout:
      <root>/<case_id>/description.txt
      <root>/<case_id>/gold*.bpmn   (one or more)

    Cases are returned sorted by case_id; any broken gold model is fatal.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise DatasetError(f"Dataset directory not found: {root_path}")

    cases = [load_case(d) for d in sorted(root.iterdir(), key=lambda p: p.name) if d.is_dir() and not d.name.startswith(".")]
    logger.info("Loaded %d cases from %s", len(cases), root)
    return cases
