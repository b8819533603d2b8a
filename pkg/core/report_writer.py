from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import asdict
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .config import BenchConfig
from .economics import MetricPoint, RunStats
from .errors import DatasetError, ReportIoError
from .pareto import PROJECTIONS, ParetoFront, pareto_fronts
from .plots import front_svg_name, render_front_svg
from .records import ModelSummary, RunRecord

logger = logging.getLogger(__name__)

RUNS_CSV = "runs.csv"
SUMMARY_JSON = "summary.json"
POINTS_CSV = "points.csv"
FRONTS_JSON = "fronts.json"
RAW_DIR = "raw"

POINTS_COLUMNS = ["model_name", "quality", "time_seconds", "cost_usd"]

RUNS_COLUMNS = [
    "model_name", "case_id", "repetition", "parse_outcome",
    "syntax_deficits", "syntax_violations", "best_gold",
    "matched_pairs", "concept_precision", "concept_recall", "concept_f1",
    "ged_distance", "ged_exact", "ged_similarity",
    "candidate_traces", "gold_traces", "traces_truncated",
    "behavioral_recall", "behavioral_precision", "behavioral_f1",
    "quality", "gold_qualities", "time_seconds", "cost_usd",
    "input_tokens", "output_tokens", "api_calls", "attempts",
    "error_note", "diagnostics",
]

_UNSAFE_NAME_RE = re.compile(r"[^\w.\-]+")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _safe_name(name: str) -> str:
    return _UNSAFE_NAME_RE.sub("_", name).strip("_") or "_"


# ============================================================
# Rows
# ============================================================

def _run_row(r: RunRecord) -> List[str]:
    row: Dict[str, str] = {c: "" for c in RUNS_COLUMNS}
    row.update({
        "model_name": r.model_name,
        "case_id": r.case_id,
        "repetition": str(r.repetition),
        "parse_outcome": r.parse_outcome,
        "time_seconds": _fmt(r.elapsed_seconds),
        "input_tokens": str(r.usage.input_tokens),
        "output_tokens": str(r.usage.output_tokens),
        "api_calls": str(r.usage.api_calls),
        "attempts": str(r.attempts),
        "error_note": r.error_note or "",
    })
    if r.syntax is not None:
        row["syntax_deficits"] = str(r.syntax.deficit_count)
        row["syntax_violations"] = "|".join(f"{v.kind.value}:{v.element_id}" for v in r.syntax.violations)

    best = r.best
    if best is not None:
        row.update({
            "best_gold": str(r.best_gold),
            "matched_pairs": str(best.matched_pairs),
            "concept_precision": _fmt(best.concept_precision),
            "concept_recall": _fmt(best.concept_recall),
            "concept_f1": _fmt(best.concept_f1),
            "ged_distance": _fmt(best.ged_distance),
            "ged_exact": "1" if best.ged_exact else "0",
            "ged_similarity": _fmt(best.ged_similarity),
            "candidate_traces": str(best.candidate_traces),
            "gold_traces": str(best.gold_traces),
            "traces_truncated": "1" if best.traces_truncated else "0",
            "behavioral_recall": _fmt(best.behavioral_recall),
            "behavioral_precision": _fmt(best.behavioral_precision),
            "behavioral_f1": _fmt(best.behavioral_f1),
            "gold_qualities": "|".join(_fmt(c.quality) for c in r.components),
            "diagnostics": "|".join(best.diagnostics),
        })
    if r.point is not None:
        row["quality"] = _fmt(r.point.quality)
        row["cost_usd"] = _fmt(r.point.cost_usd)

    return [row[c] for c in RUNS_COLUMNS]


def _stats_dict(stats: Optional[RunStats]) -> Optional[dict]:
    if stats is None:
        return None
    return {"quality": asdict(stats.quality), "time_seconds": asdict(stats.time), "cost_usd": asdict(stats.cost)}


def _summary_dict(summaries: Dict[str, ModelSummary], config: Optional[BenchConfig]) -> dict:
    models = {}
    for name, s in summaries.items():
        models[name] = {
            "runs": s.runs,
            "failed": s.failed,
            "overall": _stats_dict(s.overall),
            "cases": {
                case_id: {"runs": c.runs, "failed": c.failed, "stats": _stats_dict(c.stats)}
                for case_id, c in s.cases.items()
            },
        }
    out = {"models": models}
    if config is not None:
        out["config"] = config.describe()
    return out


# ============================================================
# Writers
# ============================================================

def _write_csv(path: Path, header: List[str], rows: List[List[str]]) -> None:
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_points_csv(path: Path, names: Sequence[str], points: Sequence[MetricPoint]) -> None:
    rows = [[n, _fmt(p.quality), _fmt(p.time_seconds), _fmt(p.cost_usd)] for n, p in zip(names, points)]
    _write_csv(path, POINTS_COLUMNS, rows)


def read_points_csv(path: str | Path) -> Tuple[List[str], List[MetricPoint]]:
    p = Path(path)
    if not p.is_file():
        raise DatasetError(f"Point table not found: {path}")

    names: List[str] = []
    points: List[MetricPoint] = []
    with p.open(newline="", encoding="utf-8-sig") as f:
        reader = csv.DictReader(f)
        missing = [c for c in POINTS_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise DatasetError(f"{path}: missing columns {', '.join(missing)}")
        for line_no, row in enumerate(reader, start=2):
            try:
                points.append(MetricPoint(
                    quality=float(row["quality"]),
                    time_seconds=float(row["time_seconds"]),
                    cost_usd=float(row["cost_usd"]),
                ))
            except (TypeError, ValueError) as e:
                raise DatasetError(f"{path} line {line_no}: {e}") from e
            names.append((row["model_name"] or "").strip())

    if not points:
        raise DatasetError(f"{path}: no points")
    return names, points


def emit_fronts(
    names: Sequence[str],
    points: Sequence[MetricPoint],
    out_dir: str | Path,
    fronts: Optional[Dict[str, ParetoFront]] = None,
) -> List[Path]:
    """fronts.json plus one SVG per projection."""
    out = Path(out_dir)
    if fronts is None:
        fronts = pareto_fronts(points)

    written: List[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        payload = {}
        for proj in PROJECTIONS:
            front = fronts[proj.name]
            payload[proj.name] = {
                "x_axis": proj.x_axis,
                "y_axis": proj.y_axis,
                "members": [names[i] for i in front.members],
            }
            written.append(render_front_svg(points, names, proj, front, out / front_svg_name(proj)))
        _write_json(out / FRONTS_JSON, payload)
        written.append(out / FRONTS_JSON)
    except OSError as e:
        raise ReportIoError(f"Cannot write fronts to {out}: {e}") from e
    return written


def emit_report(
    records: Sequence[RunRecord],
    stats: Dict[str, ModelSummary],
    fronts: Dict[str, ParetoFront],
    out_dir: str | Path,
    *,
    point_names: Sequence[str] = (),
    points: Sequence[MetricPoint] = (),
    config: Optional[BenchConfig] = None,
) -> List[Path]:
    """
    Writes runs.csv, summary.json, points.csv, raw generator outputs and,
    when any model was scored, fronts.json with the three SVG plots.
    """
    out = Path(out_dir)
    written: List[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)

        _write_csv(out / RUNS_CSV, RUNS_COLUMNS, [_run_row(r) for r in records])
        written.append(out / RUNS_CSV)

        _write_json(out / SUMMARY_JSON, _summary_dict(stats, config))
        written.append(out / SUMMARY_JSON)

        write_points_csv(out / POINTS_CSV, point_names, points)
        written.append(out / POINTS_CSV)

        for r in records:
            if not r.raw_output:
                continue
            raw_path = out / RAW_DIR / _safe_name(r.model_name) / f"{_safe_name(r.case_id)}_{r.repetition}.txt"
            raw_path.parent.mkdir(parents=True, exist_ok=True)
            raw_path.write_text(r.raw_output, encoding="utf-8")
            written.append(raw_path)
    except OSError as e:
        raise ReportIoError(f"Cannot write report to {out}: {e}") from e

    if points:
        written.extend(emit_fronts(point_names, points, out, fronts or None))
    else:
        logger.warning("No scored runs; Pareto plots skipped")

    logger.info("Report written to %s (%d files)", out, len(written))
    return written
