from __future__ import annotations

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from contextlib import nullcontext
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from core.bpmn_model import ProcessGraph, parse_bpmn, validate_syntax
from core.config import BenchConfig, EvalConfig, GenerationConfig, build_prompt, load_config
from core.dataset import Case, load_dataset
from core.economics import MetricPoint, PricingEntry, TokenUsage, compute_cost, load_pricing_table
from core.errors import BpmnParseError, ConfigError, GeneratorUnreachableError
from core.evaluation import evaluate_against_golds
from core.generators import GenerationRequest, Generator, build_generator, extract_candidate_xml
from core.pareto import ParetoFront, pareto_fronts
from core.records import PARSE_FAILURE_NOTE, PARSE_OK, ModelSummary, RunRecord, summarize_records
from core.report_writer import emit_report

logger = logging.getLogger(__name__)

LogFn = Callable[[str], None]
ProgressFn = Callable[[int, int, str], None]

# Timer resolution floor; a completed call never reports zero seconds.
_MIN_ELAPSED = 1e-9


@dataclass
class BenchResult:
    records: List[RunRecord]
    summaries: Dict[str, ModelSummary]
    point_names: List[str]
    points: List[MetricPoint]
    fronts: Dict[str, ParetoFront]


@dataclass
class _Generation:
    """Everything one repetition's generator calls produced, even on failure."""
    graph: Optional[ProcessGraph]
    raw: str
    outcome: str
    usage: TokenUsage
    attempts: int
    elapsed: float
    unreachable: Optional[GeneratorUnreachableError] = None


# ============================================================
# One case
# ============================================================

def _generate_candidate(
    case: Case,
    repetition: int,
    generator: Generator,
    config: GenerationConfig,
    prompt: str,
) -> _Generation:
    """
    Call the generator until the output parses or retries run out.

    An unreachable generator stops the loop; usage and output of the
    attempts made before it are kept.
    """
    usage = TokenUsage()
    raw = ""
    outcome = PARSE_OK
    attempts = 0
    start = time.perf_counter()

    for attempt in range(config.max_retries + 1):
        attempts += 1
        try:
            resp = generator.generate(GenerationRequest(
                case_id=case.case_id,
                repetition=repetition,
                attempt=attempt,
                prompt=prompt,
                model_name=config.model_name,
                temperature=config.temperature,
                seed=config.seed_for(repetition),
                timeout_seconds=config.timeout_seconds,
            ))
        except GeneratorUnreachableError as e:
            # The failed call still counts as an attempted API call.
            usage = usage + TokenUsage(api_calls=1)
            elapsed = max(time.perf_counter() - start, _MIN_ELAPSED)
            return _Generation(None, raw, f"generator unreachable: {e}", usage, attempts, elapsed, unreachable=e)

        usage = usage + TokenUsage(resp.input_tokens, resp.output_tokens, 1)
        raw = resp.text
        try:
            graph = parse_bpmn(extract_candidate_xml(raw))
        except BpmnParseError as e:
            outcome = f"{PARSE_FAILURE_NOTE}: {e}"
            logger.info("%s/%s rep %d attempt %d unparseable: %s", config.label, case.case_id, repetition, attempt, e)
            continue
        elapsed = max(time.perf_counter() - start, _MIN_ELAPSED)
        return _Generation(graph, raw, PARSE_OK, usage, attempts, elapsed)

    elapsed = max(time.perf_counter() - start, _MIN_ELAPSED)
    return _Generation(None, raw, outcome, usage, attempts, elapsed)


def run_case(
    case: Case,
    generator: Generator,
    config: GenerationConfig,
    eval_config: EvalConfig,
    *,
    pricing: PricingEntry,
    prompt_template: str,
    log: Optional[LogFn] = None,
    generation_slots: Optional[threading.Semaphore] = None,
) -> List[RunRecord]:
    """
    All repetitions of one model on one case. Per-repetition failures become
    error notes; an unreachable generator ends the case.

    generation_slots, when given, is held while a repetition talks to the
    generator; time spent waiting for it is not measured.
    """
    prompt = build_prompt(prompt_template, case.description_text)
    records: List[RunRecord] = []
    name = config.label

    for rep in range(config.repetitions):
        with generation_slots or nullcontext():
            gen = _generate_candidate(case, rep, generator, config, prompt)

        if gen.unreachable is not None:
            records.append(RunRecord(
                model_name=name,
                case_id=case.case_id,
                repetition=rep,
                raw_output=gen.raw,
                parse_outcome=gen.outcome,
                usage=gen.usage,
                elapsed_seconds=gen.elapsed,
                attempts=gen.attempts,
                error_note=gen.outcome,
            ))
            if log:
                log(f"ERROR {name}/{case.case_id}: generator unreachable, case aborted")
            logger.error("Generator unreachable for %s/%s: %s", name, case.case_id, gen.unreachable)
            break

        if gen.graph is None:
            records.append(RunRecord(
                model_name=name,
                case_id=case.case_id,
                repetition=rep,
                raw_output=gen.raw,
                parse_outcome=gen.outcome,
                usage=gen.usage,
                elapsed_seconds=gen.elapsed,
                attempts=gen.attempts,
                error_note=PARSE_FAILURE_NOTE,
            ))
            if log:
                log(f"{name}/{case.case_id} rep {rep}: parse failure after {gen.attempts} attempt(s)")
            continue

        best, components = evaluate_against_golds(gen.graph, case.gold_models, eval_config)
        point = MetricPoint(
            quality=components[best].quality,
            time_seconds=gen.elapsed,
            cost_usd=compute_cost(gen.usage, pricing),
        )
        records.append(RunRecord(
            model_name=name,
            case_id=case.case_id,
            repetition=rep,
            raw_output=gen.raw,
            parse_outcome=PARSE_OK,
            syntax=validate_syntax(gen.graph),
            components=tuple(components),
            best_gold=best,
            point=point,
            usage=gen.usage,
            elapsed_seconds=gen.elapsed,
            attempts=gen.attempts,
        ))
        if log:
            log(f"{name}/{case.case_id} rep {rep}: quality {point.quality:.3f}")

    return records


# ============================================================
# Full benchmark
# ============================================================

def _front_inputs(summaries: Dict[str, ModelSummary]) -> Tuple[List[str], List[MetricPoint]]:
    names: List[str] = []
    points: List[MetricPoint] = []
    for name, summary in summaries.items():
        mp = summary.mean_point
        if mp is None:
            logger.warning("Model %s has no scored run; left out of the Pareto fronts", name)
            continue
        names.append(name)
        points.append(mp)
    return names, points


def run_benchmark(
    cases: Sequence[Case],
    config: BenchConfig,
    generator: Generator,
    pricing_table: Dict[str, PricingEntry],
    *,
    log: Optional[LogFn] = None,
    progress_update: Optional[ProgressFn] = None,
) -> BenchResult:
    """
    Every (variant, case) pair, `config.parallelism` cases at a time and at
    most `config.generation_parallelism` generator calls at once. Records
    come back in variant order, then case order, then repetition.
    """
    missing = [m for m in config.models if m not in pricing_table]
    if missing:
        raise ConfigError(f"No pricing entry for model(s): {', '.join(missing)}")

    variants = config.variants()
    slots = threading.BoundedSemaphore(config.generation_parallelism)
    jobs = [(variant, case) for variant in variants for case in cases]
    total = len(jobs)
    results: Dict[int, List[RunRecord]] = {}

    def _job(idx: int) -> List[RunRecord]:
        variant, case = jobs[idx]
        return run_case(
            case,
            generator,
            variant,
            config.evaluation,
            pricing=pricing_table[variant.model_name],
            prompt_template=config.prompt_template,
            log=log,
            generation_slots=slots,
        )

    done = 0
    with ThreadPoolExecutor(max_workers=max(1, config.parallelism)) as pool:
        futures = {pool.submit(_job, idx): idx for idx in range(total)}
        for fut in as_completed(futures):
            idx = futures[fut]
            results[idx] = fut.result()
            done += 1
            if progress_update:
                variant, case = jobs[idx]
                progress_update(done, total, f"{variant.label}/{case.case_id}")

    records = [r for idx in range(total) for r in results[idx]]
    summaries = summarize_records(records, [v.label for v in variants])
    names, points = _front_inputs(summaries)
    fronts = pareto_fronts(points) if points else {}

    failed = sum(1 for r in records if not r.ok)
    logger.info("Benchmark done: %d runs, %d failed", len(records), failed)
    if log:
        log(f"Done: {len(records)} runs ({failed} failed)")

    return BenchResult(records=records, summaries=summaries, point_names=names, points=points, fronts=fronts)


def run_bench_workflow(
    *,
    dataset_dir: str | Path,
    config_path: str | Path,
    output_dir: str | Path,
    log: Optional[LogFn] = None,
    progress_update: Optional[ProgressFn] = None,
) -> dict:
    config = load_config(config_path)
    cases = load_dataset(dataset_dir)
    pricing = load_pricing_table(config.pricing_table)
    generator = build_generator(config)

    if log:
        log(f"{len(cases)} cases x {len(config.variants())} model variants x {config.repetitions} repetitions")

    result = run_benchmark(cases, config, generator, pricing, log=log, progress_update=progress_update)
    written = emit_report(
        result.records,
        result.summaries,
        result.fronts,
        output_dir,
        point_names=result.point_names,
        points=result.points,
        config=config,
    )

    return {
        "cases": len(cases),
        "models": len(config.models),
        "variants": len(config.variants()),
        "runs": len(result.records),
        "runs_failed": sum(1 for r in result.records if not r.ok),
        "files_written": len(written),
    }
