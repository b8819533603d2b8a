#!/usr/bin/env python3
import argparse
import json
import logging
import sys
from typing import List, Optional

from core.paths import APP_DISPLAY_NAME, logs_dir

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

logger = logging.getLogger("bpmn_bench")


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with 2 by default; usage errors here are 1.
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _setup_logging(verbose: bool) -> None:
    root = logging.getLogger()
    root.setLevel(logging.DEBUG)
    for h in list(root.handlers):
        root.removeHandler(h)

    stderr = logging.StreamHandler(sys.stderr)
    stderr.setLevel(logging.INFO if verbose else logging.WARNING)
    stderr.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root.addHandler(stderr)

    try:
        fh = logging.FileHandler(logs_dir() / "bench.log", encoding="utf-8")
    except OSError as e:
        logger.warning("File log disabled: %s", e)
        return
    fh.setLevel(logging.DEBUG)
    fh.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    root.addHandler(fh)


def _build_parser() -> argparse.ArgumentParser:
    p = _ArgumentParser(prog="bpmn-bench", description=f"{APP_DISPLAY_NAME}: score LLM-generated BPMN models")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", parser_class=_ArgumentParser)

    ev = sub.add_parser("evaluate", help="score one candidate against one gold model (JSON to stdout)")
    ev.add_argument("candidate")
    ev.add_argument("gold")
    ev.add_argument("--config", help="config file for threshold, costs, weights and bounds")

    bench = sub.add_parser("bench", help="run the full benchmark")
    bench.add_argument("dataset")
    bench.add_argument("--config", required=True)
    bench.add_argument("--out", required=True)

    par = sub.add_parser("pareto", help="fronts and plots from a points.csv table")
    par.add_argument("points")
    par.add_argument("--out", required=True)
    return p


# ============================================================
# Subcommands
# ============================================================

def _cmd_evaluate(args) -> int:
    from core.bpmn_model import parse_bpmn_file
    from core.config import EvalConfig, load_config
    from core.evaluation import evaluate_candidate

    eval_config = load_config(args.config).evaluation if args.config else EvalConfig()
    candidate = parse_bpmn_file(args.candidate)
    gold = parse_bpmn_file(args.gold)
    components = evaluate_candidate(candidate, gold, eval_config)
    print(json.dumps(components.as_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_bench(args) -> int:
    from workflows.bench_workflow import run_bench_workflow

    def _progress(current: int, total: int, label: str) -> None:
        logger.info("[%d/%d] %s", current, total, label)

    stats = run_bench_workflow(
        dataset_dir=args.dataset,
        config_path=args.config,
        output_dir=args.out,
        log=logger.info,
        progress_update=_progress,
    )
    print(json.dumps(stats, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_pareto(args) -> int:
    from core.report_writer import emit_fronts, read_points_csv

    names, points = read_points_csv(args.points)
    written = emit_fronts(names, points, args.out)
    for path in written:
        print(path)
    return EXIT_OK


_COMMANDS = {"evaluate": _cmd_evaluate, "bench": _cmd_bench, "pareto": _cmd_pareto}


def cli_main(argv: Optional[List[str]] = None) -> int:
    from core.errors import BenchError

    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("bpmn-bench: a subcommand is required (evaluate, bench, pareto)")
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(str(e), file=sys.stderr)
        return EXIT_USAGE

    _setup_logging(args.verbose)

    try:
        return _COMMANDS[args.command](args)
    except (BenchError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        logger.debug("Data error", exc_info=True)
        return EXIT_DATA


def main():
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
