from __future__ import annotations

import logging
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .behavior import TraceBounds
from .errors import ConfigError
from .matching import DEFAULT_THRESHOLD
from .quality_metrics import DEFAULT_NODE_BUDGET, EditCostModel, QualityWeights

logger = logging.getLogger(__name__)

DEFAULT_PROMPT_TEMPLATE = (
    "You are a business process modeling expert.\n"
    "Model the process described below in BPMN 2.0.\n"
    "Use only startEvent, endEvent, task, exclusiveGateway, parallelGateway and sequenceFlow "
    "elements inside a single process.\n"
    "Respond with a single BPMN 2.0 XML document and nothing else.\n\n"
    "Process description:\n{description}\n"
)

API_KEY_ENV = "BPMN_BENCH_API_KEY"

_LINE_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")

KNOWN_KEYS = {
    "models", "generator", "endpoint_url", "replay_dir", "pricing_table", "prompt_template",
    "seed", "seeds", "temperature", "temperatures", "repetitions", "max_retries", "timeout_seconds",
    "parallelism", "generation_parallelism",
    "match_threshold",
    "cost_node_insert", "cost_node_delete", "cost_node_substitute", "cost_edge_insert", "cost_edge_delete",
    "weight_pr", "weight_ged", "weight_behavior",
    "loop_bound", "max_traces", "max_len", "token_cap", "node_budget",
}

_PATH_KEYS = ("replay_dir", "pricing_table", "prompt_template")


# ============================================================
# Data model
# ============================================================

@dataclass(frozen=True)
class EvalConfig:
    threshold: float = DEFAULT_THRESHOLD
    costs: EditCostModel = field(default_factory=EditCostModel)
    weights: QualityWeights = field(default_factory=QualityWeights)
    bounds: TraceBounds = field(default_factory=TraceBounds)
    node_budget: int = DEFAULT_NODE_BUDGET

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"match_threshold must lie in [0, 1], got {self.threshold}")
        if self.node_budget < 0:
            raise ConfigError("node_budget must be non-negative")


@dataclass(frozen=True)
class GenerationConfig:
    """
    Sampling setup for one model. run_name labels records and points when
    one model runs under several temperatures or seeds; the generator is
    always asked for model_name.
    """
    model_name: str
    seed: Optional[int] = None
    temperature: float = 0.0
    repetitions: int = 1
    max_retries: int = 0
    timeout_seconds: float = 120.0
    run_name: str = ""

    def __post_init__(self):
        if not self.model_name:
            raise ConfigError("model_name must not be empty")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")
        if not self.timeout_seconds > 0:
            raise ConfigError("timeout_seconds must be positive")

    @property
    def label(self) -> str:
        return self.run_name or self.model_name

    def seed_for(self, repetition: int) -> Optional[int]:
        return None if self.seed is None else self.seed + repetition


@dataclass(frozen=True)
class BenchConfig:
    models: Tuple[str, ...]
    generator: str = "replay"
    endpoint_url: str = ""
    replay_dir: Optional[Path] = None
    pricing_table: Optional[Path] = None
    prompt_template: str = DEFAULT_PROMPT_TEMPLATE
    prompt_template_path: Optional[Path] = None
    seed: Optional[int] = None
    temperature: float = 0.0
    # Extra sampling variants; empty means just seed / temperature.
    seeds: Tuple[int, ...] = ()
    temperatures: Tuple[float, ...] = ()
    repetitions: int = 1
    max_retries: int = 0
    timeout_seconds: float = 120.0
    parallelism: int = 1
    generation_parallelism: int = 1
    evaluation: EvalConfig = field(default_factory=EvalConfig)
    source_path: Optional[Path] = None

    def generation_for(
        self,
        model_name: str,
        *,
        temperature: Optional[float] = None,
        seed: Optional[int] = None,
        run_name: str = "",
    ) -> GenerationConfig:
        return GenerationConfig(
            model_name=model_name,
            seed=self.seed if seed is None else seed,
            temperature=self.temperature if temperature is None else temperature,
            repetitions=self.repetitions,
            max_retries=self.max_retries,
            timeout_seconds=self.timeout_seconds,
            run_name=run_name,
        )

    def variants(self) -> List[GenerationConfig]:
        """
        One generation setup per (model, temperature, seed), in that order.

        A model with a single variant keeps its plain name; otherwise the
        name gains "@t<temperature>" and/or "@s<seed>" for each axis that
        has more than one value.
        """
        temperatures = self.temperatures or (self.temperature,)
        seeds = self.seeds or (self.seed,)
        out: List[GenerationConfig] = []
        for model in self.models:
            for temperature in temperatures:
                for seed in seeds:
                    name = model
                    if len(temperatures) > 1:
                        name += f"@t{temperature:g}"
                    if len(seeds) > 1:
                        name += f"@s{seed}"
                    out.append(self.generation_for(model, temperature=temperature, seed=seed, run_name=name))
        return out

    def describe(self) -> Dict[str, object]:
        """Reproducibility record for reports. Never contains the credential."""
        ev = self.evaluation
        return {
            "models": list(self.models),
            "generator": self.generator,
            "endpoint_url": self.endpoint_url,
            "seed": self.seed,
            "seeds": list(self.seeds),
            "temperature": self.temperature,
            "temperatures": list(self.temperatures),
            "repetitions": self.repetitions,
            "max_retries": self.max_retries,
            "timeout_seconds": self.timeout_seconds,
            "parallelism": self.parallelism,
            "generation_parallelism": self.generation_parallelism,
            "match_threshold": ev.threshold,
            "costs": asdict(ev.costs),
            "weights": asdict(ev.weights),
            "bounds": asdict(ev.bounds),
            "node_budget": ev.node_budget,
            "prompt_template": self.prompt_template,
        }


# ============================================================
# Parsing
# ============================================================

def parse_key_values(text: str, *, source: str = "<config>") -> Dict[str, str]:
    values: Dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _LINE_RE.match(stripped)
        if not m:
            raise ConfigError(f"{source}:{line_no}: expected 'key = value'")
        key, value = m.group(1), m.group(2)
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}:{line_no}: unknown key '{key}'")
        values[key] = value
    return values


def _num(values: Dict[str, str], key: str, default, cast):
    raw = values.get(key, "")
    if raw == "":
        return default
    try:
        return cast(raw)
    except ValueError as e:
        raise ConfigError(f"Invalid value for {key}: {raw!r}") from e


def eval_config_from_values(values: Dict[str, str]) -> EvalConfig:
    defaults = EvalConfig()
    try:
        costs = EditCostModel(
            node_insert=_num(values, "cost_node_insert", defaults.costs.node_insert, float),
            node_delete=_num(values, "cost_node_delete", defaults.costs.node_delete, float),
            node_substitute=_num(values, "cost_node_substitute", defaults.costs.node_substitute, float),
            edge_insert=_num(values, "cost_edge_insert", defaults.costs.edge_insert, float),
            edge_delete=_num(values, "cost_edge_delete", defaults.costs.edge_delete, float),
        )
        weights = QualityWeights(
            w_pr=_num(values, "weight_pr", defaults.weights.w_pr, float),
            w_ged=_num(values, "weight_ged", defaults.weights.w_ged, float),
            w_behavior=_num(values, "weight_behavior", defaults.weights.w_behavior, float),
        )
        bounds = TraceBounds(
            loop_bound=_num(values, "loop_bound", defaults.bounds.loop_bound, int),
            max_traces=_num(values, "max_traces", defaults.bounds.max_traces, int),
            max_len=_num(values, "max_len", defaults.bounds.max_len, int),
            token_cap=_num(values, "token_cap", defaults.bounds.token_cap, int),
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from e

    return EvalConfig(
        threshold=_num(values, "match_threshold", defaults.threshold, float),
        costs=costs,
        weights=weights,
        bounds=bounds,
        node_budget=_num(values, "node_budget", defaults.node_budget, int),
    )


def _split_list(raw: str) -> List[str]:
    return [item.strip() for item in raw.split(",") if item.strip()]


def _num_list(values: Dict[str, str], key: str, cast) -> Tuple:
    items = _split_list(values.get(key, ""))
    try:
        parsed = tuple(cast(item) for item in items)
    except ValueError as e:
        raise ConfigError(f"Invalid value for {key}: {values[key]!r}") from e
    if len(set(parsed)) != len(parsed):
        raise ConfigError(f"{key} lists a value twice")
    return parsed


def load_config(path: str | Path) -> BenchConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"Config file not found: {path}")

    values = parse_key_values(p.read_text(encoding="utf-8"), source=str(p))
    base = p.resolve().parent

    paths: Dict[str, Optional[Path]] = {}
    for key in _PATH_KEYS:
        raw = values.get(key, "")
        paths[key] = (base / raw).resolve() if raw else None

    models = tuple(_split_list(values.get("models", "")))
    if not models:
        raise ConfigError(f"{p}: 'models' lists no model")

    generator = values.get("generator", "replay").strip().lower()
    if generator not in ("replay", "http"):
        raise ConfigError(f"{p}: generator must be 'replay' or 'http', got {generator!r}")
    if generator == "replay" and paths["replay_dir"] is None:
        raise ConfigError(f"{p}: replay generator needs 'replay_dir'")
    if generator == "http" and not values.get("endpoint_url"):
        raise ConfigError(f"{p}: http generator needs 'endpoint_url'")
    if paths["pricing_table"] is None:
        raise ConfigError(f"{p}: 'pricing_table' is required")

    template = DEFAULT_PROMPT_TEMPLATE
    template_path = paths["prompt_template"]
    if template_path is not None:
        if not template_path.exists():
            raise ConfigError(f"Prompt template not found: {template_path}")
        template = template_path.read_text(encoding="utf-8")
    if "{description}" not in template:
        raise ConfigError("Prompt template lacks the {description} placeholder")

    for single, plural in (("temperature", "temperatures"), ("seed", "seeds")):
        if values.get(single) and values.get(plural):
            raise ConfigError(f"{p}: set either '{single}' or '{plural}', not both")

    cfg = BenchConfig(
        models=models,
        generator=generator,
        endpoint_url=values.get("endpoint_url", ""),
        replay_dir=paths["replay_dir"],
        pricing_table=paths["pricing_table"],
        prompt_template=template,
        prompt_template_path=template_path,
        seed=_num(values, "seed", None, int),
        temperature=_num(values, "temperature", 0.0, float),
        seeds=_num_list(values, "seeds", int),
        temperatures=_num_list(values, "temperatures", float),
        repetitions=_num(values, "repetitions", 1, int),
        max_retries=_num(values, "max_retries", 0, int),
        timeout_seconds=_num(values, "timeout_seconds", 120.0, float),
        parallelism=max(1, _num(values, "parallelism", 1, int)),
        generation_parallelism=max(1, _num(values, "generation_parallelism", 1, int)),
        evaluation=eval_config_from_values(values),
        source_path=p.resolve(),
    )
    # Validates generation fields early.
    variants = cfg.variants()

    logger.info(
        "Loaded config %s (%d models, %d variants, %d repetitions)", p, len(models), len(variants), cfg.repetitions
    )
    return cfg


def build_prompt(template: str, description: str) -> str:
    # str.replace keeps literal braces elsewhere in the template intact.
    return template.replace("{description}", description.strip())
