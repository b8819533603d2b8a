from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from .errors import ConfigError, EmptySampleError

logger = logging.getLogger(__name__)

PRICING_COLUMNS = ["model_name", "usd_per_million_input", "usd_per_million_output", "usd_per_call"]


# ============================================================
# Data model
# ============================================================

@dataclass(frozen=True)
class TokenUsage:
    input_tokens: int = 0
    output_tokens: int = 0
    api_calls: int = 0

    def __post_init__(self):
        if min(self.input_tokens, self.output_tokens, self.api_calls) < 0:
            raise ValueError("Token usage counts must be non-negative")
        if self.input_tokens + self.output_tokens > 0 and self.api_calls < 1:
            raise ValueError("Token usage without an API call")

    def __add__(self, other: "TokenUsage") -> "TokenUsage":
        return TokenUsage(
            input_tokens=self.input_tokens + other.input_tokens,
            output_tokens=self.output_tokens + other.output_tokens,
            api_calls=self.api_calls + other.api_calls,
        )


@dataclass(frozen=True)
class PricingEntry:
    model_name: str
    usd_per_million_input: float = 0.0
    usd_per_million_output: float = 0.0
    usd_per_call: float = 0.0

    def __post_init__(self):
        if min(self.usd_per_million_input, self.usd_per_million_output, self.usd_per_call) < 0:
            raise ValueError(f"Negative price for {self.model_name}")


@dataclass(frozen=True)
class MetricPoint:
    quality: float
    time_seconds: float
    cost_usd: float

    def __post_init__(self):
        if not 0.0 <= self.quality <= 1.0:
            raise ValueError(f"quality outside [0, 1]: {self.quality}")
        if not self.time_seconds > 0:
            raise ValueError(f"time_seconds must be positive: {self.time_seconds}")
        if self.cost_usd < 0:
            raise ValueError(f"cost_usd must be non-negative: {self.cost_usd}")


@dataclass(frozen=True)
class DimensionStats:
    mean: float
    std: float
    min: float
    max: float
    n: int


@dataclass(frozen=True)
class RunStats:
    quality: DimensionStats
    time: DimensionStats
    cost: DimensionStats

    @property
    def n(self) -> int:
        return self.quality.n

    def mean_point(self) -> MetricPoint:
        return MetricPoint(quality=self.quality.mean, time_seconds=self.time.mean, cost_usd=self.cost.mean)


# ============================================================
# Cost
# ============================================================

def compute_cost(usage: TokenUsage, pricing: PricingEntry) -> float:
    """Variable usage cost in USD (fixed infrastructure costs are not modeled)."""
    return (
        usage.input_tokens / 1e6 * pricing.usd_per_million_input
        + usage.output_tokens / 1e6 * pricing.usd_per_million_output
        + usage.api_calls * pricing.usd_per_call
    )


def load_pricing_table(path: str | Path) -> Dict[str, PricingEntry]:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"Pricing table not found: {path}")

    with open(p, newline="", encoding="utf-8-sig") as f:
        reader = csv.DictReader(f)
        missing = [c for c in PRICING_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ConfigError(f"Pricing table {path} missing columns: {', '.join(missing)}")

        table: Dict[str, PricingEntry] = {}
        for line_no, row in enumerate(reader, start=2):
            name = (row.get("model_name") or "").strip()
            if not name:
                continue
            try:
                table[name] = PricingEntry(
                    model_name=name,
                    usd_per_million_input=float(row["usd_per_million_input"] or 0),
                    usd_per_million_output=float(row["usd_per_million_output"] or 0),
                    usd_per_call=float(row["usd_per_call"] or 0),
                )
            except ValueError as e:
                raise ConfigError(f"Pricing table {path} line {line_no}: {e}") from e

    logger.debug("Loaded %d pricing entries from %s", len(table), p)
    return table


# ============================================================
# Aggregation over repetitions
# ============================================================

def _dimension(values: Sequence[float]) -> DimensionStats:
    arr = np.asarray(values, dtype=float)
    lo, hi = float(arr.min()), float(arr.max())
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    # Keep min <= mean <= max under float rounding.
    mean = min(hi, max(lo, float(arr.mean())))
    return DimensionStats(mean=mean, std=std, min=lo, max=hi, n=int(arr.size))


def aggregate_runs(points: List[MetricPoint]) -> RunStats:
    """Mean, sample standard deviation (n - 1), min and max per dimension."""
    if not points:
        raise EmptySampleError("Cannot aggregate an empty list of runs")
    return RunStats(
        quality=_dimension([p.quality for p in points]),
        time=_dimension([p.time_seconds for p in points]),
        cost=_dimension([p.cost_usd for p in points]),
    )
