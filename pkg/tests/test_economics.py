import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.economics import (
    MetricPoint,
    PricingEntry,
    TokenUsage,
    aggregate_runs,
    compute_cost,
    load_pricing_table,
)
from core.errors import ConfigError, EmptySampleError


# (input, output, calls), (per-M in, per-M out, per call), expected USD
COST_FIXTURES = [
    ((0, 0, 0), (3.0, 15.0, 0.0), 0.0),
    ((1_000_000, 1_000_000, 0), (3.0, 15.0, 0.0), 18.0),
    ((0, 0, 2), (0.0, 0.0, 0.01), 0.02),
    ((500_000, 0, 1), (2.0, 8.0, 0.0), 1.0),
    ((0, 250_000, 1), (2.0, 8.0, 0.0), 2.0),
    ((1_234, 567, 1), (0.0, 0.0, 0.0), 0.0),
    ((1_000, 2_000, 1), (1.0, 1.0, 0.0), 0.003),
    ((10, 10, 1), (1_000_000.0, 1_000_000.0, 0.0), 20.0),
    ((123_456, 0, 1), (1.0, 0.0, 0.0), 0.123456),
    ((0, 654_321, 1), (0.0, 1.0, 0.0), 0.654321),
    ((2_000_000, 500_000, 3), (0.15, 0.60, 0.0), 0.6),
    ((100_000, 20_000, 1), (2.5, 10.0, 0.0), 0.45),
    ((100_000, 20_000, 2), (2.5, 10.0, 0.001), 0.452),
    ((400, 300, 1), (1.0, 2.0, 0.001), 0.0020),
    ((1, 1, 1), (0.0, 0.0, 0.5), 0.5),
    ((0, 0, 10), (5.0, 5.0, 0.25), 2.5),
    ((3_000_000, 0, 1), (0.1, 0.0, 0.0), 0.3),
    ((0, 3_000_000, 1), (0.0, 0.4, 0.0), 1.2),
    ((750_000, 250_000, 4), (4.0, 12.0, 0.005), 6.02),
    ((999_999, 1, 1), (1.0, 1.0, 0.0), 1.0),
]


@pytest.mark.parametrize("usage, prices, expected", COST_FIXTURES)
def test_compute_cost_fixtures(usage, prices, expected):
    pricing = PricingEntry("m", *prices)
    assert compute_cost(TokenUsage(*usage), pricing) == pytest.approx(expected, abs=1e-9)


@given(st.integers(0, 10**7), st.integers(0, 10**7), st.integers(1, 50))
def test_compute_cost_is_linear(inp, out, k):
    pricing = PricingEntry("m", 3.0, 15.0, 0.0)
    base = compute_cost(TokenUsage(inp, out, 1), pricing)
    scaled = compute_cost(TokenUsage(inp * k, out * k, k), pricing)
    assert scaled == pytest.approx(k * base, rel=1e-12, abs=1e-12)


def test_token_usage_invariants():
    with pytest.raises(ValueError):
        TokenUsage(10, 0, 0)
    with pytest.raises(ValueError):
        TokenUsage(-1, 0, 1)
    total = TokenUsage(10, 20, 1) + TokenUsage(5, 0, 1)
    assert total == TokenUsage(15, 20, 2)


def test_negative_price_rejected():
    with pytest.raises(ValueError):
        PricingEntry("m", -1.0)


def test_metric_point_bounds():
    with pytest.raises(ValueError):
        MetricPoint(1.2, 1.0, 0.0)
    with pytest.raises(ValueError):
        MetricPoint(0.5, 0.0, 0.0)
    with pytest.raises(ValueError):
        MetricPoint(0.5, 1.0, -0.1)


# ============================================================
# Aggregation
# ============================================================

def test_single_point_stats():
    stats = aggregate_runs([MetricPoint(0.7, 2.0, 0.01)])
    assert stats.n == 1
    assert stats.mean_point() == MetricPoint(0.7, 2.0, 0.01)
    assert stats.quality.std == stats.time.std == stats.cost.std == 0.0


def test_two_point_sample_std():
    stats = aggregate_runs([MetricPoint(0.5, 1.0, 0.0), MetricPoint(0.5, 3.0, 0.0)])
    assert stats.time.mean == pytest.approx(2.0)
    assert stats.time.std == pytest.approx(math.sqrt(2))
    assert (stats.time.min, stats.time.max) == (1.0, 3.0)


def test_empty_sample():
    with pytest.raises(EmptySampleError):
        aggregate_runs([])


points = st.builds(
    MetricPoint,
    quality=st.floats(0, 1),
    time_seconds=st.floats(1e-6, 1e4),
    cost_usd=st.floats(0, 100),
)


@given(st.lists(points, min_size=1, max_size=20), st.randoms())
def test_aggregate_is_permutation_invariant(sample, rnd):
    shuffled = list(sample)
    rnd.shuffle(shuffled)
    a, b = aggregate_runs(sample), aggregate_runs(shuffled)
    for da, db in ((a.quality, b.quality), (a.time, b.time), (a.cost, b.cost)):
        assert da.mean == pytest.approx(db.mean)
        assert da.std == pytest.approx(db.std, rel=1e-9, abs=1e-9)
        assert (da.min, da.max, da.n) == (db.min, db.max, db.n)
        assert da.min <= da.mean <= da.max


@given(points, st.integers(1, 10))
def test_constant_sample(point, n):
    stats = aggregate_runs([point] * n)
    assert stats.quality.mean == point.quality
    assert stats.quality.std == pytest.approx(0.0, abs=1e-9)
    assert stats.cost.mean == point.cost_usd


# ============================================================
# Pricing table
# ============================================================

def test_load_pricing_table(write_file):
    path = write_file("pricing.csv", "model_name,usd_per_million_input,usd_per_million_output,usd_per_call\nm1,3,15,0\nm2,0.5,1.5,0.01\n")
    table = load_pricing_table(path)
    assert table["m1"] == PricingEntry("m1", 3.0, 15.0, 0.0)
    assert table["m2"].usd_per_call == 0.01


def test_bundled_pricing_table(resources_dir):
    table = load_pricing_table(resources_dir / "pricing.csv")
    assert set(table) == {"model-a", "model-b", "model-c"}


@pytest.mark.parametrize("content", [
    "model_name,usd_per_million_input\nm1,3\n",
    "model_name,usd_per_million_input,usd_per_million_output,usd_per_call\nm1,abc,1,0\n",
    "model_name,usd_per_million_input,usd_per_million_output,usd_per_call\nm1,-1,1,0\n",
])
def test_bad_pricing_tables(write_file, content):
    with pytest.raises(ConfigError):
        load_pricing_table(write_file("pricing.csv", content))


def test_missing_pricing_table(tmp_path):
    with pytest.raises(ConfigError):
        load_pricing_table(tmp_path / "none.csv")
