import pytest

from core.config import (
    DEFAULT_PROMPT_TEMPLATE,
    GenerationConfig,
    build_prompt,
    eval_config_from_values,
    load_config,
    parse_key_values,
)
from core.errors import ConfigError

MINIMAL = "models = m1\nreplay_dir = replay\npricing_table = pricing.csv\n"


def test_load_sample_config(resources_dir):
    cfg = load_config(resources_dir / "sample_config.txt")
    assert cfg.models == ("model-a", "model-b", "model-c")
    assert cfg.generator == "replay"
    assert cfg.replay_dir == (resources_dir / "sample_replay").resolve()
    assert cfg.pricing_table == (resources_dir / "pricing.csv").resolve()
    assert cfg.repetitions == 2
    assert cfg.max_retries == 1
    assert cfg.parallelism == 2
    assert cfg.evaluation.weights.w_pr == pytest.approx(0.4)
    assert cfg.evaluation.node_budget == 12
    assert "{description}" in cfg.prompt_template


def test_minimal_config_gets_defaults(write_file):
    cfg = load_config(write_file("cfg/bench.txt", MINIMAL))
    assert cfg.models == ("m1",)
    assert cfg.seed is None
    assert cfg.prompt_template == DEFAULT_PROMPT_TEMPLATE
    assert cfg.replay_dir.name == "replay"
    assert cfg.replay_dir.parent.name == "cfg"


def test_describe_has_no_paths(resources_dir):
    described = load_config(resources_dir / "sample_config.txt").describe()
    assert "replay_dir" not in described
    assert described["repetitions"] == 2
    assert described["weights"] == {"w_pr": 0.4, "w_ged": 0.3, "w_behavior": 0.3}


@pytest.mark.parametrize("text", [
    "colour = blue\n",
    "this line has no equals sign\n",
])
def test_bad_lines(text):
    with pytest.raises(ConfigError):
        parse_key_values(text)


def test_comments_and_blank_lines_skipped():
    assert parse_key_values("# note\n\nseed = 3\n") == {"seed": "3"}


@pytest.mark.parametrize("extra", [
    "seed = three\n",
    "repetitions = 0\n",
    "generator = carrier-pigeon\n",
    "weight_pr = 0.9\n",
    "loop_bound = -1\n",
    "match_threshold = 2\n",
    "temperatures = 0.2, -1\n",
    "temperatures = 0.5, 0.50\n",
    "seeds = 1, x\n",
    "temperature = 0.3\ntemperatures = 0.1, 0.2\n",
])
def test_invalid_values(write_file, extra):
    with pytest.raises(ConfigError):
        load_config(write_file("bench.txt", MINIMAL + extra))


def test_missing_required_keys(write_file):
    with pytest.raises(ConfigError):
        load_config(write_file("a.txt", "replay_dir = r\npricing_table = p.csv\n"))
    with pytest.raises(ConfigError):
        load_config(write_file("b.txt", "models = m1\nreplay_dir = r\n"))
    with pytest.raises(ConfigError):
        load_config(write_file("c.txt", "models = m1\ngenerator = http\npricing_table = p.csv\n"))


def test_template_without_placeholder(write_file):
    write_file("tpl.txt", "Draw a BPMN model.")
    with pytest.raises(ConfigError):
        load_config(write_file("bench.txt", MINIMAL + "prompt_template = tpl.txt\n"))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.txt")


def test_eval_config_defaults():
    cfg = eval_config_from_values({})
    assert cfg.threshold == 0.5
    assert cfg.bounds.loop_bound == 1


def test_seed_per_repetition():
    assert GenerationConfig("m", seed=7).seed_for(2) == 9
    assert GenerationConfig("m").seed_for(2) is None


def test_build_prompt_keeps_other_braces():
    assert build_prompt("Use {json} here: {description}", "  order flow \n") == "Use {json} here: order flow"


def test_single_variant_keeps_model_name(resources_dir):
    cfg = load_config(resources_dir / "sample_config.txt")
    assert [v.label for v in cfg.variants()] == ["model-a", "model-b", "model-c"]
    assert cfg.generation_parallelism == 1


def test_temperature_variants_are_named(write_file):
    cfg = load_config(write_file("bench.txt", MINIMAL.replace("m1", "m1, m2") + "temperatures = 0, 0.7\nseed = 5\n"))
    variants = cfg.variants()
    assert [v.label for v in variants] == ["m1@t0", "m1@t0.7", "m2@t0", "m2@t0.7"]
    assert [v.model_name for v in variants] == ["m1", "m1", "m2", "m2"]
    assert [v.temperature for v in variants] == [0.0, 0.7, 0.0, 0.7]
    assert all(v.seed == 5 for v in variants)
    assert cfg.describe()["temperatures"] == [0.0, 0.7]


def test_seed_and_temperature_variants_combine(write_file):
    cfg = load_config(write_file("bench.txt", MINIMAL + "temperatures = 0.2, 1\nseeds = 1, 2\n"))
    assert [v.label for v in cfg.variants()] == ["m1@t0.2@s1", "m1@t0.2@s2", "m1@t1@s1", "m1@t1@s2"]


def test_parallelism_settings_are_separate(write_file):
    cfg = load_config(write_file("bench.txt", MINIMAL + "parallelism = 4\n"))
    assert cfg.parallelism == 4
    assert cfg.generation_parallelism == 1
    cfg = load_config(write_file("bench2.txt", MINIMAL + "generation_parallelism = 3\n"))
    assert cfg.generation_parallelism == 3
