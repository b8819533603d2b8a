import pytest

from core.bpmn_model import NodeKind, empty_graph, graph_from_edges, parse_bpmn_file
from core.config import EvalConfig
from core.evaluation import evaluate_against_golds, evaluate_candidate

S, E, T = NodeKind.START_EVENT, NodeKind.END_EVENT, NodeKind.TASK
XOR = NodeKind.EXCLUSIVE_GATEWAY


def _gold(resources_dir, case, name="gold.bpmn"):
    return parse_bpmn_file(resources_dir / "sample_dataset" / case / name)


@pytest.mark.parametrize("case", ["c1", "c2", "c3"])
def test_perfect_candidate(resources_dir, case):
    gold = _gold(resources_dir, case)
    mc = evaluate_candidate(gold, gold, EvalConfig())
    assert mc.ged_distance == 0
    assert mc.ged_similarity == 1.0
    assert mc.concept_precision == mc.concept_recall == 1.0
    assert mc.behavioral_recall == mc.behavioral_precision == 1.0
    assert mc.quality == pytest.approx(1.0)


def test_small_pairs_use_exact_ged(resources_dir):
    gold = _gold(resources_dir, "c1")
    mc = evaluate_candidate(gold, gold, EvalConfig())
    assert mc.ged_exact
    assert not any(d.startswith("approximate GED") for d in mc.diagnostics)


def test_large_pairs_fall_back_to_approximate_ged(resources_dir):
    gold = _gold(resources_dir, "c2")
    mc = evaluate_candidate(gold, gold, EvalConfig(node_budget=4))
    assert not mc.ged_exact
    assert mc.ged_distance == 0
    assert any(d.startswith("approximate GED") for d in mc.diagnostics)


def test_empty_candidate_scores_zero(resources_dir):
    mc = evaluate_candidate(empty_graph(), _gold(resources_dir, "c1"), EvalConfig())
    assert mc.quality == 0.0
    assert mc.behavioral_f1 == 0.0
    assert any(d.startswith("behavior scored 0") for d in mc.diagnostics)


def test_missing_branch_halves_behavioral_recall(resources_dir):
    gold = _gold(resources_dir, "c2")
    cand = graph_from_edges(
        "partial",
        [
            ("s", S, ""), ("r", T, "Review application"), ("x1", XOR, ""),
            ("a", T, "Approve application"), ("x2", XOR, ""), ("n", T, "Notify applicant"), ("e", E, ""),
        ],
        [("s", "r"), ("r", "x1"), ("x1", "a"), ("a", "x2"), ("x2", "n"), ("n", "e")],
    )
    mc = evaluate_candidate(cand, gold, EvalConfig())
    assert mc.candidate_traces == 1
    assert mc.gold_traces == 2
    assert mc.behavioral_recall == 0.5
    assert mc.behavioral_precision == 1.0
    assert 0.0 < mc.quality < 1.0


def test_best_gold_is_first_maximum(resources_dir):
    gold = _gold(resources_dir, "c3")
    single_best, single = evaluate_against_golds(gold, [gold], EvalConfig())
    best, comps = evaluate_against_golds(gold, [gold, gold], EvalConfig())
    assert single_best == 0
    assert best == 0
    assert comps[0] == comps[1] == single[0]


def test_sequential_candidate_prefers_sequential_gold(resources_dir):
    golds = [_gold(resources_dir, "c3"), _gold(resources_dir, "c3", "gold2.bpmn")]
    best, comps = evaluate_against_golds(golds[1], golds, EvalConfig())
    assert best == 1
    assert comps[1].quality == pytest.approx(1.0)
    assert comps[0].quality < comps[1].quality


def test_no_gold_models():
    with pytest.raises(ValueError):
        evaluate_against_golds(empty_graph(), [], EvalConfig())


def test_as_dict_is_json_ready(resources_dir):
    gold = _gold(resources_dir, "c1")
    d = evaluate_candidate(gold, gold, EvalConfig()).as_dict()
    assert isinstance(d["diagnostics"], list)
    assert set(d) >= {"quality", "concept_f1", "ged_similarity", "behavioral_f1"}


def test_unlabeled_task_costs_concept_scores():
    gold = graph_from_edges("g", [("s", S, ""), ("t", T, "Check invoice"), ("e", E, "")], [("s", "t"), ("t", "e")])
    cand = graph_from_edges("c", [("s", S, ""), ("t", T, ""), ("e", E, "")], [("s", "t"), ("t", "e")])
    mc = evaluate_candidate(cand, gold, EvalConfig())
    assert mc.concept_precision == pytest.approx(2 / 3)
    assert mc.concept_recall == pytest.approx(2 / 3)
    assert mc.behavioral_f1 == 0.0
    assert mc.quality < 1.0
