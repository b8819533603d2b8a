import pytest

from core.dataset import load_case, load_dataset
from core.errors import (
    DanglingReferenceError,
    DatasetError,
    GoldParseError,
    MissingDescriptionError,
    NoGoldModelError,
)

GOLD = (
    '<definitions xmlns="http://www.omg.org/spec/BPMN/20100524/MODEL"><process id="p">'
    '<startEvent id="s"/><task id="t" name="Do"/><endEvent id="e"/>'
    '<sequenceFlow id="f1" sourceRef="s" targetRef="t"/>'
    '<sequenceFlow id="f2" sourceRef="t" targetRef="e"/>'
    '</process></definitions>'
)


def test_load_sample_dataset(resources_dir):
    cases = load_dataset(resources_dir / "sample_dataset")
    assert [c.case_id for c in cases] == ["c1", "c2", "c3"]
    assert len(cases[2].gold_models) == 2
    assert cases[2].gold_files == ("gold.bpmn", "gold2.bpmn")
    assert all(c.description_text.strip() for c in cases)


def test_missing_description(write_file, tmp_path):
    write_file("ds/c1/gold.bpmn", GOLD)
    with pytest.raises(MissingDescriptionError) as exc:
        load_dataset(tmp_path / "ds")
    assert exc.value.case_id == "c1"


def test_no_gold_model(write_file, tmp_path):
    write_file("ds/c1/description.txt", "A process.")
    write_file("ds/c1/notes.bpmn", GOLD)
    with pytest.raises(NoGoldModelError):
        load_case(tmp_path / "ds" / "c1")


def test_broken_gold_is_fatal(write_file, tmp_path):
    write_file("ds/c1/description.txt", "A process.")
    write_file("ds/c1/gold.bpmn", GOLD.replace('targetRef="e"', 'targetRef="nowhere"'))
    with pytest.raises(GoldParseError) as exc:
        load_dataset(tmp_path / "ds")
    assert isinstance(exc.value.detail, DanglingReferenceError)
    assert exc.value.path.endswith("gold.bpmn")


def test_hidden_dirs_and_files_ignored(write_file, tmp_path):
    write_file("ds/b/description.txt", "B")
    write_file("ds/b/gold.bpmn", GOLD)
    write_file("ds/a/description.txt", "A")
    write_file("ds/a/gold_v1.bpmn", GOLD)
    write_file("ds/.cache/junk.txt", "x")
    write_file("ds/README.txt", "not a case")
    assert [c.case_id for c in load_dataset(tmp_path / "ds")] == ["a", "b"]


def test_missing_dataset_dir(tmp_path):
    with pytest.raises(DatasetError):
        load_dataset(tmp_path / "absent")
