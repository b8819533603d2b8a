import json

import pytest
import requests

from core.config import API_KEY_ENV
from core.errors import GeneratorUnreachableError, MalformedXmlError
from core.generators import GenerationRequest, HttpGenerator, ReplayGenerator, extract_candidate_xml

DOC = '<definitions xmlns="http://www.omg.org/spec/BPMN/20100524/MODEL"><process id="p"/></definitions>'


def _request(**overrides):
    fields = dict(case_id="c1", repetition=0, attempt=0, prompt="describe", model_name="m")
    fields.update(overrides)
    return GenerationRequest(**fields)


# ============================================================
# extract_candidate_xml
# ============================================================

@pytest.mark.parametrize("text", [
    DOC,
    f"Here is the model:\n```xml\n{DOC}\n```\nLet me know if you need changes.",
    f'<?xml version="1.0"?>\n{DOC}',
    f"Compare with <i>unclosed\n{DOC}",
])
def test_extract_finds_document(text):
    assert extract_candidate_xml(text) == DOC


def test_extract_prefers_the_outermost_element():
    text = f"<wrapper>{DOC}</wrapper> trailing"
    assert extract_candidate_xml(text) == f"<wrapper>{DOC}</wrapper>"


@pytest.mark.parametrize("text", ["", "no xml here", "<open> but never closed", "x < y and y > z"])
def test_extract_failure(text):
    with pytest.raises(MalformedXmlError):
        extract_candidate_xml(text)


# ============================================================
# ReplayGenerator
# ============================================================

def _write_response(path, text, inp=10, out=5):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({"text": text, "input_tokens": inp, "output_tokens": out}), encoding="utf-8")


def test_replay_lookup_order(tmp_path):
    case_dir = tmp_path / "m" / "c1"
    _write_response(case_dir / "response.json", "fallback")
    _write_response(case_dir / "attempt1.json", "second attempt")
    _write_response(case_dir / "rep1_attempt1.json", "rep one, second attempt")
    gen = ReplayGenerator(tmp_path)

    assert gen.generate(_request()).text == "fallback"
    assert gen.generate(_request(attempt=1)).text == "second attempt"
    resp = gen.generate(_request(repetition=1, attempt=1))
    assert resp.text == "rep one, second attempt"
    assert (resp.input_tokens, resp.output_tokens) == (10, 5)


def test_replay_missing_response(tmp_path):
    with pytest.raises(GeneratorUnreachableError):
        ReplayGenerator(tmp_path).generate(_request())


@pytest.mark.parametrize("content", ["not json", '{"input_tokens": 3}', '{"text": "x", "input_tokens": "many"}'])
def test_replay_bad_file(tmp_path, content):
    path = tmp_path / "m" / "c1" / "response.json"
    path.parent.mkdir(parents=True)
    path.write_text(content, encoding="utf-8")
    with pytest.raises(GeneratorUnreachableError):
        ReplayGenerator(tmp_path).generate(_request())


def test_bundled_replay_retry_layout(resources_dir):
    gen = ReplayGenerator(resources_dir / "sample_replay")
    first = gen.generate(_request(model_name="model-b"))
    second = gen.generate(_request(model_name="model-b", attempt=1))
    with pytest.raises(MalformedXmlError):
        extract_candidate_xml(first.text)
    assert "definitions" in extract_candidate_xml(second.text)


# ============================================================
# HttpGenerator
# ============================================================

class FakeResponse:
    def __init__(self, payload=None, status=200):
        self.payload = payload
        self.status = status

    def raise_for_status(self):
        if self.status >= 400:
            raise requests.HTTPError(f"{self.status} Server Error")

    def json(self):
        if self.payload is None:
            raise ValueError("no JSON")
        return self.payload


class FakeSession:
    def __init__(self, response=None, exc=None):
        self.response = response
        self.exc = exc
        self.calls = []

    def post(self, url, **kwargs):
        self.calls.append((url, kwargs))
        if self.exc is not None:
            raise self.exc
        return self.response


def test_http_success(monkeypatch):
    monkeypatch.setenv(API_KEY_ENV, "secret")
    session = FakeSession(FakeResponse({"text": DOC, "input_tokens": 120, "output_tokens": 80}))
    gen = HttpGenerator("http://llm.local/generate", session=session)

    resp = gen.generate(_request(seed=7, temperature=0.2, timeout_seconds=9.0))
    assert resp.text == DOC
    assert (resp.input_tokens, resp.output_tokens) == (120, 80)

    url, kwargs = session.calls[0]
    assert url == "http://llm.local/generate"
    assert kwargs["json"] == {"model": "m", "prompt": "describe", "temperature": 0.2, "seed": 7}
    assert kwargs["headers"]["Authorization"] == "Bearer secret"
    assert kwargs["timeout"] == 9.0


def test_http_without_key_sends_no_auth(monkeypatch):
    monkeypatch.delenv(API_KEY_ENV, raising=False)
    session = FakeSession(FakeResponse({"text": "x"}))
    HttpGenerator("http://llm.local", session=session).generate(_request())
    assert "Authorization" not in session.calls[0][1]["headers"]


@pytest.mark.parametrize("session", [
    FakeSession(exc=requests.ConnectionError("refused")),
    FakeSession(exc=requests.Timeout("slow")),
    FakeSession(FakeResponse({"text": "x"}, status=503)),
    FakeSession(FakeResponse(None)),
    FakeSession(FakeResponse({"answer": "x"})),
])
def test_http_failures_become_unreachable(session):
    with pytest.raises(GeneratorUnreachableError):
        HttpGenerator("http://llm.local", session=session).generate(_request())
