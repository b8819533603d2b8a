from __future__ import annotations

import json
import logging
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Protocol

import requests
from lxml import etree

from .config import API_KEY_ENV, BenchConfig
from .errors import ConfigError, GeneratorUnreachableError, MalformedXmlError

logger = logging.getLogger(__name__)

# Root tag candidates: a name right after "<" (declarations and comments are skipped).
_OPEN_TAG_RE = re.compile(r"<([A-Za-z_][\w.\-]*(?::[A-Za-z_][\w.\-]*)?)(?=[\s>/])")
_MAX_START_TAGS = 200
_MAX_END_TAGS = 20


# ============================================================
# Data model
# ============================================================

@dataclass(frozen=True)
class GenerationRequest:
    case_id: str
    repetition: int
    attempt: int
    prompt: str
    model_name: str
    temperature: float = 0.0
    seed: Optional[int] = None
    timeout_seconds: float = 120.0


@dataclass(frozen=True)
class GeneratorResponse:
    text: str
    input_tokens: int = 0
    output_tokens: int = 0


class Generator(Protocol):
    def generate(self, request: GenerationRequest) -> GeneratorResponse:
        ...


def _response_from_payload(payload, source: str) -> GeneratorResponse:
    if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
        raise GeneratorUnreachableError(f"{source}: response lacks a 'text' field")
    try:
        return GeneratorResponse(
            text=payload["text"],
            input_tokens=int(payload.get("input_tokens") or 0),
            output_tokens=int(payload.get("output_tokens") or 0),
        )
    except (TypeError, ValueError) as e:
        raise GeneratorUnreachableError(f"{source}: bad token counts: {e}") from e


# ============================================================
# Live HTTP endpoint
# ============================================================

class HttpGenerator:
    """
    POST {model, prompt, temperature, seed} as JSON; expects
    {text, input_tokens, output_tokens} back.

    The bearer token comes from BPMN_BENCH_API_KEY when set.
    """

    def __init__(self, endpoint_url: str, *, session: Optional[requests.Session] = None, api_key_env: str = API_KEY_ENV):
        self.endpoint_url = endpoint_url
        self.session = session or requests.Session()
        self.api_key_env = api_key_env

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "").strip()
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def generate(self, request: GenerationRequest) -> GeneratorResponse:
        body = {
            "model": request.model_name,
            "prompt": request.prompt,
            "temperature": request.temperature,
            "seed": request.seed,
        }
        try:
            resp = self.session.post(
                self.endpoint_url,
                json=body,
                headers=self._headers(),
                timeout=request.timeout_seconds,
            )
            resp.raise_for_status()
            payload = resp.json()
        except requests.RequestException as e:
            raise GeneratorUnreachableError(f"{self.endpoint_url}: {e}") from e
        except ValueError as e:
            raise GeneratorUnreachableError(f"{self.endpoint_url}: response is not JSON") from e

        return _response_from_payload(payload, self.endpoint_url)


# ============================================================
# Replay (offline, deterministic)
# ============================================================

class ReplayGenerator:
    """
    Canned responses laid out as:
      <root>/<model>/<case_id>/rep<r>_attempt<a>.json
      <root>/<model>/<case_id>/attempt<a>.json
      <root>/<model>/<case_id>/response.json

    The first existing file wins; each holds {text, input_tokens, output_tokens}.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _candidates(self, request: GenerationRequest) -> List[Path]:
        case_dir = self.root / request.model_name / request.case_id
        return [
            case_dir / f"rep{request.repetition}_attempt{request.attempt}.json",
            case_dir / f"attempt{request.attempt}.json",
            case_dir / "response.json",
        ]

    def generate(self, request: GenerationRequest) -> GeneratorResponse:
        for path in self._candidates(request):
            if not path.is_file():
                continue
            try:
                payload = json.loads(path.read_text(encoding="utf-8"))
            except (OSError, ValueError) as e:
                raise GeneratorUnreachableError(f"Replay file {path} unreadable: {e}") from e
            return _response_from_payload(payload, str(path))

        raise GeneratorUnreachableError(
            f"No replay response for model={request.model_name} case={request.case_id} "
            f"rep={request.repetition} attempt={request.attempt}"
        )


def build_generator(config: BenchConfig) -> Generator:
    if config.generator == "replay":
        if config.replay_dir is None:
            raise ConfigError("replay generator needs replay_dir")
        return ReplayGenerator(config.replay_dir)
    if config.generator == "http":
        return HttpGenerator(config.endpoint_url)
    raise ConfigError(f"Unknown generator: {config.generator}")


# ============================================================
# Candidate extraction
# ============================================================

def _well_formed(snippet: str) -> bool:
    parser = etree.XMLParser(resolve_entities=False, no_network=True)
    try:
        etree.fromstring(snippet, parser)
        return True
    except (etree.XMLSyntaxError, ValueError):
        return False


def extract_candidate_xml(text: str) -> str:
    """
    Return the first well-formed XML document embedded in generator output.

    Models tend to wrap the document in prose or markdown fences; starting
    from each opening tag in order, the longest span up to a matching closing
    tag that parses is taken.
    """
    body = text or ""
    for n_start, m in enumerate(_OPEN_TAG_RE.finditer(body)):
        if n_start >= _MAX_START_TAGS:
            break
        qname = m.group(1)
        start = m.start()

        close = f"</{qname}>"
        ends: List[int] = []
        pos = body.find(close, start)
        while pos != -1:
            ends.append(pos + len(close))
            pos = body.find(close, pos + 1)

        for end in reversed(ends[-_MAX_END_TAGS:]):
            snippet = body[start:end]
            if _well_formed(snippet):
                return snippet

    raise MalformedXmlError("No well-formed XML document found in generator output")
