"""Constrained sentiment scoring of news articles.

A scoring client turns an article body into a raw JSON response
``{"score": int, "reason": str}`` with the score on a fixed -10..+10
scale. Responses are validated here; an invalid response triggers a
bounded repair loop (re-ask with the validation error attached) before
the article is dropped as unscored.

Two clients ship: an HTTP client for a chat-completions-style API with
structured output, and a deterministic keyword-lexicon client that needs
no network and doubles as the test oracle. Raw responses are cached
keyed by (url hash, prompt version, model id) so re-scoring is a
byte-identical replay with zero client calls.
"""

from __future__ import annotations

import json
import logging
import os
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Protocol

from ..errors import SchemaViolationError, SourceUnreachableError
from ..ingestion.stores import url_hash
from ..ingestion.types import RawArticle

logger = logging.getLogger(__name__)

SCORE_MIN = -10
SCORE_MAX = 10

PROMPT_TEMPLATES = {
    "v1": (
        "You are a financial news analyst. Read the article below and rate its "
        "sentiment for the sectors it covers on an integer scale from -10 "
        "(extremely negative) to +10 (extremely positive). Respond with JSON "
        'matching {{"score": <integer -10..10>, "reason": "<one sentence>"}}.'
        "\n\nTITLE: {title}\n\nARTICLE:\n{body}\n"
    ),
}


@dataclass(frozen=True)
class SentimentScore:
    value: int
    reason: str
    model_id: str
    scored_at: str

    def __post_init__(self):
        if not isinstance(self.value, int) or isinstance(self.value, bool):
            raise ValueError(f"score must be an integer, got {self.value!r}")
        if not (SCORE_MIN <= self.value <= SCORE_MAX):
            raise ValueError(f"score {self.value} outside [{SCORE_MIN}, {SCORE_MAX}]")
        if not self.reason.strip():
            raise ValueError("score reason must be non-empty")


@dataclass(frozen=True)
class ScoredArticle:
    article: RawArticle
    score: SentimentScore
    sectors: frozenset[str]

    def __post_init__(self):
        if not self.sectors:
            raise ValueError(f"scored article {self.article.meta.url} has no sectors")


class ScoringClient(Protocol):
    model_id: str

    def score_raw(self, article: RawArticle, prompt: str,
                  repair_hint: str | None = None) -> str:
        """Return the raw response text for one scoring request."""
        ...


# Small inflection-inclusive lexicon; scoring is 3 points per hit, clipped.
_POSITIVE = {
    "surge", "surges", "surged", "gain", "gains", "gained", "rally", "rallies",
    "rallied", "record", "beat", "beats", "profit", "profits", "growth", "soar",
    "soars", "soared", "jump", "jumps", "jumped", "strong", "upgrade", "upgraded",
    "bullish", "boom", "outperform", "rebound", "rebounds",
}
_NEGATIVE = {
    "plunge", "plunges", "plunged", "loss", "losses", "drop", "drops", "dropped",
    "fall", "falls", "fell", "miss", "misses", "missed", "crash", "crashes",
    "decline", "declines", "declined", "weak", "downgrade", "downgraded",
    "bearish", "slump", "slumps", "slumped", "fear", "fears", "selloff",
    "underperform", "cut", "cuts",
}


class KeywordScoringClient:
    """Deterministic lexicon scorer used for tests and offline runs."""

    model_id = "keyword-lexicon-1"

    def score_raw(self, article: RawArticle, prompt: str,
                  repair_hint: str | None = None) -> str:
        tokens = re.findall(r"[a-z']+", article.body.lower())
        pos = sorted(t for t in set(tokens) if t in _POSITIVE)
        neg = sorted(t for t in set(tokens) if t in _NEGATIVE)
        value = max(SCORE_MIN, min(SCORE_MAX, 3 * len(pos) - 3 * len(neg)))
        reason = f"lexicon hits: positive={pos or 'none'} negative={neg or 'none'}"
        return json.dumps({"score": value, "reason": reason})


class HttpScoringClient:
    """Chat-completions-style API client with structured output.

    Expects an OpenAI-compatible endpoint; the credential is read from an
    environment variable so it never lands in config files.
    """

    def __init__(self, base_url: str, model_id: str,
                 api_key_env: str = "ETFCAST_API_KEY", timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.model_id = model_id
        self.api_key_env = api_key_env
        self.timeout = timeout

    def score_raw(self, article: RawArticle, prompt: str,
                  repair_hint: str | None = None) -> str:
        import requests

        key = os.environ.get(self.api_key_env)
        if not key:
            raise SourceUnreachableError(
                f"no API key in ${self.api_key_env} for scoring client")
        messages = [{"role": "user", "content": prompt}]
        if repair_hint:
            messages.append({"role": "user", "content": repair_hint})
        payload = {
            "model": self.model_id,
            "messages": messages,
            "response_format": {
                "type": "json_schema",
                "json_schema": {
                    "name": "sentiment",
                    "schema": {
                        "type": "object",
                        "properties": {
                            "score": {"type": "integer", "minimum": SCORE_MIN,
                                      "maximum": SCORE_MAX},
                            "reason": {"type": "string"},
                        },
                        "required": ["score", "reason"],
                    },
                },
            },
        }
        try:
            resp = requests.post(
                f"{self.base_url}/chat/completions", json=payload,
                headers={"Authorization": f"Bearer {key}"}, timeout=self.timeout)
        except requests.RequestException as exc:
            raise SourceUnreachableError(f"scoring client: {exc}") from exc
        if resp.status_code != 200:
            raise SourceUnreachableError(f"scoring client: HTTP {resp.status_code}")
        return resp.json()["choices"][0]["message"]["content"]


class ScoreCache:
    """Raw-response cache under <root>/cache/scores, keyed by
    (url hash, prompt version, model id)."""

    def __init__(self, root: Path):
        self.root = Path(root) / "cache" / "scores"

    def _path(self, url: str, prompt_version: str, model_id: str) -> Path:
        return self.root / f"{url_hash(url)}__{prompt_version}__{model_id}.json"

    def get(self, url: str, prompt_version: str, model_id: str) -> dict | None:
        path = self._path(url, prompt_version, model_id)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def put(self, url: str, prompt_version: str, model_id: str,
            raw_response: str, scored_at: str) -> None:
        path = self._path(url, prompt_version, model_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        entry = {
            "url_hash": url_hash(url),
            "prompt_version": prompt_version,
            "model_id": model_id,
            "scored_at": scored_at,
            "raw_response": raw_response,
        }
        path.write_text(json.dumps(entry, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")


def _validate_response(raw: str) -> tuple[int, str]:
    try:
        payload = json.loads(raw)
    except ValueError as exc:
        raise SchemaViolationError(f"response is not JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise SchemaViolationError("response is not a JSON object")
    value = payload.get("score")
    reason = payload.get("reason")
    if not isinstance(value, int) or isinstance(value, bool):
        raise SchemaViolationError(f"score {value!r} is not an integer")
    if not (SCORE_MIN <= value <= SCORE_MAX):
        raise SchemaViolationError(f"score {value} outside [{SCORE_MIN}, {SCORE_MAX}]")
    if not isinstance(reason, str) or not reason.strip():
        raise SchemaViolationError("reason missing or empty")
    return value, reason


def score_article(article: RawArticle, client: ScoringClient, cache: ScoreCache,
                  prompt_version: str = "v1", repair_retries: int = 2) -> SentimentScore:
    """Score one article, with cache replay and a bounded repair loop.

    Cache hits return the persisted score byte-for-byte with zero client
    calls. On a schema violation the client is re-asked with the
    validation error appended; after ``repair_retries`` failures the
    article is dropped via SchemaViolationError.
    """
    cached = cache.get(article.meta.url, prompt_version, client.model_id)
    if cached is not None:
        value, reason = _validate_response(cached["raw_response"])
        return SentimentScore(value=value, reason=reason,
                              model_id=cached["model_id"],
                              scored_at=cached["scored_at"])

    prompt = PROMPT_TEMPLATES[prompt_version].format(
        title=article.meta.title, body=article.body)
    hint = None
    last_error = None
    for attempt in range(repair_retries + 1):
        raw = client.score_raw(article, prompt, repair_hint=hint)
        try:
            value, reason = _validate_response(raw)
        except SchemaViolationError as exc:
            last_error = exc
            hint = (f"The previous response was invalid: {exc}. "
                    "Respond again with JSON matching the requested schema.")
            logger.info("repair retry %d for %s: %s", attempt + 1,
                        article.meta.url, exc)
            continue
        scored_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
        cache.put(article.meta.url, prompt_version, client.model_id, raw, scored_at)
        return SentimentScore(value=value, reason=reason,
                              model_id=client.model_id, scored_at=scored_at)
    raise SchemaViolationError(
        f"article {article.meta.url} unscored after {repair_retries} repair "
        f"retries: {last_error}")
