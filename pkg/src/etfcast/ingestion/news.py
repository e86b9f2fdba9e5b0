"""News sources, article listing, and full-text harvesting.

The fixture source reads a directory of metadata plus page payloads; the
HTTP source is a generic search-API skeleton. Both go through the same
listing/harvesting operations so tests and production share code paths.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import date, datetime
from html.parser import HTMLParser
from pathlib import Path
from typing import Protocol
from zoneinfo import ZoneInfo

from ..errors import ExtractionFailedError, MalformedResponseError, SourceUnreachableError
from .http import HttpClient
from .stores import NewsStore, url_hash
from .types import ArticleMeta, EtfId, RawArticle

logger = logging.getLogger(__name__)

DEFAULT_TIMEZONE = "America/New_York"


def normalize_published_date(raw: str, tz_name: str = DEFAULT_TIMEZONE) -> date:
    """Truncate a timestamp to the calendar date in the reference zone.

    Accepts plain ISO dates (returned as-is) or ISO timestamps with or
    without an offset; naive timestamps are assumed already local.
    """
    # Python 3.10 fromisoformat rejects the Z suffix
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        if len(raw) == 10:
            return date.fromisoformat(raw)
        stamp = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise MalformedResponseError(f"bad timestamp {raw!r}: {exc}") from exc
    if stamp.tzinfo is not None:
        stamp = stamp.astimezone(ZoneInfo(tz_name))
    return stamp.date()


class NewsSource(Protocol):
    def search(self, symbol: str, start: date, end: date) -> list[dict]:
        """Return raw metadata records for one symbol."""
        ...

    def fetch_page(self, url: str) -> bytes:
        """Return the raw page payload for an article url."""
        ...


class FixtureNewsSource:
    """Metadata from news/index.json, pages from news/pages/<urlhash>.html."""

    def __init__(self, fixture_dir: Path):
        self.fixture_dir = Path(fixture_dir)

    def search(self, symbol: str, start: date, end: date) -> list[dict]:
        index = self.fixture_dir / "news" / "index.json"
        if not index.exists():
            raise SourceUnreachableError(f"fixture index missing: {index}")
        records = json.loads(index.read_text(encoding="utf-8"))
        return [r for r in records if symbol in r.get("related_etfs", [])]

    def fetch_page(self, url: str) -> bytes:
        path = self.fixture_dir / "news" / "pages" / f"{url_hash(url)}.html"
        if not path.exists():
            raise SourceUnreachableError(f"fixture page missing for {url}")
        return path.read_bytes()


class HttpNewsSource:
    """Generic search-endpoint skeleton.

    The search template receives symbol/start/end and must return JSON of
    the form ``{"articles": [{"url", "title", "published_at",
    "related_etfs"}, ...]}``. Article pages are fetched as-is.
    """

    def __init__(self, search_template: str, client: HttpClient | None = None):
        self.search_template = search_template
        self.client = client or HttpClient()

    def search(self, symbol: str, start: date, end: date) -> list[dict]:
        url = self.search_template.format(symbol=symbol, start=start.isoformat(),
                                          end=end.isoformat())
        body = self.client.get(url)
        try:
            payload = json.loads(body)
            return list(payload["articles"])
        except (ValueError, KeyError, TypeError) as exc:
            raise MalformedResponseError(f"news search payload for {symbol}: {exc}",
                                         payload=body) from exc

    def fetch_page(self, url: str) -> bytes:
        return self.client.get(url)


class _BodyExtractor(HTMLParser):
    """Collects text inside the first container tag (default <article>)."""

    def __init__(self, container: str):
        super().__init__()
        self.container = container
        self.depth = 0
        self.done = False
        self.chunks: list[str] = []

    def handle_starttag(self, tag, attrs):
        if self.done:
            return
        if tag == self.container:
            self.depth += 1
        elif self.depth and tag in ("br", "p", "div", "li"):
            self.chunks.append(" ")

    def handle_endtag(self, tag):
        if self.done or tag != self.container or self.depth == 0:
            return
        self.depth -= 1
        if self.depth == 0:
            self.done = True

    def handle_data(self, data):
        if self.depth and not self.done:
            self.chunks.append(data)


def extract_body(payload: bytes, container: str = "article") -> str:
    """Pull whitespace-normalized article text out of an HTML payload."""
    parser = _BodyExtractor(container)
    parser.feed(payload.decode("utf-8", errors="replace"))
    text = " ".join("".join(parser.chunks).split())
    if not text:
        raise ExtractionFailedError(f"no text found in <{container}> container")
    return text


def _parse_meta(record: dict, symbol: str, tz_name: str) -> ArticleMeta:
    try:
        related = frozenset(str(s) for s in record["related_etfs"])
        return ArticleMeta(
            url=record["url"],
            title=record["title"],
            published_at=normalize_published_date(str(record["published_at"]), tz_name),
            related_etfs=related,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedResponseError(f"bad article record: {exc}", payload=record) from exc


def list_articles(etf: EtfId, start: date, end: date, source: NewsSource,
                  store: NewsStore | None = None,
                  tz_name: str = DEFAULT_TIMEZONE) -> list[ArticleMeta]:
    """List article metadata related to one ETF within a window.

    Deduplicates by url (first record wins), keeps only articles whose
    publication date falls inside the window, and persists metadata when
    a store is given.
    """
    raw = source.search(etf.symbol, start, end)
    seen: set[str] = set()
    metas: list[ArticleMeta] = []
    for record in raw:
        try:
            meta = _parse_meta(record, etf.symbol, tz_name)
        except MalformedResponseError as exc:
            logger.error("malformed article record for %s, payload retained: %r",
                         etf.symbol, exc.payload)
            raise
        if meta.url in seen:
            continue
        seen.add(meta.url)
        if etf.symbol not in meta.related_etfs:
            continue
        if not (start <= meta.published_at <= end):
            continue
        metas.append(meta)
        if store is not None:
            store.upsert(meta)
    return metas


def fetch_article_body(meta: ArticleMeta, source: NewsSource, store: NewsStore,
                       container: str = "article") -> RawArticle:
    """Fetch one article's full text, idempotently.

    A persisted record with a body is returned without any network call;
    extraction failures raise and leave the metadata record intact.
    """
    cached = store.get(meta.url)
    if cached is not None and cached.get("body"):
        return RawArticle(meta=NewsStore.to_meta(cached), body=cached["body"])
    payload = source.fetch_page(meta.url)
    body = extract_body(payload, container=container)
    store.upsert(meta, body=body)
    return RawArticle(meta=meta, body=body)


@dataclass
class HarvestReport:
    articles: list[RawArticle]
    skipped: list[tuple[str, str]]


def harvest_bodies(metas: list[ArticleMeta], source: NewsSource,
                   store: NewsStore, container: str = "article") -> HarvestReport:
    """Fetch bodies for a whole corpus; extraction failures become skips,
    never aborts."""
    articles: list[RawArticle] = []
    skipped: list[tuple[str, str]] = []
    for meta in metas:
        try:
            articles.append(fetch_article_body(meta, source, store, container=container))
        except (ExtractionFailedError, SourceUnreachableError) as exc:
            logger.warning("skipping %s: %s", meta.url, exc)
            skipped.append((meta.url, str(exc)))
    return HarvestReport(articles=articles, skipped=skipped)
