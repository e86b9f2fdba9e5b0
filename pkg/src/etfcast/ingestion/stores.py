"""Append-only raw stores for prices and news.

Layout under the data root:

    raw/prices/<SYMBOL>.jsonl   one line per fetched (symbol, start, end) window
    raw/news/<urlhash>.record   one line per article (meta, body may be null)

Every line is a self-describing JSON record carrying ``schema_version``.
Writes are skipped when they would not change the on-disk bytes, so
re-running ingestion against an unchanged cache leaves the store
byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import threading
from datetime import date
from pathlib import Path

from .types import ArticleMeta, EtfId, PriceSeries

PRICE_SCHEMA_VERSION = 1
NEWS_SCHEMA_VERSION = 1


def url_hash(url: str) -> str:
    """Stable 16-hex-char key for an article url."""
    return hashlib.sha256(url.encode("utf-8")).hexdigest()[:16]


def _dump_line(record: dict) -> str:
    return json.dumps(record, separators=(", ", ": "), ensure_ascii=False)


class PriceStore:
    """One .jsonl file per symbol; one line per fetch window."""

    def __init__(self, root: Path):
        self.root = Path(root) / "raw" / "prices"
        self._lock = threading.Lock()

    def _path(self, symbol: str) -> Path:
        return self.root / f"{symbol}.jsonl"

    def get(self, symbol: str, start: date, end: date) -> dict | None:
        path = self._path(symbol)
        if not path.exists():
            return None
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                record = json.loads(line)
                if record["start"] == start.isoformat() and record["end"] == end.isoformat():
                    return record
        return None

    def put(self, series: PriceSeries, start: date, end: date) -> dict:
        record = {
            "schema_version": PRICE_SCHEMA_VERSION,
            "symbol": series.etf.symbol,
            "start": start.isoformat(),
            "end": end.isoformat(),
            "dates": [d.isoformat() for d in series.dates],
            "closes": list(series.closes),
        }
        with self._lock:
            existing = self.get(series.etf.symbol, start, end)
            if existing == record:
                return record
            path = self._path(series.etf.symbol)
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("a", encoding="utf-8") as fh:
                fh.write(_dump_line(record) + "\n")
        return record

    @staticmethod
    def to_series(record: dict, etf: EtfId) -> PriceSeries:
        dates = [date.fromisoformat(d) for d in record["dates"]]
        return PriceSeries(etf=etf, dates=dates, closes=[float(c) for c in record["closes"]])


class NewsStore:
    """One single-line .record file per article, keyed by url hash."""

    def __init__(self, root: Path):
        self.root = Path(root) / "raw" / "news"
        self._lock = threading.Lock()

    def _path(self, url: str) -> Path:
        return self.root / f"{url_hash(url)}.record"

    def get(self, url: str) -> dict | None:
        path = self._path(url)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def upsert(self, meta: ArticleMeta, body: str | None = None) -> dict:
        """Write or update the record; preserves an existing body when the
        caller passes none, and skips the write if bytes are unchanged."""
        with self._lock:
            existing = self.get(meta.url)
            if body is None and existing is not None:
                body = existing.get("body")
            record = {
                "schema_version": NEWS_SCHEMA_VERSION,
                "url": meta.url,
                "url_hash": url_hash(meta.url),
                "title": meta.title,
                "published_at": meta.published_at.isoformat(),
                "related_etfs": sorted(meta.related_etfs),
                "body": body,
            }
            if existing != record:
                path = self._path(meta.url)
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(_dump_line(record) + "\n", encoding="utf-8")
        return record

    def iter_records(self):
        if not self.root.exists():
            return
        for path in sorted(self.root.glob("*.record")):
            yield json.loads(path.read_text(encoding="utf-8"))

    @staticmethod
    def to_meta(record: dict) -> ArticleMeta:
        return ArticleMeta(
            url=record["url"],
            title=record["title"],
            published_at=date.fromisoformat(record["published_at"]),
            related_etfs=frozenset(record["related_etfs"]),
        )
