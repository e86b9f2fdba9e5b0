"""Price sources and the fetch_prices operation.

Two source implementations ship: a deterministic file fixture (CSV per
symbol) for tests and offline reproduction, and a generic JSON-over-HTTP
skeleton for a live endpoint.
"""

from __future__ import annotations

import csv
import json
import logging
from datetime import date
from pathlib import Path
from typing import Protocol

from ..errors import EmptyRangeError, MalformedResponseError, SourceUnreachableError
from .http import HttpClient
from .stores import PriceStore
from .types import EtfId, PriceSeries

logger = logging.getLogger(__name__)


class PriceSource(Protocol):
    def fetch(self, symbol: str, start: date, end: date) -> list[tuple[date, float]]:
        """Return (date, close) rows within [start, end], ordered by date."""
        ...


class FixturePriceSource:
    """Reads prices/<SYMBOL>.csv files with ``date,close`` columns."""

    def __init__(self, fixture_dir: Path):
        self.fixture_dir = Path(fixture_dir)

    def fetch(self, symbol: str, start: date, end: date) -> list[tuple[date, float]]:
        path = self.fixture_dir / "prices" / f"{symbol}.csv"
        if not path.exists():
            return []
        rows = []
        with path.open(newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                d = date.fromisoformat(row["date"])
                if start <= d <= end:
                    rows.append((d, float(row["close"])))
        rows.sort(key=lambda r: r[0])
        return rows


class HttpPriceSource:
    """Generic endpoint speaking ``{"dates": [...], "closes": [...]}`` JSON.

    The url template receives symbol, start, and end, e.g.
    ``https://host/prices?symbol={symbol}&start={start}&end={end}``.
    """

    def __init__(self, url_template: str, client: HttpClient | None = None):
        self.url_template = url_template
        self.client = client or HttpClient()

    def fetch(self, symbol: str, start: date, end: date) -> list[tuple[date, float]]:
        url = self.url_template.format(symbol=symbol, start=start.isoformat(), end=end.isoformat())
        body = self.client.get(url)
        try:
            payload = json.loads(body)
            dates = [date.fromisoformat(d) for d in payload["dates"]]
            closes = [float(c) for c in payload["closes"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise MalformedResponseError(f"price payload for {symbol}: {exc}",
                                         payload=body) from exc
        if len(dates) != len(closes):
            raise MalformedResponseError(f"price payload for {symbol}: length mismatch",
                                         payload=body)
        return [(d, c) for d, c in zip(dates, closes) if start <= d <= end]


def fetch_prices(etf: EtfId, start: date, end: date, source: PriceSource,
                 store: PriceStore) -> PriceSeries:
    """Fetch daily closes for one ETF, persisting to the raw store.

    A cache hit for the exact (symbol, start, end) key returns the stored
    series without touching the source; repeated runs leave the store
    byte-identical.
    """
    if start > end:
        raise ValueError(f"start {start} after end {end}")
    cached = store.get(etf.symbol, start, end)
    if cached is not None:
        return PriceStore.to_series(cached, etf)
    rows = source.fetch(etf.symbol, start, end)
    if len(rows) < 2:
        # a single close cannot form a series, so it falls under empty-range too
        raise EmptyRangeError(
            f"{len(rows)} trading days for {etf.symbol} in [{start}, {end}], need at least 2")
    series = PriceSeries(etf=etf, dates=[r[0] for r in rows], closes=[r[1] for r in rows])
    store.put(series, start, end)
    logger.info("fetched %d closes for %s [%s..%s]", len(series), etf.symbol, start, end)
    return series
