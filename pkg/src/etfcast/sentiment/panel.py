"""Sector linking, daily aggregation, price merging, and coverage.

Article scores pool into one record per (date, sector) pair: the
arithmetic mean when articles exist, a neutral zero flagged as imputed
when none do. Merging attaches those records to an ETF's trading dates,
producing the aligned panel the modeling stages consume.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

from ..errors import CoverageGapError
from ..ingestion.types import ArticleMeta, EtfId, PriceSeries, SectorMap
from .scoring import ScoredArticle


@dataclass(frozen=True)
class DailySectorSentiment:
    date: date
    sector: str
    mean_score: float
    article_count: int
    imputed: bool

    def __post_init__(self):
        if self.imputed != (self.article_count == 0):
            raise ValueError("imputed must hold exactly when no articles contribute")
        if self.imputed and self.mean_score != 0.0:
            raise ValueError("imputed records must carry a zero score")
        if not (-10.0 <= self.mean_score <= 10.0):
            raise ValueError(f"mean score {self.mean_score} outside [-10, 10]")


@dataclass(frozen=True)
class PanelRow:
    date: date
    close: float
    sentiment: float
    imputed: bool


@dataclass
class AlignedPanel:
    """Per-ETF merged table of trading date, close, and daily sentiment."""

    etf: EtfId
    rows: list[PanelRow]

    def __post_init__(self):
        if len(self.rows) < 2:
            raise ValueError(f"panel for {self.etf.symbol} needs at least 2 rows")

    @property
    def dates(self) -> list[date]:
        return [r.date for r in self.rows]

    @property
    def closes(self) -> list[float]:
        return [r.close for r in self.rows]

    @property
    def sentiments(self) -> list[float]:
        return [r.sentiment for r in self.rows]

    def n_sentiment_days(self) -> int:
        return sum(1 for r in self.rows if not r.imputed)


def link_article_sectors(meta: ArticleMeta, sector_map: SectorMap) -> frozenset[str]:
    """Map an article's related ETFs to the deduplicated set of sectors.

    An article relevant to several ETFs of one sector counts once for
    that sector; unmapped symbols raise MissingEtfError.
    """
    return frozenset(sector_map.lookup(symbol) for symbol in meta.related_etfs)


def roll_forward_dates(articles: list[ScoredArticle],
                       trading_dates: list[date]) -> dict[str, date]:
    """Optional reassignment of off-calendar article dates to the next
    trading date; returns url -> effective date."""
    ordered = sorted(trading_dates)
    mapping: dict[str, date] = {}
    for scored in articles:
        d = scored.article.meta.published_at
        if d in ordered:
            mapping[scored.article.meta.url] = d
            continue
        nxt = next((t for t in ordered if t > d), None)
        if nxt is not None:
            mapping[scored.article.meta.url] = nxt
    return mapping


def aggregate_daily_sentiment(scored: list[ScoredArticle], sectors: set[str],
                              dates: list[date],
                              date_override: dict[str, date] | None = None,
                              ) -> list[DailySectorSentiment]:
    """One record per (date, sector) pair in the cross product.

    Scores are integers, so the sum is exact and the mean is invariant
    under any reordering of the input articles.
    """
    if not dates:
        raise ValueError("dates must be non-empty")
    buckets: dict[tuple[date, str], list[int]] = {}
    for item in scored:
        d = item.article.meta.published_at
        if date_override is not None:
            d = date_override.get(item.article.meta.url, d)
        for sector in item.sectors:
            buckets.setdefault((d, sector), []).append(item.score.value)
    records = []
    for d in dates:
        for sector in sorted(sectors):
            values = buckets.get((d, sector), [])
            count = len(values)
            mean = sum(values) / count if count else 0.0
            records.append(DailySectorSentiment(
                date=d, sector=sector, mean_score=mean,
                article_count=count, imputed=count == 0))
    return records


def merge_price_sentiment(prices: PriceSeries, daily: list[DailySectorSentiment],
                          sector_map: SectorMap) -> AlignedPanel:
    """Join daily sector sentiment onto an ETF's trading dates.

    Every trading date must have a record for the ETF's sector; a hole
    is a coverage gap (an aggregation bug), not an imputed zero.
    """
    sector = sector_map.lookup(prices.etf.symbol)
    by_date = {r.date: r for r in daily if r.sector == sector}
    rows = []
    for d, close in zip(prices.dates, prices.closes):
        record = by_date.get(d)
        if record is None:
            raise CoverageGapError(
                f"no daily sentiment record for ({d}, {sector}) while merging "
                f"{prices.etf.symbol}")
        rows.append(PanelRow(date=d, close=close, sentiment=record.mean_score,
                             imputed=record.imputed))
    return AlignedPanel(etf=prices.etf, rows=rows)


PANEL_COLUMNS = ["date", "close", "sentiment", "imputed"]


def write_panel(panel: AlignedPanel, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(PANEL_COLUMNS)
        for row in panel.rows:
            writer.writerow([row.date.isoformat(), repr(row.close),
                             repr(row.sentiment), str(row.imputed).lower()])


def read_panel(path: Path, etf: EtfId) -> AlignedPanel:
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for record in csv.DictReader(fh):
            rows.append(PanelRow(
                date=date.fromisoformat(record["date"]),
                close=float(record["close"]),
                sentiment=float(record["sentiment"]),
                imputed=record["imputed"] == "true"))
    return AlignedPanel(etf=etf, rows=rows)


def coverage_pct(n_sentiment_days: int, n_price_days: int) -> float:
    """Share of trading days with at least one scored article, in percent
    rounded to 2 decimals."""
    return round(100.0 * n_sentiment_days / n_price_days, 2)


@dataclass(frozen=True)
class CoverageRow:
    etf: str
    n_sentiment_days: int
    n_price_days: int
    coverage_pct: float


def coverage_report(panels: list[AlignedPanel]) -> list[CoverageRow]:
    if not panels:
        raise ValueError("coverage report needs at least one panel")
    rows = []
    for panel in sorted(panels, key=lambda p: p.etf.symbol):
        n_sent = panel.n_sentiment_days()
        n_price = len(panel.rows)
        rows.append(CoverageRow(
            etf=panel.etf.symbol, n_sentiment_days=n_sent, n_price_days=n_price,
            coverage_pct=coverage_pct(n_sent, n_price)))
    return rows


def write_coverage(rows: list[CoverageRow], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["etf", "n_sentiment_days", "n_price_days", "coverage_pct"])
        for row in rows:
            writer.writerow([row.etf, row.n_sentiment_days, row.n_price_days,
                             f"{row.coverage_pct:.2f}"])
