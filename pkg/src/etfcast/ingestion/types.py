"""Core ingestion domain types: identifiers, price series, article records."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from datetime import date

from ..errors import DuplicateEtfError, MissingEtfError

_SYMBOL_RE = re.compile(r"^[A-Z0-9.]+$")


@dataclass(frozen=True)
class EtfId:
    """An ETF ticker plus the sector it is assigned to."""

    symbol: str
    sector: str

    def __post_init__(self):
        if not self.symbol or not _SYMBOL_RE.match(self.symbol):
            raise ValueError(f"invalid ETF symbol: {self.symbol!r}")
        if not self.sector:
            raise ValueError(f"empty sector for {self.symbol}")


@dataclass
class PriceSeries:
    """Ordered daily closing prices for one ETF.

    Dates are strictly increasing trading dates; closes are positive and
    finite, one per date. A series shorter than two days is rejected.
    """

    etf: EtfId
    dates: list[date]
    closes: list[float]

    def __post_init__(self):
        if len(self.dates) != len(self.closes):
            raise ValueError("dates and closes must have equal length")
        if len(self.dates) < 2:
            raise ValueError(f"price series for {self.etf.symbol} has "
                             f"{len(self.dates)} rows, need at least 2")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise ValueError(f"dates not strictly increasing at {cur}")
        for d, c in zip(self.dates, self.closes):
            if not (math.isfinite(c) and c > 0.0):
                raise ValueError(f"non-positive or non-finite close {c} on {d}")

    def __len__(self):
        return len(self.dates)


@dataclass(frozen=True)
class ArticleMeta:
    """Article metadata as returned by a news source.

    ``related_etfs`` holds uppercase ticker symbols; sectors are attached
    later via the sector map.
    """

    url: str
    title: str
    published_at: date
    related_etfs: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.url:
            raise ValueError("article url must be non-empty")
        if not self.related_etfs:
            raise ValueError(f"article {self.url} has no related ETFs")


@dataclass(frozen=True)
class RawArticle:
    """Article metadata plus its full text body."""

    meta: ArticleMeta
    body: str

    def __post_init__(self):
        if not self.body.strip():
            raise ValueError(f"article {self.meta.url} has an empty body")


class SectorMap:
    """Total mapping from ETF symbol to sector name."""

    def __init__(self, entries: dict[str, str]):
        for symbol, sector in entries.items():
            if not sector or not str(sector).strip():
                raise ValueError(f"empty sector for {symbol}")
        self.entries = dict(entries)

    @classmethod
    def from_pairs(cls, pairs) -> "SectorMap":
        entries: dict[str, str] = {}
        for symbol, sector in pairs:
            if symbol in entries:
                raise DuplicateEtfError(f"ETF {symbol} listed more than once")
            entries[symbol] = sector
        return cls(entries)

    def lookup(self, symbol: str) -> str:
        try:
            return self.entries[symbol]
        except KeyError:
            raise MissingEtfError(f"ETF {symbol} not in sector map") from None

    def etf(self, symbol: str) -> EtfId:
        return EtfId(symbol=symbol, sector=self.lookup(symbol))

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.entries

    def __len__(self):
        return len(self.entries)
