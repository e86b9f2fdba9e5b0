"""Seeded synthetic data: series with known structure for oracle tests
and a small self-contained fixture corpus for end-to-end runs.

Every generator takes an explicit seed and builds its own Generator, so
test oracles are reproducible without any global RNG state.
"""

from __future__ import annotations

import json
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .features import DeltaSeries
from .ingestion.stores import url_hash
from .ingestion.types import EtfId

SYNTHETIC_SECTOR = "synthetic"


def trading_dates(start: date, n: int) -> list[date]:
    """n consecutive weekdays beginning at the first weekday >= start."""
    out: list[date] = []
    d = start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += timedelta(days=1)
    return out


def ar1_series(phi: float, n: int, sigma: float, seed: int,
               burn_in: int = 100) -> np.ndarray:
    """AR(1) process x_t = phi * x_{t-1} + eps_t with known coefficient."""
    rng = np.random.default_rng(seed)
    eps = rng.normal(0.0, sigma, size=n + burn_in)
    x = np.zeros(n + burn_in)
    for t in range(1, n + burn_in):
        x[t] = phi * x[t - 1] + eps[t]
    return x[burn_in:]


def series_from_deltas(deltas: np.ndarray, sentiments: np.ndarray | None = None,
                       symbol: str = "SYN", first_close: float = 100.0,
                       start: date = date(2024, 1, 2)) -> DeltaSeries:
    """Wrap a delta vector as a DeltaSeries on a weekday calendar."""
    deltas = np.asarray(deltas, dtype=np.float64)
    if sentiments is None:
        sentiments = np.zeros(len(deltas))
    sentiments = np.asarray(sentiments, dtype=np.float64)
    if len(sentiments) != len(deltas):
        raise ValueError(f"{len(sentiments)} sentiments vs {len(deltas)} deltas")
    dates = trading_dates(start, len(deltas) + 1)
    return DeltaSeries(etf=EtfId(symbol=symbol, sector=SYNTHETIC_SECTOR),
                       dates=dates[1:], deltas=deltas, sentiments=sentiments,
                       first_close=first_close)


def random_walk_series(n: int, seed: int, symbol: str = "SYN",
                       scale: float = 0.5, first_close: float = 100.0) -> DeltaSeries:
    rng = np.random.default_rng(seed)
    deltas = rng.normal(0.0, scale, size=n)
    return series_from_deltas(deltas, symbol=symbol, first_close=first_close)


def planted_sentiment_series(n: int, seed: int, noise: float = 0.1,
                             symbol: str = "PLNT",
                             magnitude_scale: float = 0.4) -> DeltaSeries:
    """Series where yesterday's sentiment sign drives today's delta sign.

    sign(delta_t) = sign(sentiment_{t-1}), flipped with probability
    ``noise``; magnitudes are drawn independently of sentiment, so price
    history alone carries no directional signal.
    """
    rng = np.random.default_rng(seed)
    magnitudes = np.abs(rng.normal(0.0, magnitude_scale, size=n)) + 0.01
    values = rng.integers(1, 11, size=n)
    signs_of_sent = rng.choice([-1, 1], size=n)
    sentiments = (values * signs_of_sent).astype(np.float64)
    flips = rng.random(n) < noise
    deltas = np.empty(n)
    deltas[0] = magnitudes[0] * rng.choice([-1, 1])
    for t in range(1, n):
        sign = 1.0 if sentiments[t - 1] > 0 else -1.0
        if flips[t]:
            sign = -sign
        deltas[t] = magnitudes[t] * sign
    return series_from_deltas(deltas, sentiments, symbol=symbol,
                              first_close=150.0)


def learnable_sequence(n: int, seed: int, noise: float = 0.01,
                       symbol: str = "LRN") -> DeltaSeries:
    """delta_t = mean of the previous five deltas plus tiny noise.

    The mapping from a 5-lag window to its target is almost exactly
    linear, so a small network's training loss falls steadily on it.
    """
    rng = np.random.default_rng(seed)
    deltas = np.empty(n)
    deltas[:5] = rng.normal(0.0, 1.0, size=5)
    for t in range(5, n):
        deltas[t] = deltas[t - 5:t].mean() + rng.normal(0.0, noise)
    return series_from_deltas(deltas, symbol=symbol)


_POSITIVE_WORDS = ("surge", "rally", "profit", "growth", "strong", "upgrade",
                   "bullish", "rebound", "beat", "soar")
_NEGATIVE_WORDS = ("plunge", "loss", "drop", "decline", "weak", "downgrade",
                   "bearish", "slump", "fear", "miss")
_FILLER = ("The fund tracked broader market moves during the session.",
           "Analysts pointed to macro data and positioning.",
           "Trading volume was close to its monthly average.",
           "The desk noted rotation between styles.")


def _article_body(rng: np.random.Generator, polarity: int) -> str:
    words = _POSITIVE_WORDS if polarity > 0 else _NEGATIVE_WORDS
    chosen = list(rng.choice(words, size=min(abs(polarity), 3), replace=False))
    sentences = [
        f"Shares posted a {chosen[0]} as the quarter closed.",
        str(rng.choice(_FILLER)),
    ]
    for extra in chosen[1:]:
        sentences.append(f"Commentary flagged another {extra} for the group.")
    return " ".join(sentences)


def write_fixture_corpus(root: str | Path, symbols: tuple[str, ...] = ("AAA", "BBB"),
                         n_days: int = 130, n_articles: int = 12,
                         seed: int = 7, start: date = date(2024, 1, 2)) -> dict:
    """Build a self-contained fixture tree for offline end-to-end runs.

    Layout::

        <root>/prices/<SYMBOL>.csv      date,close rows
        <root>/news/index.json          article metadata list
        <root>/news/pages/<hash>.html   one page per article
        <root>/sectors.yaml             symbol -> sector map

    Returns a manifest dict (symbols, window, article urls).
    """
    root = Path(root)
    rng = np.random.default_rng(seed)
    dates = trading_dates(start, n_days)

    (root / "prices").mkdir(parents=True, exist_ok=True)
    for k, symbol in enumerate(symbols):
        closes = 100.0 + 10.0 * k + np.cumsum(rng.normal(0.0, 0.5, size=n_days))
        closes = np.maximum(closes, 5.0)
        lines = ["date,close"]
        lines += [f"{d.isoformat()},{c:.4f}" for d, c in zip(dates, closes)]
        (root / "prices" / f"{symbol}.csv").write_text(
            "\n".join(lines) + "\n", encoding="utf-8")

    sectors = {symbol: f"sector {chr(ord('a') + k % 3)}"
               for k, symbol in enumerate(symbols)}
    sector_lines = [f"{symbol}: {sectors[symbol]}" for symbol in symbols]
    (root / "sectors.yaml").write_text("\n".join(sector_lines) + "\n",
                                       encoding="utf-8")

    pages_dir = root / "news" / "pages"
    pages_dir.mkdir(parents=True, exist_ok=True)
    index = []
    for k in range(n_articles):
        url = f"https://news.example/story-{k:03d}"
        day = dates[int(rng.integers(1, n_days - 1))]
        if k % 5 == 4:
            # push some publication dates onto a weekend to exercise the
            # roll-forward onto the next trading day
            day = day + timedelta(days=(5 - day.weekday()) % 7 or 6)
        related = [symbols[int(rng.integers(0, len(symbols)))]]
        if k % 3 == 0 and len(symbols) > 1:
            other = symbols[(symbols.index(related[0]) + 1) % len(symbols)]
            related.append(other)
        polarity = int(rng.integers(1, 4)) * (1 if rng.random() < 0.5 else -1)
        body = _article_body(rng, polarity)
        page = f"<html><body><article><p>{body}</p></article></body></html>"
        (pages_dir / f"{url_hash(url)}.html").write_text(page, encoding="utf-8")
        index.append({
            "url": url,
            "title": f"Story {k:03d} on {', '.join(sorted(related))}",
            "published_at": day.isoformat(),
            "related_etfs": sorted(related),
        })
    (root / "news" / "index.json").write_text(
        json.dumps(index, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    return {
        "symbols": list(symbols),
        "start": dates[0].isoformat(),
        "end": dates[-1].isoformat(),
        "sectors": sectors,
        "urls": [r["url"] for r in index],
    }
