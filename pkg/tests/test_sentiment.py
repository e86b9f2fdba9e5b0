import json
from datetime import date

import pytest
from hypothesis import given, strategies as st

from etfcast.errors import CoverageGapError, MissingEtfError, SchemaViolationError
from etfcast.ingestion.types import ArticleMeta, EtfId, PriceSeries, RawArticle, SectorMap
from etfcast.sentiment.panel import (
    AlignedPanel,
    DailySectorSentiment,
    PanelRow,
    aggregate_daily_sentiment,
    coverage_pct,
    coverage_report,
    link_article_sectors,
    merge_price_sentiment,
    read_panel,
    roll_forward_dates,
    write_panel,
)
from etfcast.sentiment.scoring import (
    KeywordScoringClient,
    ScoreCache,
    ScoredArticle,
    SentimentScore,
    score_article,
)


def make_article(url="https://n.example/1", body="Markets surged on profit news.",
                 published=date(2024, 3, 4), etfs=("SPY",)):
    meta = ArticleMeta(url=url, title="t", published_at=published,
                       related_etfs=frozenset(etfs))
    return RawArticle(meta=meta, body=body)


def scored(article, value, sectors=("us broad market",)):
    return ScoredArticle(
        article=article,
        score=SentimentScore(value=value, reason="r", model_id="m",
                             scored_at="2024-01-01T00:00:00+00:00"),
        sectors=frozenset(sectors))


class StubClient:
    model_id = "stub-1"

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = 0

    def score_raw(self, article, prompt, repair_hint=None):
        raw = self.responses[self.calls]
        self.calls += 1
        return raw


def test_score_bounds_enforced():
    with pytest.raises(ValueError):
        SentimentScore(value=11, reason="r", model_id="m", scored_at="s")
    with pytest.raises(ValueError):
        SentimentScore(value=-11, reason="r", model_id="m", scored_at="s")
    with pytest.raises(ValueError):
        SentimentScore(value=3, reason="  ", model_id="m", scored_at="s")


def test_keyword_client_is_deterministic_and_bounded():
    client = KeywordScoringClient()
    art = make_article(body="Stocks surged and rallied to a record as profits beat.")
    raw1 = client.score_raw(art, "p")
    raw2 = client.score_raw(art, "p")
    assert raw1 == raw2
    payload = json.loads(raw1)
    assert -10 <= payload["score"] <= 10
    assert payload["score"] > 0

    bear = make_article(body="Shares plunged amid losses, fears and a selloff.")
    assert json.loads(client.score_raw(bear, "p"))["score"] < 0


def test_score_article_repair_loop_recovers(tmp_path):
    cache = ScoreCache(tmp_path)
    client = StubClient(["not json at all", '{"score": 4, "reason": "ok"}'])
    score = score_article(make_article(), client, cache, repair_retries=2)
    assert score.value == 4
    assert client.calls == 2


def test_score_article_drops_after_retry_budget(tmp_path):
    cache = ScoreCache(tmp_path)
    client = StubClient(['{"score": 99, "reason": "x"}'] * 3)
    with pytest.raises(SchemaViolationError):
        score_article(make_article(), client, cache, repair_retries=2)
    assert client.calls == 3


def test_score_article_rejects_bool_and_float_scores(tmp_path):
    cache = ScoreCache(tmp_path)
    for bad in ['{"score": true, "reason": "x"}', '{"score": 3.5, "reason": "x"}',
                '{"score": 3, "reason": ""}', '[1, 2]']:
        client = StubClient([bad] * 1)
        with pytest.raises(SchemaViolationError):
            score_article(make_article(), client, cache, repair_retries=0)


def test_score_cache_replays_without_client_calls(tmp_path):
    cache = ScoreCache(tmp_path)
    art = make_article()
    client = StubClient(['{"score": -2, "reason": "gloomy"}'])
    first = score_article(art, client, cache)
    assert client.calls == 1

    class Exploding:
        model_id = "stub-1"

        def score_raw(self, article, prompt, repair_hint=None):
            raise AssertionError("cache hit must not call the client")

    second = score_article(art, Exploding(), cache)
    assert second.value == first.value
    assert second.scored_at == first.scored_at


def test_cache_key_includes_prompt_version_and_model(tmp_path):
    cache = ScoreCache(tmp_path)
    art = make_article()
    a = StubClient(['{"score": 1, "reason": "a"}'])
    score_article(art, a, cache, prompt_version="v1")
    b = StubClient(['{"score": 2, "reason": "b"}'])
    b.model_id = "other-model"
    other = score_article(art, b, cache, prompt_version="v1")
    assert b.calls == 1
    assert other.value == 2


def test_link_article_sectors_deduplicates():
    smap = SectorMap({"SPY": "us broad market", "VOO": "us broad market",
                      "XLE": "oil and gas"})
    meta = ArticleMeta(url="u", title="t", published_at=date(2024, 1, 2),
                       related_etfs=frozenset({"SPY", "VOO", "XLE"}))
    assert link_article_sectors(meta, smap) == {"us broad market", "oil and gas"}
    bad = ArticleMeta(url="u2", title="t", published_at=date(2024, 1, 2),
                      related_etfs=frozenset({"QQQ"}))
    with pytest.raises(MissingEtfError):
        link_article_sectors(bad, smap)


def test_roll_forward_moves_weekend_articles():
    trading = [date(2024, 3, 4), date(2024, 3, 5), date(2024, 3, 6)]
    weekday = scored(make_article(url="a", published=date(2024, 3, 4)), 1)
    saturday = scored(make_article(url="b", published=date(2024, 3, 2)), 1)
    after_end = scored(make_article(url="c", published=date(2024, 3, 9)), 1)
    mapping = roll_forward_dates([weekday, saturday, after_end], trading)
    assert mapping["a"] == date(2024, 3, 4)
    assert mapping["b"] == date(2024, 3, 4)
    assert "c" not in mapping


def test_aggregate_mean_and_imputation():
    dates = [date(2024, 3, 4), date(2024, 3, 5)]
    arts = [
        scored(make_article(url="a", published=date(2024, 3, 4)), 4),
        scored(make_article(url="b", published=date(2024, 3, 4)), -1),
        # different sector, must not leak into us broad market
        scored(make_article(url="c", published=date(2024, 3, 4)), 9,
               sectors=("oil and gas",)),
    ]
    records = aggregate_daily_sentiment(arts, {"us broad market"}, dates)
    assert len(records) == 2
    day1, day2 = records
    assert day1.mean_score == pytest.approx(1.5)
    assert day1.article_count == 2
    assert not day1.imputed
    assert day2.mean_score == 0.0
    assert day2.imputed


@given(st.lists(st.integers(min_value=-10, max_value=10), min_size=1, max_size=30),
       st.randoms())
def test_aggregate_mean_order_invariant(values, rnd):
    dates = [date(2024, 3, 4)]
    arts = [scored(make_article(url=f"u{i}", published=dates[0]), v)
            for i, v in enumerate(values)]
    base = aggregate_daily_sentiment(arts, {"us broad market"}, dates)
    shuffled = list(arts)
    rnd.shuffle(shuffled)
    again = aggregate_daily_sentiment(shuffled, {"us broad market"}, dates)
    assert base[0].mean_score == again[0].mean_score
    assert -10.0 <= base[0].mean_score <= 10.0


def test_aggregate_respects_date_override():
    dates = [date(2024, 3, 4)]
    art = scored(make_article(url="w", published=date(2024, 3, 2)), 6)
    plain = aggregate_daily_sentiment([art], {"us broad market"}, dates)
    assert plain[0].imputed
    rolled = aggregate_daily_sentiment([art], {"us broad market"}, dates,
                                       date_override={"w": date(2024, 3, 4)})
    assert rolled[0].mean_score == 6.0


def test_merge_attaches_sector_records():
    smap = SectorMap({"SPY": "us broad market"})
    etf = EtfId(symbol="SPY", sector="us broad market")
    prices = PriceSeries(etf=etf, dates=[date(2024, 3, 4), date(2024, 3, 5)],
                         closes=[500.0, 501.5])
    daily = [
        DailySectorSentiment(date=date(2024, 3, 4), sector="us broad market",
                             mean_score=2.0, article_count=1, imputed=False),
        DailySectorSentiment(date=date(2024, 3, 5), sector="us broad market",
                             mean_score=0.0, article_count=0, imputed=True),
    ]
    panel = merge_price_sentiment(prices, daily, smap)
    assert panel.sentiments == [2.0, 0.0]
    assert [r.imputed for r in panel.rows] == [False, True]

    with pytest.raises(CoverageGapError):
        merge_price_sentiment(prices, daily[:1], smap)


def test_panel_roundtrip_exact(tmp_path):
    etf = EtfId(symbol="SPY", sector="us broad market")
    panel = AlignedPanel(etf=etf, rows=[
        PanelRow(date=date(2024, 3, 4), close=500.123456789, sentiment=1.5,
                 imputed=False),
        PanelRow(date=date(2024, 3, 5), close=501.0, sentiment=0.0, imputed=True),
    ])
    path = tmp_path / "SPY.csv"
    write_panel(panel, path)
    back = read_panel(path, etf)
    assert back.dates == panel.dates
    assert back.closes == panel.closes
    assert back.sentiments == panel.sentiments
    assert [r.imputed for r in back.rows] == [False, True]


# Published coverage pairs for the 29-symbol universe; the printed
# percentages must come out exactly at 2 decimals.
COVERAGE_PAIRS = {
    "BBJP": (55, 436), "CLOU": (0, 433), "DXJ": (55, 436), "EUFN": (55, 436),
    "EWJ": (55, 436), "EZU": (55, 436), "FEZ": (55, 436), "FLJP": (55, 436),
    "IEUR": (55, 436), "IVLU": (55, 436), "IVV": (55, 436), "IXJ": (1, 433),
    "KRE": (55, 436), "QQQ": (0, 433), "REZ": (25, 434), "SPY": (55, 436),
    "SRVR": (25, 434), "VDE": (104, 449), "VFH": (55, 436), "VGK": (55, 436),
    "VGT": (0, 433), "VHT": (1, 433), "VOO": (55, 436), "VTI": (55, 436),
    "XLE": (104, 449), "XLF": (55, 436), "XLRE": (25, 434), "XLV": (1, 433),
    "XOP": (104, 449),
}

EXPECTED_PCT = {(55, 436): 12.61, (104, 449): 23.16, (25, 434): 5.76,
                (1, 433): 0.23, (0, 433): 0.00}


def test_coverage_pct_known_pairs():
    for pair, expected in EXPECTED_PCT.items():
        assert coverage_pct(*pair) == expected


def test_coverage_report_full_universe():
    for symbol, (n_sent, n_price) in COVERAGE_PAIRS.items():
        assert coverage_pct(n_sent, n_price) == EXPECTED_PCT[(n_sent, n_price)], symbol


def test_coverage_report_sorts_by_symbol():
    etf_a = EtfId(symbol="AAA", sector="s")
    etf_b = EtfId(symbol="BBB", sector="s")

    def tiny_panel(etf, imputed_flags):
        rows = [PanelRow(date=date(2024, 3, 4 + i), close=10.0, sentiment=0.0,
                         imputed=f) for i, f in enumerate(imputed_flags)]
        return AlignedPanel(etf=etf, rows=rows)

    report = coverage_report([tiny_panel(etf_b, [True, True]),
                              tiny_panel(etf_a, [False, True])])
    assert [r.etf for r in report] == ["AAA", "BBB"]
    assert report[0].n_sentiment_days == 1
    assert report[0].coverage_pct == 50.0
    assert report[1].coverage_pct == 0.0
