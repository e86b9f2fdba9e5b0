from .scoring import (
    PROMPT_TEMPLATES,
    HttpScoringClient,
    KeywordScoringClient,
    ScoreCache,
    ScoredArticle,
    SentimentScore,
    score_article,
)
from .panel import (
    AlignedPanel,
    CoverageRow,
    DailySectorSentiment,
    PanelRow,
    aggregate_daily_sentiment,
    coverage_pct,
    coverage_report,
    link_article_sectors,
    merge_price_sentiment,
    read_panel,
    roll_forward_dates,
    write_coverage,
    write_panel,
)

__all__ = [
    "PROMPT_TEMPLATES", "HttpScoringClient", "KeywordScoringClient",
    "ScoreCache", "ScoredArticle", "SentimentScore", "score_article",
    "AlignedPanel", "CoverageRow", "DailySectorSentiment", "PanelRow",
    "aggregate_daily_sentiment", "coverage_pct", "coverage_report",
    "link_article_sectors", "merge_price_sentiment", "read_panel",
    "roll_forward_dates", "write_coverage", "write_panel",
]
