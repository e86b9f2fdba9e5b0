"""End-to-end orchestration: ingest, score, panel, evaluate, report, plot.

The run directory is keyed by the config digest, so re-running an
unchanged config resumes: raw stores, the score cache, sweep results,
combo results, and checkpoints are all content-addressed or
unit-addressed and short-circuit on hit. A changed config digests to a
different directory and starts clean.

Exit codes: 0 success, 1 invalid config, 2 a stage failed, 3 the run
completed but some sweep units or combos failed.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .config import RunConfig, config_digest, run_id_of, validate_config
from .errors import (
    ConfigError,
    EtfcastError,
    MissingEtfError,
    SchemaViolationError,
    StageFailureError,
)
from .evaluation.ablation import (
    AblationOutcome,
    ModelRoster,
    PlanParams,
    SeriesViews,
    _combo_to_dict,
    run_ablation,
)
from .evaluation.reporting import (
    build_summary,
    render_summary_text,
    write_summary_csv,
)
from .features import DeltaSeries, to_deltas
from .ingestion.news import (
    FixtureNewsSource,
    HttpNewsSource,
    harvest_bodies,
    list_articles,
)
from .ingestion.prices import FixturePriceSource, HttpPriceSource, fetch_prices
from .ingestion.sectors import load_sector_map
from .ingestion.stores import NewsStore, PriceStore
from .plotting import plot_combo
from .sentiment.panel import (
    aggregate_daily_sentiment,
    coverage_report,
    link_article_sectors,
    merge_price_sentiment,
    roll_forward_dates,
    write_coverage,
    write_panel,
)
from .sentiment.scoring import (
    HttpScoringClient,
    KeywordScoringClient,
    ScoreCache,
    ScoredArticle,
    score_article,
)

logger = logging.getLogger(__name__)

STAGES = ("ingest_prices", "ingest_news", "score", "panel", "evaluate",
          "report", "plot")

EXIT_OK = 0
EXIT_CONFIG_INVALID = 1
EXIT_STAGE_FAILURE = 2
EXIT_PARTIAL = 3


@dataclass
class PipelineContext:
    config: RunConfig
    run_id: str
    digest: str
    run_dir: Path
    sector_map: object
    price_store: PriceStore
    news_store: NewsStore
    price_source: object
    news_source: object
    scoring_client: object
    score_cache: ScoreCache
    prices: dict = field(default_factory=dict)
    metas: list = field(default_factory=list)
    articles: list = field(default_factory=list)
    harvest_skips: list = field(default_factory=list)
    scored: list = field(default_factory=list)
    score_drops: list = field(default_factory=list)
    panels: dict = field(default_factory=dict)
    coverage: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    outcome: AblationOutcome | None = None
    summary_paths: dict = field(default_factory=dict)
    plot_paths: list = field(default_factory=list)
    stage_records: list = field(default_factory=list)


def setup_context(config: RunConfig) -> PipelineContext:
    validate_config(config)
    try:
        sector_map = load_sector_map(config.sector_map)
    except (OSError, ValueError, EtfcastError) as exc:
        raise ConfigError(f"sector map {config.sector_map}: {exc}") from exc
    for symbol in config.symbols:
        if symbol not in sector_map:
            raise ConfigError(f"symbol {symbol} missing from sector map "
                              f"{config.sector_map}")

    data_root = Path(config.data_root)
    run_dir = Path(config.output_dir) / run_id_of(config)
    run_dir.mkdir(parents=True, exist_ok=True)

    if config.sources.kind == "fixture":
        fixture_dir = Path(config.sources.fixture_dir)
        price_source = FixturePriceSource(fixture_dir)
        news_source = FixtureNewsSource(fixture_dir)
    else:
        price_source = HttpPriceSource(config.sources.price_url_template)
        news_source = HttpNewsSource(config.sources.news_search_template)

    if config.scoring.client == "keyword":
        scoring_client = KeywordScoringClient()
    else:
        scoring_client = HttpScoringClient(
            base_url=config.scoring.base_url,
            model_id=config.scoring.model_id,
            api_key_env=config.scoring.api_key_env)

    return PipelineContext(
        config=config,
        run_id=run_id_of(config),
        digest=config_digest(config),
        run_dir=run_dir,
        sector_map=sector_map,
        price_store=PriceStore(data_root),
        news_store=NewsStore(data_root),
        price_source=price_source,
        news_source=news_source,
        scoring_client=scoring_client,
        score_cache=ScoreCache(data_root),
    )


def stage_ingest_prices(ctx: PipelineContext) -> None:
    start, end = ctx.config.window()
    for symbol in ctx.config.symbols:
        etf = ctx.sector_map.etf(symbol)
        ctx.prices[symbol] = fetch_prices(etf, start, end, ctx.price_source,
                                          ctx.price_store)


def stage_ingest_news(ctx: PipelineContext) -> None:
    start, end = ctx.config.window()
    seen: dict[str, object] = {}
    for symbol in ctx.config.symbols:
        etf = ctx.sector_map.etf(symbol)
        for meta in list_articles(etf, start, end, ctx.news_source,
                                  store=ctx.news_store):
            seen.setdefault(meta.url, meta)
    ctx.metas = [seen[url] for url in sorted(seen)]
    report = harvest_bodies(ctx.metas, ctx.news_source, ctx.news_store)
    ctx.articles = report.articles
    ctx.harvest_skips = list(report.skipped)
    for url, reason in ctx.harvest_skips:
        logger.warning("skipped article %s: %s", url, reason)


def stage_score(ctx: PipelineContext) -> None:
    for article in ctx.articles:
        try:
            score = score_article(
                article, ctx.scoring_client, ctx.score_cache,
                prompt_version=ctx.config.scoring.prompt_version,
                repair_retries=ctx.config.scoring.repair_retries)
        except SchemaViolationError as exc:
            ctx.score_drops.append((article.meta.url, str(exc)))
            logger.warning("dropped article %s: %s", article.meta.url, exc)
            continue
        try:
            sectors = link_article_sectors(article.meta, ctx.sector_map)
        except MissingEtfError:
            # articles can reference tickers outside this run's universe;
            # keep the sectors we do know about
            known = frozenset(s for s in article.meta.related_etfs
                              if s in ctx.sector_map)
            if not known:
                ctx.score_drops.append(
                    (article.meta.url, "no related ETF in sector map"))
                continue
            sectors = frozenset(ctx.sector_map.lookup(s) for s in known)
        ctx.scored.append(ScoredArticle(article=article, score=score,
                                        sectors=sectors))


def stage_panel(ctx: PipelineContext) -> None:
    panels_dir = ctx.run_dir / "panels"
    panels = []
    for symbol in ctx.config.symbols:
        prices = ctx.prices[symbol]
        override = None
        if ctx.config.roll_forward:
            override = roll_forward_dates(ctx.scored, prices.dates)
        sector = ctx.sector_map.lookup(symbol)
        daily = aggregate_daily_sentiment(ctx.scored, {sector}, prices.dates,
                                          date_override=override)
        panel = merge_price_sentiment(prices, daily, ctx.sector_map)
        ctx.panels[symbol] = panel
        panels.append(panel)
        write_panel(panel, panels_dir / f"{symbol}.csv")
    ctx.coverage = coverage_report(panels)
    write_coverage(ctx.coverage, ctx.run_dir / "coverage.csv")


def stage_evaluate(ctx: PipelineContext, combine_stages: bool = True) -> None:
    ctx.series = {symbol: to_deltas(panel)
                  for symbol, panel in ctx.panels.items()}
    roster = ModelRoster(
        regressors=tuple(ctx.config.roster.regressors),
        classifiers=tuple(ctx.config.roster.classifiers),
        per_stage_sentiment=ctx.config.roster.per_stage_sentiment)
    plan_params = PlanParams(
        horizon=ctx.config.walk_forward.horizon,
        train_fraction=ctx.config.walk_forward.train_fraction,
        min_train=ctx.config.walk_forward.min_train)
    workers = ctx.config.max_workers or os.cpu_count() or 1
    ctx.outcome = run_ablation(
        ctx.series, roster, plan_params, ctx.config.lookback,
        ctx.config.seed, workdir=ctx.run_dir, max_workers=workers,
        grid_overrides=ctx.config.grids, combine_stages=combine_stages)


def stage_report(ctx: PipelineContext) -> None:
    combos = ctx.outcome.combo_results
    for space in ("price", "delta"):
        table = build_summary(combos, space=space)
        text = render_summary_text(table)
        suffix = "" if space == "price" else "_delta"
        text_path = ctx.run_dir / f"summary{suffix}.txt"
        text_path.write_text(text, encoding="utf-8")
        csv_path = ctx.run_dir / f"summary{suffix}.csv"
        write_summary_csv(table, csv_path)
        ctx.summary_paths[space] = str(text_path)


def stage_plot(ctx: PipelineContext) -> None:
    plots_dir = ctx.run_dir / "plots"
    views = {symbol: SeriesViews(series, ctx.config.lookback)
             for symbol, series in ctx.series.items()}
    for combo in ctx.outcome.combo_results:
        if combo.status != "ok":
            continue
        path = plot_combo(views[combo.etf], combo,
                          plots_dir / f"{combo.combo_name()}.png")
        ctx.plot_paths.append(str(path))


def _mark_stage(ctx: PipelineContext, name: str, status: str,
                detail: str | None = None) -> None:
    ctx.stage_records.append({"name": name, "status": status,
                              "detail": detail})
    state_dir = ctx.run_dir / "state"
    state_dir.mkdir(parents=True, exist_ok=True)
    if status == "done":
        (state_dir / f"{name}.done").write_text(ctx.digest + "\n",
                                                encoding="utf-8")


def write_run_log(ctx: PipelineContext, status: str, started_at: str,
                  finished_at: str) -> Path:
    combos = []
    if ctx.outcome is not None:
        combos = [_combo_to_dict(c) for c in ctx.outcome.combo_results]
        combos.sort(key=lambda c: (c["etf"], c["classifier_family"],
                                   c["regressor_family"], c["variant"]))
    sweep_failures = []
    if ctx.outcome is not None:
        for result in ctx.outcome.stage_results:
            if result.status != "ok":
                sweep_failures.append({"unit": result.unit_name(),
                                       "error": result.error})
    doc = {
        "run_id": ctx.run_id,
        "config_digest": ctx.digest,
        "seed": ctx.config.seed,
        "status": status,
        "stages": ctx.stage_records,
        "coverage": [
            {"etf": row.etf, "n_sentiment_days": row.n_sentiment_days,
             "n_price_days": row.n_price_days,
             "coverage_pct": row.coverage_pct}
            for row in ctx.coverage],
        "articles": {
            "harvested": len(ctx.articles),
            "scored": len(ctx.scored),
            "harvest_skips": [list(s) for s in ctx.harvest_skips],
            "score_drops": [list(d) for d in ctx.score_drops],
        },
        "sweep_failures": sweep_failures,
        "combos": combos,
        "timestamps": {"started_at": started_at, "finished_at": finished_at},
    }
    path = ctx.run_dir / "run_log.json"
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
    return path


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_stages(ctx: PipelineContext, upto: str,
               combine_stages: bool = True) -> None:
    """Execute stages in order through ``upto``; raises StageFailureError."""
    if upto not in STAGES:
        raise ConfigError(f"unknown stage {upto!r}")
    stage_functions = {
        "ingest_prices": stage_ingest_prices,
        "ingest_news": stage_ingest_news,
        "score": stage_score,
        "panel": stage_panel,
        "evaluate": lambda c: stage_evaluate(c, combine_stages=combine_stages),
        "report": stage_report,
        "plot": stage_plot,
    }
    for name in STAGES:
        try:
            stage_functions[name](ctx)
        except EtfcastError as exc:
            _mark_stage(ctx, name, "failed", str(exc))
            raise StageFailureError(name, str(exc)) from exc
        _mark_stage(ctx, name, "done")
        if name == upto:
            return


def has_partial_failures(ctx: PipelineContext) -> bool:
    if ctx.outcome is None:
        return False
    if any(r.status != "ok" for r in ctx.outcome.stage_results):
        return True
    return any(c.status != "ok" for c in ctx.outcome.combo_results)


def run(config: RunConfig) -> int:
    """Full pipeline; returns the process exit code."""
    started_at = _utc_now()
    try:
        ctx = setup_context(config)
    except ConfigError as exc:
        logger.error("invalid config: %s", exc)
        return EXIT_CONFIG_INVALID
    try:
        run_stages(ctx, upto="plot")
    except StageFailureError as exc:
        logger.error("stage %s failed: %s", exc.stage, exc)
        write_run_log(ctx, "failed", started_at, _utc_now())
        return EXIT_STAGE_FAILURE
    partial = has_partial_failures(ctx)
    write_run_log(ctx, "partial" if partial else "ok", started_at, _utc_now())
    return EXIT_PARTIAL if partial else EXIT_OK
