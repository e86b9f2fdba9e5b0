"""Command line entry points.

Every command takes a YAML config and executes the pipeline up to its
stage; completed work is resumed from caches, so ``etfcast report`` after
``etfcast run`` recomputes nothing. Exit codes: 0 success, 1 invalid
config, 2 stage failure, 3 run completed with failed units.
"""

from __future__ import annotations

import logging
import sys

import click

from .config import RunConfig, load_config, run_id_of
from .errors import ConfigError, StageFailureError
from .pipeline import (
    EXIT_CONFIG_INVALID,
    EXIT_OK,
    EXIT_PARTIAL,
    EXIT_STAGE_FAILURE,
    PipelineContext,
    has_partial_failures,
    run,
    run_stages,
    setup_context,
    write_run_log,
    _utc_now,
)

logger = logging.getLogger(__name__)


def _load(config_path: str) -> RunConfig:
    try:
        return load_config(config_path)
    except ConfigError as exc:
        click.echo(f"invalid config: {exc}", err=True)
        sys.exit(EXIT_CONFIG_INVALID)


def _setup(config: RunConfig) -> PipelineContext:
    try:
        return setup_context(config)
    except ConfigError as exc:
        click.echo(f"invalid config: {exc}", err=True)
        sys.exit(EXIT_CONFIG_INVALID)


def _run_to(config_path: str, upto: str, combine_stages: bool = True) -> None:
    config = _load(config_path)
    ctx = _setup(config)
    started_at = _utc_now()
    try:
        run_stages(ctx, upto=upto, combine_stages=combine_stages)
    except StageFailureError as exc:
        click.echo(str(exc), err=True)
        write_run_log(ctx, "failed", started_at, _utc_now())
        sys.exit(EXIT_STAGE_FAILURE)
    if ctx.outcome is not None and has_partial_failures(ctx):
        write_run_log(ctx, "partial", started_at, _utc_now())
        click.echo(f"completed with failed units; artifacts in {ctx.run_dir}")
        sys.exit(EXIT_PARTIAL)
    write_run_log(ctx, "ok", started_at, _utc_now())
    click.echo(f"done; artifacts in {ctx.run_dir}")
    sys.exit(EXIT_OK)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def cli(verbose: bool) -> None:
    """Sentiment-augmented ETF forecasting pipeline."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


@cli.group()
def ingest() -> None:
    """Fetch raw inputs into the local stores."""


@ingest.command("prices")
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
def ingest_prices(config_path: str) -> None:
    """Fetch daily closes for every configured symbol."""
    _run_to(config_path, "ingest_prices")


@ingest.command("news")
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
def ingest_news(config_path: str) -> None:
    """Fetch article metadata and bodies for the configured window."""
    _run_to(config_path, "ingest_news")


@cli.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
def score(config_path: str) -> None:
    """Score harvested articles into bounded sentiment values."""
    _run_to(config_path, "score")


@cli.group()
def panel() -> None:
    """Panel assembly commands."""


@panel.command("build")
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
def panel_build(config_path: str) -> None:
    """Merge prices and daily sentiment into per-ETF panels."""
    _run_to(config_path, "panel")


@cli.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
def train(config_path: str) -> None:
    """Run the model sweeps without combining stages."""
    _run_to(config_path, "evaluate", combine_stages=False)


@cli.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
def evaluate(config_path: str) -> None:
    """Run sweeps plus two-stage combination across the ablation grid."""
    _run_to(config_path, "evaluate")


@cli.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
def report(config_path: str) -> None:
    """Write the summary tables (text and CSV, price and delta space)."""
    _run_to(config_path, "report")


@cli.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
def plot(config_path: str) -> None:
    """Render per-combo price overlay plots with data sidecars."""
    _run_to(config_path, "plot")


@cli.command("run")
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
def run_cmd(config_path: str) -> None:
    """Execute the full pipeline end to end."""
    config = _load(config_path)
    sys.exit(run(config))


@cli.command("show-id")
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
def show_id(config_path: str) -> None:
    """Print the run id a config resolves to."""
    config = _load(config_path)
    click.echo(run_id_of(config))


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
