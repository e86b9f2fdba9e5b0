"""Config validation, full pipeline runs, resume behavior, CLI exit codes."""

from __future__ import annotations

import copy
import json
from pathlib import Path
from types import SimpleNamespace

import pytest
import yaml
from click.testing import CliRunner

from etfcast.cli import cli
from etfcast.config import config_digest, config_from_dict, load_config, run_id_of
from etfcast.errors import ConfigError
from etfcast.pipeline import (
    EXIT_OK,
    EXIT_PARTIAL,
    EXIT_STAGE_FAILURE,
    STAGES,
    run,
    run_stages,
    setup_context,
)
from etfcast.synthetic import write_fixture_corpus

SMALL_ROSTER = {"regressors": ["MA5", "SVR"],
                "classifiers": ["ALL_UP", "ALL_DOWN", "LOGREG"]}


def corpus_doc(workspace: Path, manifest: dict, **overrides) -> dict:
    doc = {
        "data_root": str(workspace / "data"),
        "output_dir": str(workspace / "runs"),
        "symbols": manifest["symbols"],
        "start": manifest["start"],
        "end": manifest["end"],
        "sector_map": str(workspace / "fixtures" / "sectors.yaml"),
        "sources": {"kind": "fixture",
                    "fixture_dir": str(workspace / "fixtures")},
        "scoring": {"client": "keyword"},
        "lookback": 5,
        "walk_forward": {"horizon": 10, "train_fraction": 0.6},
        "roster": copy.deepcopy(SMALL_ROSTER),
        "seed": 11,
    }
    doc.update(overrides)
    return doc


def write_doc(doc: dict, path: Path) -> Path:
    path.write_text(yaml.safe_dump(doc, sort_keys=True), encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def demo(tmp_path_factory):
    """One full pipeline run over a small fixture corpus."""
    workspace = tmp_path_factory.mktemp("demo")
    manifest = write_fixture_corpus(workspace / "fixtures", n_days=130,
                                    n_articles=12, seed=7)
    doc = corpus_doc(workspace, manifest)
    config_path = write_doc(doc, workspace / "config.yaml")
    config = load_config(config_path)
    code = run(config)
    run_dir = Path(doc["output_dir"]) / run_id_of(config)
    log = json.loads((run_dir / "run_log.json").read_text(encoding="utf-8"))
    return SimpleNamespace(workspace=workspace, manifest=manifest, doc=doc,
                           config_path=config_path, config=config, code=code,
                           run_dir=run_dir, log=log)


# ---------------------------------------------------------------------- config

def test_load_config_populates_sections(tmp_path):
    doc = {
        "data_root": "/tmp/d", "output_dir": "/tmp/o", "symbols": ["SPY"],
        "start": "2024-01-02", "end": "2024-06-28",
        "sector_map": "sectors.yaml",
        "sources": {"kind": "fixture", "fixture_dir": "/tmp/f"},
        "walk_forward": {"horizon": 15, "min_train": 40},
        "roster": {"regressors": ["MA5"]},
        "grids": {"SVR": [{"C": 1.0, "epsilon": 0.1, "kernel": "rbf"}]},
        "seed": 9,
    }
    config = load_config(write_doc(doc, tmp_path / "c.yaml"))
    assert config.symbols == ["SPY"]
    assert config.walk_forward.horizon == 15
    assert config.walk_forward.min_train == 40
    assert config.roster.regressors == ["MA5"]
    assert config.scoring.client == "keyword"  # section defaults fill in
    assert config.scoring.api_key_env == "ETFCAST_API_KEY"
    assert config.grids["SVR"][0]["C"] == 1.0
    assert config.window()[0].isoformat() == "2024-01-02"


def test_digest_ignores_key_order_and_feeds_run_id(tmp_path):
    doc = {
        "data_root": "/tmp/d", "output_dir": "/tmp/o", "symbols": ["SPY"],
        "start": "2024-01-02", "end": "2024-06-28",
        "sector_map": "sectors.yaml",
        "sources": {"kind": "fixture", "fixture_dir": "/tmp/f"},
    }
    a = load_config(write_doc(doc, tmp_path / "a.yaml"))
    shuffled = dict(reversed(list(doc.items())))
    (tmp_path / "b.yaml").write_text(yaml.safe_dump(shuffled, sort_keys=False),
                                     encoding="utf-8")
    b = load_config(tmp_path / "b.yaml")
    assert config_digest(a) == config_digest(b)
    assert run_id_of(a) == config_digest(a)[:12]
    assert len(run_id_of(a)) == 12

    c = load_config(write_doc({**doc, "seed": 43}, tmp_path / "c.yaml"))
    assert run_id_of(c) != run_id_of(a)


BASE_DOC = {
    "data_root": "/tmp/d", "output_dir": "/tmp/o", "symbols": ["SPY", "QQQ"],
    "start": "2024-01-02", "end": "2024-06-28", "sector_map": "sectors.yaml",
    "sources": {"kind": "fixture", "fixture_dir": "/tmp/f"},
}


@pytest.mark.parametrize("label,mutate", [
    ("empty_symbols", lambda d: d.update(symbols=[])),
    ("duplicate_symbols", lambda d: d.update(symbols=["SPY", "SPY"])),
    ("symbols_not_list", lambda d: d.update(symbols="SPY")),
    ("bad_date", lambda d: d.update(start="last tuesday")),
    ("reversed_window", lambda d: d.update(start="2024-06-28",
                                           end="2024-01-02")),
    ("zero_lookback", lambda d: d.update(lookback=0)),
    ("zero_horizon", lambda d: d.update(walk_forward={"horizon": 0})),
    ("bad_fraction", lambda d: d.update(walk_forward={"train_fraction": 1.5})),
    ("zero_min_train", lambda d: d.update(walk_forward={"min_train": 0})),
    ("negative_seed", lambda d: d.update(seed=-1)),
    ("unknown_regressor", lambda d: d.update(roster={"regressors": ["MA7"]})),
    ("unknown_classifier", lambda d: d.update(roster={"classifiers": ["KNN"]})),
    ("unknown_grid_family", lambda d: d.update(grids={"MYSTERY": []})),
    ("grid_not_list", lambda d: d.update(grids={"SVR": "rbf"})),
    ("unknown_scoring_client", lambda d: d.update(scoring={"client": "oracle"})),
    ("http_scoring_needs_url", lambda d: d.update(
        scoring={"client": "http", "model_id": "m"})),
    ("http_scoring_needs_model", lambda d: d.update(
        scoring={"client": "http", "base_url": "https://x"})),
    ("unknown_prompt", lambda d: d.update(scoring={"prompt_version": "v9"})),
    ("unknown_source_kind", lambda d: d.update(sources={"kind": "pigeon"})),
    ("fixture_needs_dir", lambda d: d.update(sources={"kind": "fixture"})),
    ("http_needs_templates", lambda d: d.update(sources={"kind": "http"})),
    ("unknown_top_key", lambda d: d.update(surprise=True)),
    ("unknown_section_key", lambda d: d.update(
        sources={"kind": "fixture", "fixture_dir": "/f", "cache": True})),
    ("missing_required", lambda d: d.pop("sector_map")),
])
def test_config_rejections(label, mutate):
    doc = copy.deepcopy(BASE_DOC)
    mutate(doc)
    with pytest.raises(ConfigError):
        config_from_dict(doc)


def test_setup_context_checks_sector_map(tmp_path):
    (tmp_path / "sectors.yaml").write_text("SPY: us broad market\n",
                                           encoding="utf-8")
    doc = copy.deepcopy(BASE_DOC)
    doc["output_dir"] = str(tmp_path / "runs")
    doc["sector_map"] = str(tmp_path / "sectors.yaml")
    with pytest.raises(ConfigError, match="QQQ"):
        setup_context(config_from_dict(doc))
    doc["sector_map"] = str(tmp_path / "nope.yaml")
    with pytest.raises(ConfigError):
        setup_context(config_from_dict(doc))


# ------------------------------------------------------------------- full runs

def test_full_run_builds_the_artifact_tree(demo):
    assert demo.code == EXIT_OK
    assert demo.run_dir.name == run_id_of(demo.config)
    for symbol in demo.manifest["symbols"]:
        assert (demo.run_dir / "panels" / f"{symbol}.csv").exists()
    assert (demo.run_dir / "coverage.csv").exists()

    # MA5 runs price_only, SVR both variants: 3 regression units per etf;
    # 3 classifiers x 2 variants: 6 classification units per etf
    sweeps = sorted(p.name for p in (demo.run_dir / "sweep").glob("*.json"))
    assert len(sweeps) == 18
    assert "AAA__regression__MA5__price_only.json" in sweeps
    assert "AAA__regression__SVR__with_sentiment.json" in sweeps
    assert not any("MA5__with_sentiment" in name for name in sweeps)

    # 3 classifiers x (2 + 1) regressor cells per etf
    combos = sorted(p.name for p in (demo.run_dir / "combos").glob("*.json"))
    assert len(combos) == 18
    assert "BBB__LOGREG__SVR__with_sentiment.json" in combos
    assert len(list((demo.run_dir / "archives").glob("*.csv"))) == 18
    assert len(list((demo.run_dir / "plots").glob("*.png"))) == 18
    assert list((demo.run_dir / "checkpoints").glob("*.ckpt"))

    for space_suffix in ("", "_delta"):
        assert (demo.run_dir / f"summary{space_suffix}.txt").exists()
        assert (demo.run_dir / f"summary{space_suffix}.csv").exists()
    text = (demo.run_dir / "summary.txt").read_text(encoding="utf-8")
    assert "w/o Sentiment MSE" in text and "*" in text

    done = {p.stem for p in (demo.run_dir / "state").glob("*.done")}
    assert done == set(STAGES)


def test_run_log_records_the_whole_run(demo):
    log = demo.log
    assert log["run_id"] == run_id_of(demo.config)
    assert log["config_digest"] == config_digest(demo.config)
    assert log["status"] == "ok"
    assert [s["name"] for s in log["stages"]] == list(STAGES)
    assert all(s["status"] == "done" for s in log["stages"])

    assert [row["etf"] for row in log["coverage"]] == sorted(demo.manifest["symbols"])
    for row in log["coverage"]:
        assert 0.0 <= row["coverage_pct"] <= 100.0
        assert row["n_price_days"] == 130

    articles = log["articles"]
    assert articles["harvested"] >= 8
    assert articles["scored"] == articles["harvested"]
    assert articles["harvest_skips"] == []
    assert log["sweep_failures"] == []
    assert len(log["combos"]) == 18
    keys = [(c["etf"], c["classifier_family"], c["regressor_family"],
             c["variant"]) for c in log["combos"]]
    assert keys == sorted(keys)
    assert all(c["status"] == "ok" for c in log["combos"])


def test_rerun_resumes_without_recomputing(demo):
    cached = {}
    for sub in ("sweep", "combos"):
        for path in (demo.run_dir / sub).glob("*.json"):
            cached[path] = path.stat().st_mtime_ns
    assert run(demo.config) == EXIT_OK
    for path, mtime in cached.items():
        assert path.stat().st_mtime_ns == mtime, f"{path.name} was recomputed"

    log2 = json.loads((demo.run_dir / "run_log.json").read_text(encoding="utf-8"))
    log1 = dict(demo.log)
    log1.pop("timestamps"), log2.pop("timestamps")
    assert log1 == log2


def test_price_store_is_shared_across_runs(demo):
    raw = Path(demo.doc["data_root"]) / "raw" / "prices"
    assert sorted(p.stem for p in raw.glob("*.jsonl")) == \
        sorted(demo.manifest["symbols"])
    scores = Path(demo.doc["data_root"]) / "cache" / "scores"
    assert len(list(scores.glob("*.json"))) == demo.log["articles"]["scored"]


def test_partial_failure_yields_exit_three(tmp_path):
    workspace = tmp_path
    manifest = write_fixture_corpus(workspace / "fixtures", n_days=130,
                                    n_articles=8, seed=5)
    # cut the second symbol down so its walk-forward plan cannot exist
    bbb = workspace / "fixtures" / "prices" / "BBB.csv"
    bbb.write_text("\n".join(bbb.read_text().splitlines()[:22]) + "\n",
                   encoding="utf-8")
    doc = corpus_doc(workspace, manifest,
                     roster={"regressors": ["MA5"], "classifiers": ["ALL_UP"]},
                     walk_forward={"horizon": 10, "min_train": 30})
    config = load_config(write_doc(doc, workspace / "config.yaml"))

    assert run(config) == EXIT_PARTIAL
    run_dir = Path(doc["output_dir"]) / run_id_of(config)
    log = json.loads((run_dir / "run_log.json").read_text(encoding="utf-8"))
    assert log["status"] == "partial"
    assert {f["unit"].split("__")[0] for f in log["sweep_failures"]} == {"BBB"}
    by_status = {c["etf"]: c["status"] for c in log["combos"]}
    assert by_status == {"AAA": "ok", "BBB": "failed"}
    # the summary still renders, flagging the half-failed cell
    assert "(1/2)" in (run_dir / "summary.txt").read_text(encoding="utf-8")
    assert len(list((run_dir / "plots").glob("*.png"))) == 1


def test_stage_failure_yields_exit_two(tmp_path):
    manifest = write_fixture_corpus(tmp_path / "fixtures", n_days=40,
                                    n_articles=2, seed=5)
    doc = corpus_doc(tmp_path, manifest)
    # an empty fixture tree means no prices for any symbol
    empty = tmp_path / "empty"
    empty.mkdir()
    doc["sources"]["fixture_dir"] = str(empty)
    config = load_config(write_doc(doc, tmp_path / "config.yaml"))

    assert run(config) == EXIT_STAGE_FAILURE
    run_dir = Path(doc["output_dir"]) / run_id_of(config)
    log = json.loads((run_dir / "run_log.json").read_text(encoding="utf-8"))
    assert log["status"] == "failed"
    assert log["stages"][0]["name"] == "ingest_prices"
    assert log["stages"][0]["status"] == "failed"
    assert not (run_dir / "state" / "ingest_prices.done").exists()


def test_run_stages_rejects_unknown_stage(demo):
    ctx = setup_context(demo.config)
    with pytest.raises(ConfigError):
        run_stages(ctx, upto="deploy")


# ------------------------------------------------------------------------- cli

def test_cli_stage_commands_stop_where_asked(tmp_path):
    manifest = write_fixture_corpus(tmp_path / "fixtures", n_days=60,
                                    n_articles=6, seed=9)
    doc = corpus_doc(tmp_path, manifest,
                     roster={"regressors": ["MA5"], "classifiers": ["ALL_UP"]})
    config_path = write_doc(doc, tmp_path / "config.yaml")
    config = load_config(config_path)
    run_dir = Path(doc["output_dir"]) / run_id_of(config)
    runner = CliRunner()

    result = runner.invoke(cli, ["ingest", "prices", str(config_path)])
    assert result.exit_code == EXIT_OK, result.output
    assert (run_dir / "state" / "ingest_prices.done").exists()
    assert not (run_dir / "state" / "score.done").exists()
    assert not (run_dir / "panels").exists()

    result = runner.invoke(cli, ["panel", "build", str(config_path)])
    assert result.exit_code == EXIT_OK, result.output
    assert (run_dir / "panels" / "AAA.csv").exists()
    assert not (run_dir / "sweep").exists()

    result = runner.invoke(cli, ["show-id", str(config_path)])
    assert result.exit_code == 0
    assert result.output.strip() == run_id_of(config)


def test_cli_train_runs_sweeps_without_combos(tmp_path):
    manifest = write_fixture_corpus(tmp_path / "fixtures", n_days=60,
                                    n_articles=6, seed=9)
    doc = corpus_doc(tmp_path, manifest,
                     roster={"regressors": ["MA5"], "classifiers": ["ALL_UP"]})
    config_path = write_doc(doc, tmp_path / "config.yaml")
    config = load_config(config_path)
    run_dir = Path(doc["output_dir"]) / run_id_of(config)

    result = CliRunner().invoke(cli, ["train", str(config_path)])
    assert result.exit_code == EXIT_OK, result.output
    assert list((run_dir / "sweep").glob("*.json"))
    assert not (run_dir / "combos").exists()


def test_cli_rejects_invalid_config(tmp_path):
    doc = copy.deepcopy(BASE_DOC)
    doc["symbols"] = []
    config_path = write_doc(doc, tmp_path / "bad.yaml")
    result = CliRunner().invoke(cli, ["score", str(config_path)])
    assert result.exit_code == 1
    assert "invalid config" in result.output


def test_cli_help_lists_commands():
    result = CliRunner().invoke(cli, ["--help"])
    assert result.exit_code == 0
    for command in ("ingest", "score", "panel", "train", "evaluate",
                    "report", "plot", "run", "show-id"):
        assert command in result.output
