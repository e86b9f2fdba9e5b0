#!/usr/bin/env python3
"""Build a fixture corpus, write a matching config, and run the pipeline.

Everything lands under one workspace directory, so the whole exercise is
reproducible and disposable:

    python3 scripts/run_fixture_pipeline.py --workspace /tmp/etfcast-demo
"""

import argparse
import sys
from pathlib import Path

import yaml

from etfcast.pipeline import run
from etfcast.config import load_config
from etfcast.synthetic import write_fixture_corpus


def build_config(workspace: Path, manifest: dict, seed: int) -> Path:
    doc = {
        "data_root": str(workspace / "data"),
        "output_dir": str(workspace / "runs"),
        "symbols": manifest["symbols"],
        "start": manifest["start"],
        "end": manifest["end"],
        "sector_map": str(workspace / "fixtures" / "sectors.yaml"),
        "sources": {
            "kind": "fixture",
            "fixture_dir": str(workspace / "fixtures"),
        },
        "scoring": {"client": "keyword"},
        "lookback": 5,
        "walk_forward": {"horizon": 10, "train_fraction": 0.6},
        "seed": seed,
    }
    path = workspace / "config.yaml"
    path.write_text(yaml.safe_dump(doc, sort_keys=True), encoding="utf-8")
    return path


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workspace", type=Path, default=Path("fixture-run"))
    parser.add_argument("--days", type=int, default=130)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    workspace = args.workspace.resolve()
    manifest = write_fixture_corpus(workspace / "fixtures", n_days=args.days)
    config_path = build_config(workspace, manifest, args.seed)
    print(f"config written to {config_path}")
    code = run(load_config(config_path))
    print(f"pipeline exit code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
