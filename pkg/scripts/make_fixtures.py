#!/usr/bin/env python3
"""Generate a deterministic offline fixture corpus (prices, news, sectors).

Usage: python3 scripts/make_fixtures.py [--root DIR] [--days N] [--seed S]
"""

import argparse
import json
from pathlib import Path

from etfcast.synthetic import write_fixture_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--root", default="fixtures", type=Path,
                        help="output directory (default: ./fixtures)")
    parser.add_argument("--symbols", nargs="+", default=["AAA", "BBB"])
    parser.add_argument("--days", type=int, default=130)
    parser.add_argument("--articles", type=int, default=12)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    manifest = write_fixture_corpus(args.root, symbols=tuple(args.symbols),
                                    n_days=args.days, n_articles=args.articles,
                                    seed=args.seed)
    print(json.dumps(manifest, indent=2, sort_keys=True, default=str))


if __name__ == "__main__":
    main()
