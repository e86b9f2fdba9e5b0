import re
from datetime import date, timedelta

import numpy as np
import pytest

from etfcast.features import DeltaSeries
from etfcast.ingestion.types import EtfId
from etfcast.synthetic import write_fixture_corpus


@pytest.fixture(scope="session")
def fixture_corpus(tmp_path_factory):
    """One shared offline corpus: 2 symbols, 130 trading days, 12 articles."""
    root = tmp_path_factory.mktemp("corpus")
    manifest = write_fixture_corpus(root, symbols=("AAA", "BBB"), n_days=130,
                                    n_articles=12, seed=7)
    return root, manifest


def make_series(deltas, sentiments=None, symbol="TST", first_close=100.0,
                start=date(2024, 1, 1)):
    """DeltaSeries over a plain consecutive-day calendar."""
    deltas = np.asarray(deltas, dtype=np.float64)
    if sentiments is None:
        sentiments = np.zeros_like(deltas)
    sentiments = np.asarray(sentiments, dtype=np.float64)
    dates = [start + timedelta(days=i) for i in range(len(deltas))]
    return DeltaSeries(etf=EtfId(symbol=symbol, sector="synthetic"),
                       dates=dates, deltas=deltas, sentiments=sentiments,
                       first_close=first_close)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance reporting -------------------------------------------------
# test_acceptance.py holds one test per criterion; after the run a PASS or
# FAIL line per criterion is printed so the gate is readable at a glance.

_ACCEPTANCE_RESULTS = {}
_CRITERION_RE = re.compile(r"test_criterion_(\d+)_(\w+)")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    match = _CRITERION_RE.match(item.name)
    if match and "test_acceptance" in str(item.fspath):
        number = int(match.group(1))
        label = match.group(2).replace("_", " ")
        _ACCEPTANCE_RESULTS[number] = (label, report.passed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(_ACCEPTANCE_RESULTS):
        label, passed = _ACCEPTANCE_RESULTS[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number} ({label}): {verdict}")
