import random
from pathlib import Path

import pytest

from tempvanet.graph import TemporalGraph

FIXTURES = Path(__file__).parent / "fixtures"

_ACCEPTANCE = []


def random_edge_sets(rng, n, T, p):
    return [{(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p}
            for _ in range(T)]


def random_temporal_graph(rng, n, T, p):
    es = random_edge_sets(rng, n, T, p)
    return TemporalGraph.from_edge_lists(n, es), es


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def acceptance():
    """Record a criterion outcome for the end-of-run summary, then assert it."""

    def record(label, ok, detail=""):
        _ACCEPTANCE.append((label, bool(ok), detail))
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" -- {detail}" if detail else "")
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" -- {detail}" if detail else ""))
