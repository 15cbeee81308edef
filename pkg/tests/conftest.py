import functools
import time
from pathlib import Path

import pytest

from aligator.pipeline import run

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "benchmarks"

SQUARES = """
            while true
                if true
                    r = r - v; v = v + 2
                else
                    r = r + u;  u = u + 2
                end
            end
"""

SQUARES_INVARIANT = "v_0^2-u_0^2-v^2+u^2+4*r_0-2*v_0+2*u_0-4*r+2*v-2*u"

# runs that do not finish within this budget count as failures
BUDGET = 60.0


def corpus_names() -> list[str]:
    return sorted(p.stem for p in CORPUS.glob("*.loop"))


@functools.lru_cache(maxsize=None)
def corpus_report(name: str):
    """Analysis of one benchmark and its wall time, shared across the session."""
    start = time.perf_counter()
    report = run((CORPUS / f"{name}.loop").read_text(), timeout=BUDGET)
    return report, time.perf_counter() - start


@pytest.fixture
def squares():
    return SQUARES


# PASS/FAIL lines from the acceptance checks, echoed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
