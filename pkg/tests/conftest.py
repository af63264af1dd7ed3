from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import cloudcost


@pytest.fixture(scope="session")
def demo_model_text() -> str:
    return cloudcost.data_path("demo_model.json").read_text()


@pytest.fixture(scope="session")
def demo_catalog_text() -> str:
    return cloudcost.data_path("demo_catalog.json").read_text()


@pytest.fixture(scope="session")
def seed_items_text() -> str:
    return cloudcost.data_path("assessment_items.json").read_text()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            status = "PASS" if outcome == "passed" else "FAIL"
            lines.append((name, status))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in lines:
            terminalreporter.write_line(f"{status}  {name}")
