from __future__ import annotations

import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

DATA = HERE / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)



@pytest.fixture
def repair_lpo():
    from po_miner.log_io import extend_with_endpoints, parse_lpo_json

    log = parse_lpo_json((DATA / "repair_example.lpo.json").read_bytes())
    return extend_with_endpoints(log.variants[0][0])


@pytest.fixture
def p4():
    from po_miner.model import CandidatePlace

    return CandidatePlace.of(["Analyze Defect", "Restart Repair"], ["Repair (Complex)", "Repair (Simple)"])
