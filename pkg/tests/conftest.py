import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from greedylab.experiments import FAST_NUM_SAMPLES  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--full", action="store_true",
                     help="run the CLI comparison tests at N=5000 instead of the fast profile")


@pytest.fixture(scope="session")
def num_samples(request):
    return 5000 if request.config.getoption("--full") else FAST_NUM_SAMPLES


ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
