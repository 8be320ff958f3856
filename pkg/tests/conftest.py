import random

import pytest

from knapsack_auction.config import golden_config
from knapsack_auction.group import generate_group_params, toy_group_params


@pytest.fixture(scope="session")
def toy():
    return toy_group_params()


@pytest.fixture(scope="session")
def mid_group():
    # about 32 bits: big enough for 12 codes among 8 bidders, small enough to be fast
    return generate_group_params(32, b"bench")


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def golden():
    return golden_config()



ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's PASS/FAIL line for the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(number: int, title: str, passed: bool, detail: str = ""):
        status = "PASS" if passed else "FAIL"
        line = f"{status} criterion {number}: {title}" + (f" ({detail})" if detail else "")
        lines[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
