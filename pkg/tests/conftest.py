import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


_ACCEPTANCE: dict[int, str] = {}


class AcceptanceLog:
    def __init__(self, number: int, title: str, budget: float):
        self.number, self.title, self.budget = number, title, budget
        self.start = time.perf_counter()

    def record(self, passed: bool, detail: str) -> bool:
        elapsed = time.perf_counter() - self.start
        status = "PASS" if passed else "FAIL"
        _ACCEPTANCE[self.number] = (f"[{status}] criterion {self.number}: {self.title}: {detail} "
                                    f"({elapsed:.1f} s, budget {self.budget:g} s)")
        print(_ACCEPTANCE[self.number])
        return passed


@pytest.fixture
def acceptance():
    return AcceptanceLog


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
