import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite", derandomize=True, max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")

# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


def record_criterion(label: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append((label, passed, detail))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in ACCEPTANCE_LINES:
        tag = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{tag}] {label}: {detail}")
    bad = sum(1 for _, ok, _ in ACCEPTANCE_LINES if not ok)
    terminalreporter.write_line(
        f"{len(ACCEPTANCE_LINES) - bad}/{len(ACCEPTANCE_LINES)} "
        "criterion checks passed")
