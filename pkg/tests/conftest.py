import pytest

from fisher_harnack.params import ParamSet

# Canonical parameter sets used throughout the suite
CASE_III = ParamSet(1, 1.0, 0.25, -1.0)
CASE_IV = ParamSet(3, 1.0, 0.9, -2.0)
NONCOMPACT = ParamSet(1, 1.0, 0.1, -0.8)
CASE_III_2D = ParamSet(2, 1.0, 0.25, -1.0)
# ratio-bound cases (ii) and (iii), both with beta + c >= 0
CLASSICAL_II = ParamSet(3, 1.0, 0.7, -0.995)
CLASSICAL_III = ParamSet(3, 1.0, 0.62, -3.0 / (8.0 * 0.38))


@pytest.fixture
def case_iii():
    return CASE_III


@pytest.fixture
def case_iv():
    return CASE_IV


@pytest.fixture
def noncompact():
    return NONCOMPACT


# one verdict line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.setdefault(number, []).append((passed, detail))
    print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        entries = ACCEPTANCE_LINES[number]
        ok = all(p for p, _ in entries)
        details = "; ".join(detail for _, detail in entries)
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {details}")
