import numpy as np
import pytest

ACCEPTANCE_LINES: dict = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    """Store one pass/fail line per acceptance criterion (last writer wins per part)."""
    parts = ACCEPTANCE_LINES.setdefault(criterion, [])
    parts.append((bool(ok), detail))


@pytest.fixture
def accept():
    return record


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        parts = ACCEPTANCE_LINES[k]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
