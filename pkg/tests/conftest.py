from __future__ import annotations

from collections import defaultdict

import pytest

_ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = defaultdict(list)


@pytest.fixture
def criterion():
    """Record the outcome of an acceptance criterion (or one case of it), then assert it."""

    def record(number: int, label: str, ok: bool, detail: str) -> None:
        _ACCEPTANCE[number].append((label, bool(ok), detail))
        assert ok, f"criterion {number} ({label}): {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        cases = _ACCEPTANCE[number]
        status = "PASS" if all(ok for _, ok, _ in cases) else "FAIL"
        parts = "; ".join(f"{label}: {'ok' if ok else 'FAILED'} ({detail})" for label, ok, detail in cases)
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {parts}")
