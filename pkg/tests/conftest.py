from __future__ import annotations

import numpy as np
import pytest

_VERDICTS: list[str] = []


class Verdict:
    """Records one PASS/FAIL line per acceptance criterion."""

    def __call__(self, number: int, title: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {title}"
        if detail:
            line += f" ({detail})"
        print(line)
        _VERDICTS.append(line)
        return ok


@pytest.fixture
def verdict() -> Verdict:
    return Verdict()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
