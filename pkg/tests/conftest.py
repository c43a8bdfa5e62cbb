from __future__ import annotations

import pytest

from pinchlab.diagram import load_diagram

# criterion id -> list of (check name, passed, detail)
ACCEPTANCE: dict[str, list[tuple[str, bool, str]]] = {}


def record(criterion: str, check: str, passed: bool, detail: str = "") -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((check, bool(passed), detail))
    return passed


@pytest.fixture(scope="session")
def fixtures():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load_diagram(name)
        return cache[name]

    return get


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE, key=lambda c: int(c[2:])):
        checks = ACCEPTANCE[crit]
        ok = all(p for _, p, _ in checks)
        parts = "; ".join(f"{n}={'ok' if p else 'FAIL'}{' (' + d + ')' if d else ''}" for n, p, d in checks)
        tr.write_line(f"{crit} {'PASS' if ok else 'FAIL'}: {parts}")
