from __future__ import annotations

import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from emdm import parse_instance, parse_schema

FIXTURES = Path(__file__).parent / "fixtures"

# criterion number -> (ok, title, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str, str]] = {}


@contextmanager
def criterion(number: int, title: str):
    """Record one acceptance criterion's outcome and wall time."""
    t0 = time.perf_counter()
    note: dict = {}
    try:
        yield note
    except BaseException:
        ACCEPTANCE[number] = (False, title, f"{time.perf_counter() - t0:.2f}s {note.get('detail', '')}".strip())
        raise
    ACCEPTANCE[number] = (True, title, f"{time.perf_counter() - t0:.2f}s {note.get('detail', '')}".strip())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {n:>2}. {title} ({detail})")


def schema(text: str, db: str = "t"):
    if not text.lstrip().startswith("database"):
        text = f"database {db};\n{text}"
    return parse_schema(text)


@pytest.fixture(scope="session")
def company():
    return parse_schema((FIXTURES / "company.emdm").read_text())


@pytest.fixture(scope="session")
def company_ok(company):
    return parse_instance((FIXTURES / "company_ok.json").read_text(), company)


@pytest.fixture(scope="session")
def company_bad(company):
    return parse_instance((FIXTURES / "company_bad.json").read_text(), company)
