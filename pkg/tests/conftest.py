import math
import os
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FIXTURES = Path(__file__).parent / "fixtures"


@st.composite
def rational_in(draw, lo=0, hi=3, max_den=64):
    """Rationals in [lo, hi] with denominators up to ``max_den``."""
    lo, hi = Fraction(lo), Fraction(hi)
    d = draw(st.integers(1, max_den))
    n = draw(st.integers(math.ceil(lo * d), math.floor(hi * d)))
    return Fraction(n, d)


@pytest.fixture
def fixtures():
    return FIXTURES


# -- acceptance summary: one line per criterion ---------------------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title = mark.args
    note = ""
    if rep.failed:
        note = str(rep.longrepr.reprcrash.message if hasattr(rep.longrepr, "reprcrash") else rep.longrepr)
        note = note.splitlines()[0][:120] if note else ""
    _ACCEPTANCE[number] = (title, rep.passed, note)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, note = _ACCEPTANCE[number]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  [{note}]" if note else ""))
