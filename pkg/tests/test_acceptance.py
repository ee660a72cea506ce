"""Acceptance criteria A1-A11 at full scale.

Each test prints one ``A<n>: PASS|FAIL (...)`` line; the lines are repeated
in the terminal summary by ``conftest.py``.  Running all of them takes a few
minutes.
"""

import pytest

from twotier.acceptance import CHECKS, Settings, run_checks

SETTINGS = Settings()
SUMMARY_LINES: dict = {}


@pytest.mark.acceptance
@pytest.mark.parametrize("name", list(CHECKS))
def test_acceptance(name):
    (res,) = run_checks([name], SETTINGS)
    line = res.summary()
    SUMMARY_LINES[name] = line
    print(line)
    for extra in res.lines:
        print(f"  {extra}")
    assert res.passed, line
