"""Acceptance criteria, one test per criterion; each reports a PASS/FAIL line with measured values."""
import pytest

from geophase.validation import CHECKS, Settings

REPORT = []


@pytest.mark.parametrize("check", CHECKS, ids=[c.__name__.removeprefix("check_") for c in CHECKS])
def test_criterion(check):
    result = check(Settings())
    REPORT.append(result.line())
    print(result.line())
    assert result.passed, result.line()
