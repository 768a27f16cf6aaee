"""End-to-end acceptance checks: one test (one pass/fail line under -v) per
named criterion, in registry order.  Each assertion message carries the
measured quantities for the failure report."""

import pytest

from sphere_lab.suites import CRITERIA, run_criterion


@pytest.mark.parametrize("name", list(CRITERIA), ids=list(CRITERIA))
def test_criterion(name):
    result = run_criterion(name)
    print(result.summary())
    assert result.passed, result.summary()
