"""Acceptance gate: one check per criterion, each reported as a PASS/FAIL line.

The lines appear in the "acceptance checks" section of the pytest summary;
``qrc-sas verify`` prints the same lines from the command line.
"""

import time

import pytest

from qrc_sas.checks import CHECKS, CheckResult, run_checks, select_checks


@pytest.mark.parametrize("check", [fn for fn, _ in CHECKS], ids=lambda fn: fn.__name__.removeprefix("check_"))
def test_criterion(check, acceptance_log):
    t0 = time.perf_counter()
    result = check()
    result.seconds = time.perf_counter() - t0
    assert isinstance(result, CheckResult)
    line = result.line()
    acceptance_log.append(line)
    print(line)
    assert result.passed, line


def test_registry_covers_every_criterion():
    assert len(CHECKS) == 10
    assert len({fn.__name__ for fn, _ in CHECKS}) == 10


def test_tolerance_override_can_fail():
    # a sub-rounding tolerance must flip numerical checks to FAIL, not be ignored
    (res,) = run_checks("check_analytic_vs_numeric", tol=1e-30)
    assert not res.passed and res.line().startswith("[FAIL]")


def test_unknown_filter():
    with pytest.raises(ValueError):
        select_checks("no-such-check")
