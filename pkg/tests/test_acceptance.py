"""End-to-end acceptance criteria; each test prints one PASS/FAIL line.

Tolerances live next to the checks in :mod:`solerlab.acceptance`:
k_n within 0.01 in under 120 s per dimension, the 1D ground state to
1e-8, pairing to 1e-4, the Dirac kernel and 2 omega i residuals within
10x the grid error, the unstable-eigenvalue exponent within 0.1 of 2,
companion roots to 1e-8, the F closed form to 1e-10, the absorption
exponent within 0.05 of -1/2, and theta slopes of at least 0.9 and 2.8.
"""

import json

import pytest

from solerlab import acceptance as acc
from solerlab.reports import to_jsonable


@pytest.fixture
def report(capsys):
    def emit(res):
        with capsys.disabled():
            print("\n" + res.line())
            print("    " + json.dumps(to_jsonable(res.details)))
        return res
    return emit


@pytest.mark.parametrize("check", acc.CHECKS, ids=lambda c: f"{c.number:02d}-{c.__name__}")
def test_criterion(check, report):
    res = report(check())
    assert res.passed, res.line()
