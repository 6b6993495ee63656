"""Acceptance criteria 1-12, one test each.

Each test prints ``criterion NN PASS|FAIL <title>`` and the measured values;
the session summary repeats one line per criterion (see ``conftest.py``).
"""
import json

import pytest

from dispersia import acceptance

RESULTS: dict[int, acceptance.CriterionResult] = {}


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number):
    result = acceptance.evaluate(number)
    RESULTS[number] = result
    print(result.line())
    print("  measured: ", json.dumps(result.measured, default=str))
    print("  tolerance:", json.dumps(result.tolerance, default=str))
    assert result.error is None, result.error
    assert result.passed, f"criterion {number} out of tolerance: {result.measured}"
