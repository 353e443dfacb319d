"""The fifteen acceptance criteria at their stated tolerances, one test each."""

import json

import pytest

from latmult.acceptance import CRITERIA, run_criterion

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1), ids=lambda k: f"criterion_{k:02d}")
def test_criterion(number):
    res = run_criterion(number, seed=0)
    line = res.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert res.passed, json.dumps(res.details, default=str, indent=1)[:4000]


def test_suite_has_fifteen_criteria():
    assert len(CRITERIA) == 15
