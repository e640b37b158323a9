"""One pass/fail line per acceptance criterion.  Criteria that do not hold are
reported and left failing; see the detail text for the diagnosis."""
import pytest

from ncfib.acceptance import TITLES, run_criterion

_results = {}


def _result(i):
    if i not in _results:
        _results[i] = run_criterion(i)
    return _results[i]


@pytest.mark.parametrize("number", sorted(TITLES))
def test_criterion(number, capsys):
    row = _result(number)
    with capsys.disabled():
        print("\n" + row.line())
    assert row.passed, row.detail
