"""The ten acceptance criteria at their pinned tolerances.

Each test prints one PASS/FAIL line (repeated in the terminal summary) and
fails when its criterion fails.
"""

import pytest

from partial_es.propertysuite import ACCEPTANCE

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", sorted(ACCEPTANCE))
def test_criterion(number, capsys):
    result = ACCEPTANCE[number](seed=0)
    line = result.line()
    ACCEPTANCE_LINES.append(line)
    with capsys.disabled():
        print("\n" + line)
    assert result.passed, line
