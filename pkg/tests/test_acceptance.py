"""One test per acceptance criterion; each prints a single PASS/FAIL line."""
import pytest

from conftest import ACCEPTANCE_LINES
from qpoker import verify as vf


@pytest.mark.parametrize("cid", sorted(vf.CRITERIA))
def test_criterion(cid):
    check = vf.run_criterion(cid, vf.DEFAULT_SEED)
    ACCEPTANCE_LINES.append(check.line())
    print(check.line())
    assert check.passed, check.line()
