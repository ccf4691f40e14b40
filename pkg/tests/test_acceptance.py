"""Acceptance criteria 1-10, each at its stated tolerance.

Every test prints one PASS/FAIL line; the same lines are repeated in the
terminal summary.
"""

import pytest

from conftest import ACCEPTANCE_LINES
from mechgap import verification as V

CRITERIA = {
    1: ("C* constant", V.check_cstar),
    2: ("AR/AP constant pi^2/6", V.check_pi2over6),
    3: ("small-n AR/AP tight ratios", V.check_iid_table),
    4: ("AR/AP convergence in n", V.check_iid_convergence),
    5: ("SPM/AP lower-bound instance", V.check_spm_ap_instance),
    6: ("AR/AP regular lower-bound instance", V.check_ar_ap_regular),
    7: ("OPT/AR three-buyer instance", V.check_three_buyer),
    8: ("OPT/AR four-buyer instance", V.check_four_buyer),
    9: ("equal-revenue + deterministic buyer instance", V.check_equal_revenue_pair),
    10: ("property suites", lambda: V.check_properties(seed=0)),
}


@pytest.mark.parametrize("criterion", sorted(CRITERIA))
def test_criterion(criterion):
    title, fn = CRITERIA[criterion]
    rows = fn()
    assert rows and all(r.criterion == criterion for r in rows)
    ok = all(r.passed for r in rows)
    line = f"CRITERION {criterion:2d} {'PASS' if ok else 'FAIL'}: {title} ({sum(r.passed for r in rows)}/{len(rows)} checks)"
    ACCEPTANCE_LINES[criterion] = line
    print(line)
    for r in rows:
        print("   ", r.line())
    failed = [r.line() for r in rows if not r.passed]
    assert not failed, "\n".join(failed)
