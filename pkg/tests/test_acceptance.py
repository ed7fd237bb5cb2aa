"""Acceptance criteria 1-8 at full scale.

Each test prints one PASS/FAIL line for its criterion (repeated in the
terminal summary) followed by every individual check. Set WARPSIM_LONG=1 to
add the optional n = 40000 cell to criterion 6.
"""

import os

from warpsim import validation as val

LONG = os.environ.get("WARPSIM_LONG") == "1"


def _run(acceptance_report, criterion, checks):
    failed = acceptance_report(criterion, checks)
    assert not failed, "failed checks: " + "; ".join(c.line() for c in failed)


def test_criterion_1_oracle_matches_sampler(acceptance_report):
    _run(acceptance_report, 1, val.suite_moments(seed=1, replicates=200_000))


def test_criterion_2_inverse_n_rates(acceptance_report):
    _run(acceptance_report, 2, val.suite_rates())


def test_criterion_3_l2_risk_limit(acceptance_report):
    _run(acceptance_report, 3, val.suite_l2(seed=3, n=500, replicates=10_000))


def test_criterion_4_frechet_variance(acceptance_report):
    _run(acceptance_report, 4, val.suite_frechet(seed=4, m=10, replicates=10_000))


def test_criterion_5_mzw_concentration_limit(acceptance_report):
    _run(acceptance_report, 5, val.suite_mzw_limit(seed=6, m=10, replicates=10_000, theta=1e4))


def test_criterion_6_concentration_estimator_cells(acceptance_report):
    _run(acceptance_report, 6, val.suite_estimator_cells(seed=7, m=50, B=100, long=LONG))


def test_criterion_7_structural_invariants(acceptance_report):
    _run(acceptance_report, 7, val.suite_structural(seed=10, fuzz_calls=10_000))


def test_criterion_8_drift_pipeline(acceptance_report):
    _run(acceptance_report, 8, val.suite_pipeline(seed=11, m=50, B=100, alpha=0.05))
