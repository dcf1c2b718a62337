"""Acceptance gate: every criterion at its stated tolerance.

Each criterion is checked against the cases of the cross-validation suites
run once with the default configuration (q in {2, 3}, z in {0.6, 1, 1.5+0.3i},
seed 0). One PASS/FAIL line per criterion is printed in the terminal summary;
``python3 tests/test_acceptance.py`` prints the same lines directly.
"""
import time

import pytest

from treepoisson.verify import SUITES, SuiteConfig, run_suite

EIGEN_RUNTIME_LIMIT = 5.0


def run_all(config=None):
    config = SuiteConfig() if config is None else config
    reports, timings = {}, {}
    for name in SUITES:
        start = time.perf_counter()
        reports[name] = run_suite(name, config)
        timings[name] = time.perf_counter() - start
    return reports, timings


def cases(reports, suite, *prefixes):
    found = [c for c in reports[suite].cases if c.id.split("[")[0] in prefixes]
    assert found, f"no {prefixes} cases in suite {suite}"
    return found


def summarize(found):
    """Per case kind: the largest reported metric, its tolerance and any note."""
    kinds = {}
    for c in found:
        kinds.setdefault(c.id.split("[")[0], []).append(c)
    parts = []
    for kind, group in kinds.items():
        worst = max(group, key=lambda c: c.max_rel_err)
        passed = sum(c.passed for c in group)
        part = f"{kind} {passed}/{len(group)} ok, metric {worst.max_rel_err:.2e} vs tol {worst.tolerance:.0e}"
        if worst.note:
            part += f" [{worst.note}]"
        parts.append(part)
    return all(c.passed for c in found), "; ".join(parts)


def c1_eigenfunction(reports, timings):
    ok, detail = summarize(cases(reports, "identities", "eigenfunction"))
    # the identities suite does strictly more work than the eigenfunction check
    elapsed = timings["identities"]
    return ok and elapsed < EIGEN_RUNTIME_LIMIT, f"{detail}; identities suite {elapsed:.2f} s (< {EIGEN_RUNTIME_LIMIT:.0f} s)"


def c2_ladder(reports, timings):
    return summarize(cases(reports, "identities", "sign-resolution", "ladder"))


def c3_representations(reports, timings):
    return summarize(cases(reports, "representations", "hor-representation", "coefficient-norm-inequality"))


def c4_commutation(reports, timings):
    return summarize(cases(reports, "representations", "coordinate-stencil-commutation"))


def c5_nilpotency(reports, timings):
    return summarize(cases(reports, "norms", "nilpotency-coordinates", "nilpotency-stencil",
                           "order-detection-stencil", "shifted-laplacian-orbit"))


def c6_right_inverse(reports, timings):
    return summarize(cases(reports, "norms", "right-inverse-coordinates", "right-inverse-isometry",
                           "right-inverse-stencil"))


def c7_contraction(reports, timings):
    return summarize(cases(reports, "norms", "contraction"))


def c8_heat(reports, timings):
    return summarize(cases(reports, "semigroup", "heat-vs-stencil-exponential", "semigroup-law",
                           "order-1-fixed-points"))


def c9_pointwise_bound(reports, timings):
    return summarize(cases(reports, "bounds", "pointwise-bound-C_m"))


def c10_spherical(reports, timings):
    return summarize(cases(reports, "identities", "spherical-radial", "spherical-eigen"))


CRITERIA = [
    (1, "eigenfunction identity", c1_eigenfunction),
    (2, "derivative ladder and sign resolution", c2_ladder),
    (3, "representation equivalence and Frobenius inequality", c3_representations),
    (4, "coordinate/stencil commutation", c4_commutation),
    (5, "nilpotency and non-hypercyclicity contrast", c5_nilpotency),
    (6, "right inverse", c6_right_inverse),
    (7, "contraction", c7_contraction),
    (8, "heat semigroup", c8_heat),
    (9, "pointwise bound with C_m", c9_pointwise_bound),
    (10, "spherical function", c10_spherical),
]


def format_line(number, title, ok, detail):
    return f"{'PASS' if ok else 'FAIL'}  criterion {number:>2} ({title}): {detail}"


@pytest.fixture(scope="module")
def suite_results():
    return run_all()


@pytest.mark.parametrize("number, title, check", CRITERIA, ids=[f"criterion-{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, check, suite_results, acceptance_log):
    ok, detail = check(*suite_results)
    line = format_line(number, title, ok, detail)
    acceptance_log.append(line)
    print(line)
    assert ok, line


def test_companion_bounds(suite_results, acceptance_log):
    """Bounds that accompany criterion 9: the corrected majorant, the kernel bound and Cauchy truncation."""
    ok, detail = summarize(cases(suite_results[0], "bounds", "pointwise-majorant", "kernel-derivative-bound",
                                 "cauchy-truncation"))
    acceptance_log.append(f"{'PASS' if ok else 'FAIL'}  companion bounds (not a criterion): {detail}")
    assert ok


def test_total_runtime(suite_results, acceptance_log):
    total = sum(suite_results[1].values())
    line = f"{'PASS' if total < 60 else 'FAIL'}  all suites ran in {total:.1f} s (target < 60 s)"
    acceptance_log.append(line)
    assert total < 60


if __name__ == "__main__":
    results = run_all()
    for number, title, check in CRITERIA:
        print(format_line(number, title, *check(*results)))
