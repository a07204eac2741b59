"""End-to-end acceptance gate.

Each test covers one release criterion and prints a single PASS/FAIL line.
The two Monte Carlo sweeps are shared across criteria through module-scoped
fixtures, so the whole gate runs in a few minutes.
"""

import dataclasses
import math

import pytest

from cascade_msprt import estimator, harness
from cascade_msprt import graph as G
from cascade_msprt import obs_model as O


def _verdict(num, name, ok, detail=""):
    print(f"ACCEPTANCE {num} {name}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, f"criterion {num} ({name}) failed: {detail}"


@pytest.fixture(scope="module")
def figure1_summary():
    return harness.sweep_figure1(trials=50)


@pytest.fixture(scope="module")
def figure2_summary():
    return harness.sweep_figure2(trials=50)


def test_criterion_1_tree_error_guarantee():
    cfg = harness.figure1_config(3, trials=500)
    results = harness.run_cell(cfg, 1000, 500)
    env = harness.trial_env(cfg, 1000)
    report = estimator.error_guarantee_audit(results, env.est_config, env.graph)
    ok = report.failure_rate <= 0.1 and report.failure_wilson_upper <= 0.15
    _verdict(1, "tree_error_guarantee", ok,
             f"failure_rate={report.failure_rate:.4f} "
             f"wilson_upper={report.failure_wilson_upper:.4f} over {report.trials} trials")


def test_criterion_2_pairwise_error_rates():
    base = dataclasses.replace(
        harness.figure2_config("0", trials=2000),
        graph_params=(201,), n_grid=(25,),
    )
    pooled = []
    for source in (100, 99, 102):
        cfg = dataclasses.replace(base, source=source)
        pooled.extend(harness.run_cell(cfg, 25, 2000))
    env = harness.trial_env(base, 25)
    report = estimator.error_guarantee_audit(pooled, env.est_config, env.graph)
    ok = not report.pairwise_violations
    worst = max(report.pairwise_rates.values(), default=0.0)
    _verdict(2, "pairwise_error_rates", ok,
             f"bound={report.pairwise_bound:.4f} worst_rate={worst:.4f} "
             f"violations={len(report.pairwise_violations)}")


def test_criterion_3_statistic_identity():
    report = harness.verify("llr_identity")
    _verdict(3, "statistic_identity", report.passed,
             f"max_rel_dev={report.max_deviation:.3e} tol={report.tolerance:.0e}")


def test_criterion_4_closed_forms():
    fr = harness.verify("f_closed_forms")
    ch = harness.verify("chernoff_gaussian")
    m = O.gaussian(0.0, 2.0)
    kl_dev = abs(O.sym_kl(m) - 4.0) + abs(O.sym_kl(m) - O.sym_kl_quadrature(m))
    ok = fr.passed and ch.passed and kl_dev <= 1e-9
    _verdict(4, "closed_forms", ok,
             f"f_dev={fr.max_deviation:.0f} chernoff_dev={ch.max_deviation:.2e} "
             f"sym_kl_dev={kl_dev:.2e}")


def test_criterion_5_expected_drift():
    report = harness.verify("expected_drift", trials=10_000)
    _verdict(5, "expected_drift", report.passed,
             f"worst={report.max_deviation:.2f} se (tol 3); {report.details}")


def _nondecreasing_within(rows, slack=2.0):
    rows = sorted(rows, key=lambda r: r.n)
    for a, b in zip(rows, rows[1:]):
        tol = slack * math.sqrt(a.stderr_T**2 + b.stderr_T**2)
        if b.mean_T < a.mean_T - tol:
            return False, f"mean_T drops {a.mean_T:.2f}->{b.mean_T:.2f} at n={b.n}"
    return True, ""


def test_criterion_6_tree_scaling_trends(figure1_summary):
    rows = figure1_summary.rows
    ok, why = True, ""
    for k in (3, 4, 5):
        good, msg = _nondecreasing_within([r for r in rows if r.label == str(k)])
        if not good:
            ok, why = False, f"k={k}: {msg}"
            break
    at_top = {r.label: r for r in rows if r.n == 16000}
    if ok:
        for lo, hi in (("5", "4"), ("4", "3")):
            tol = 2 * math.sqrt(at_top[lo].stderr_T**2 + at_top[hi].stderr_T**2)
            if at_top[lo].mean_T > at_top[hi].mean_T + tol:
                ok, why = False, f"mean_T(k={lo}) > mean_T(k={hi}) at n=16000"
                break
    means = " ".join(f"k={k}:{at_top[str(k)].mean_T:.2f}" for k in (3, 4, 5))
    _verdict(6, "tree_scaling_trends", ok, why or f"at n=16000: {means}")


def test_criterion_7_line_radius_ordering(figure2_summary):
    rows = figure2_summary.rows
    bad_cells = [r for r in rows if r.empirical_failure_rate > 0.2]
    at_top = {r.label: r for r in rows if r.n == 499}
    ok = not bad_cells
    why = f"{len(bad_cells)} cells exceed failure rate 0.2" if bad_cells else ""
    if ok:
        for lo, hi in (("sqrt_n", "5logn"), ("5logn", "0")):
            tol = 2 * math.sqrt(at_top[lo].stderr_T**2 + at_top[hi].stderr_T**2)
            if at_top[lo].mean_T > at_top[hi].mean_T + tol:
                ok, why = False, f"mean_T({lo}) > mean_T({hi}) at n=499"
                break
    means = " ".join(f"{s}:{at_top[s].mean_T:.2f}" for s in ("0", "5logn", "sqrt_n"))
    _verdict(7, "line_radius_ordering", ok, why or f"at n=499: {means}")


def test_criterion_8_bounds_bracket(figure1_summary, figure2_summary):
    rows = figure1_summary.rows + figure2_summary.rows
    crossed = [r for r in rows
               if r.lower_T is not None and r.upper_T is not None and r.lower_T > r.upper_T]
    m1, m2 = O.gaussian(0.0, 2.0), O.gaussian(0.0, 0.5)
    c_ok = all(O.best_epsilon(m)[1] < O.sym_kl(m) for m in (m1, m2))
    ok = not crossed and c_ok
    _verdict(8, "bounds_bracket", ok,
             f"{len(rows)} grid points, {len(crossed)} crossings, c<sym_kl={c_ok}")
