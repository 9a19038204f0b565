import dataclasses
import json

import numpy as np
import pytest

from tsobs.benchmark import benchmark_scenario
from tsobs.certify import (certify, constant_theta_windows, lyapunov_decrease_audit,
                           report_from_dict, report_to_dict)
from tsobs.lmi import DesignSpec, solve_design
from tsobs.simulate import run

from conftest import sample_feasible_designs


def test_benchmark_design_certifies(bench_ts, bench_design):
    report = certify(bench_ts, bench_design)
    assert report.overall_pass
    assert report.record("thm2_residual_1").margin <= 1e-6
    assert report.record("pd_P").passed and report.record("pd_Q").passed
    assert report.record("lmi12_1").passed and report.record("lmi12_2").passed
    assert report.record("schur13").passed
    assert not report.record("thm1_rank").passed  # informational only
    assert report.theta_bar_certified >= 0.5


def test_asymmetric_P_fails(bench_ts, bench_design):
    P_bad = bench_design.P.copy()
    P_bad[0, 1] += 1e-3
    broken = dataclasses.replace(bench_design, P=P_bad)
    report = certify(bench_ts, broken)
    rec = report.record("pd_P")
    assert not rec.passed
    assert rec.margin == pytest.approx(-1e-3, rel=1e-6)  # reported asymmetry
    assert not report.overall_pass


def test_zero_gain_fails_decay_condition(bench_ts, bench_design):
    broken = dataclasses.replace(bench_design, L=np.zeros_like(bench_design.L))
    report = certify(bench_ts, broken)
    # the open-loop vertices do not satisfy the decay condition with this Q
    assert not report.record("lmi12_2").passed
    assert report.record("lmi12_2").margin < 0
    assert not report.overall_pass


def test_certify_rejects_dimension_mismatch(bench_ts):
    from tsobs.lmi import ObserverDesign
    small = ObserverDesign(P=np.eye(2), Q=np.eye(2), M=np.zeros((1, 2, 1)),
                           L=np.zeros((1, 2, 1)), gamma=0.0, a_bar=0.0,
                           theta_bar_max=np.inf, beta=np.zeros(0), rho=np.zeros(0),
                           C_pinv=np.zeros((2, 1)), H=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        certify(bench_ts, small)


def test_certify_pure_and_idempotent(bench_ts, bench_design):
    r1 = certify(bench_ts, bench_design)
    r2 = certify(bench_ts, bench_design)
    assert r1 == r2
    assert json.dumps(report_to_dict(r1)) == json.dumps(report_to_dict(r2))


def test_solve_certify_roundtrip_property():
    # any design the solver returns must certify with default tolerances
    for model, design in sample_feasible_designs(seed=57, count=5):
        report = certify(model, design)
        assert report.overall_pass


def test_eig10_pass_implies_sampled_robustness(bench_ts, bench_design):
    report = certify(bench_ts, bench_design)
    assert report.record("eig10").passed
    assert report.robust_sampling is not None
    assert report.robust_sampling["passed"]
    assert report.robust_sampling["samples"] == 100


def test_report_roundtrip(bench_ts, bench_design):
    report = certify(bench_ts, bench_design)
    doc = report_to_dict(report)
    blob = json.dumps(doc)
    assert json.dumps(report_to_dict(report_from_dict(json.loads(blob)))) == blob


# --- Lyapunov decrease audit -------------------------------------------------

@pytest.fixture(scope="module")
def short_run(bench_ts, bench_design):
    scenario = benchmark_scenario(t_end=8.0, dt=1e-3, record_stride=10)
    traj, _ = run(bench_ts, bench_design, scenario)
    return traj


def test_audit_constant_window_nonincreasing(bench_ts, bench_design, short_run):
    windows = constant_theta_windows(short_run)
    assert len(windows) == 2  # parameter switches once at mid-run
    for window in windows:
        audit = lyapunov_decrease_audit(short_run, bench_design, window=window)
        assert 1.0 - audit.violation_fraction >= 0.99
        assert audit.saturated_fraction == 0.0


def test_audit_rejects_varying_parameter(bench_design, short_run):
    with pytest.raises(ValueError):
        lyapunov_decrease_audit(short_run, bench_design)  # spans the switch


def test_audit_zero_error_run(bench_ts, bench_design):
    # start on the plant with a perfect estimate and no parameter action
    scenario = benchmark_scenario(t_end=1.0, dt=1e-3, record_stride=10)
    scenario = dataclasses.replace(
        scenario, x0=np.zeros(3), xhat0=np.zeros(3), thetahat0=np.zeros(1),
        theta_profile=((0.0, np.zeros(1)),),
        input_signal=dataclasses.replace(scenario.input_signal, kind="zero"))
    traj, _ = run(bench_ts, bench_design, scenario)
    audit = lyapunov_decrease_audit(traj, bench_design)
    np.testing.assert_array_equal(traj.V, np.zeros_like(traj.V))
    assert audit.max_positive_jump == 0.0
    assert audit.violation_fraction == 0.0


def test_audit_reports_violations_for_sloppy_design(bench_ts, bench_design):
    # a feasible but non-optimized design has large residuals; the audit must
    # report the violation fraction rather than fail silently
    sloppy = solve_design(bench_ts, DesignSpec(objective="feasibility_only",
                                               theta_bar=0.5))
    assert sloppy.beta[0] > 1e-6
    scenario = benchmark_scenario(t_end=5.0, dt=1e-3, record_stride=10)
    scenario = dataclasses.replace(scenario, theta_profile=((0.0, np.array([0.5])),))
    traj, _ = run(bench_ts, sloppy, scenario)
    audit = lyapunov_decrease_audit(traj, sloppy)
    assert np.isfinite(audit.violation_fraction)
    assert audit.tol_V > 1e-9  # residual-driven tolerance is in effect


def test_audit_window_bounds(bench_design, short_run):
    with pytest.raises(ValueError):
        lyapunov_decrease_audit(short_run, bench_design, window=(0, 10 ** 9))
