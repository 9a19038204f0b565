import json

import numpy as np
import pytest

from tsobs.benchmark import benchmark_design_spec
from tsobs.lmi import (DesignSpec, InfeasibleDesign, beta_residuals,
                       build_constraints, check_theorem1, conic_debug_dict,
                       design_from_dict, design_to_dict, pseudo_inverse,
                       solve_design, theta_bar_admissible)
from tsobs.model import Dimensions, PremiseSpec, TSModel, corner_bits

from conftest import sample_feasible_designs


# --- pseudo-inverse ---------------------------------------------------------

def test_pinv_benchmark_annihilator(bench_ts):
    # oracle: explicit SVD on the benchmark output matrix
    C = bench_ts.C
    U, s, Vt = np.linalg.svd(C, full_matrices=False)
    C_pinv_oracle = Vt.T @ np.diag(1.0 / s) @ U.T
    C_pinv, H = pseudo_inverse(C)
    np.testing.assert_allclose(C_pinv, C_pinv_oracle, atol=1e-12)
    np.testing.assert_allclose(H, np.diag([0.0, 0.0, 1.0]), atol=1e-12)


def test_pinv_identity():
    C_pinv, H = pseudo_inverse(np.eye(4))
    np.testing.assert_allclose(C_pinv, np.eye(4), atol=1e-14)
    np.testing.assert_allclose(H, np.zeros((4, 4)), atol=1e-14)


def test_pinv_orthonormal_rows():
    rng = np.random.default_rng(2)
    q, _ = np.linalg.qr(rng.normal(size=(5, 3)))
    C = q.T[:3]
    C_pinv, _ = pseudo_inverse(C)
    np.testing.assert_allclose(C_pinv, C.T, atol=1e-12)


def test_pinv_rejects_zero_matrix():
    with pytest.raises(ValueError):
        pseudo_inverse(np.zeros((2, 3)))


def test_moore_penrose_identities_random():
    rng = np.random.default_rng(23)
    for _ in range(100):
        m = int(rng.integers(1, 5))
        n = int(rng.integers(m, 7))
        C = rng.normal(size=(m, n))
        C_pinv, H = pseudo_inverse(C)
        np.testing.assert_allclose(C @ C_pinv @ C, C, atol=1e-10)
        np.testing.assert_allclose(C_pinv @ C @ C_pinv, C_pinv, atol=1e-10)
        np.testing.assert_allclose((C @ C_pinv).T, C @ C_pinv, atol=1e-10)
        np.testing.assert_allclose((C_pinv @ C).T, C_pinv @ C, atol=1e-10)
        # full row rank: right inverse, idempotent annihilator
        np.testing.assert_allclose(C @ C_pinv, np.eye(m), atol=1e-10)
        np.testing.assert_allclose(H @ H, H, atol=1e-10)


# --- rank conditions --------------------------------------------------------

def test_theorem1_benchmark_not_applicable(bench_ts):
    report = check_theorem1(bench_ts)
    assert not report.theorem1_applicable
    failing = {(e.family, e.i) for e in report.failing()}
    assert failing == {("A", 1), ("A", 2)}  # rank-2 A-transmission, third column zero


def test_theorem1_b_transmission_passes(bench_ts):
    report = check_theorem1(bench_ts)
    b_entries = [e for e in report.entries if e.family == "B"]
    assert all(e.passes and e.full_column_rank for e in b_entries)
    assert all(e.rank == 1 and e.rank_after_C == 1 for e in b_entries)
    # oracle: C @ Bbar = (1, 1)' has rank one
    assert np.linalg.matrix_rank(bench_ts.C @ bench_ts.Bbar[0, 0]) == 1


def test_theorem1_vacuous_for_zero_transmissions(bench_ts):
    ts = TSModel(dims=bench_ts.dims, A=bench_ts.A, B=bench_ts.B, F=bench_ts.F,
                 Abar=np.zeros_like(bench_ts.Abar), Bbar=np.zeros_like(bench_ts.Bbar),
                 Fbar=np.zeros_like(bench_ts.Fbar), C=bench_ts.C,
                 premises=bench_ts.premises, bits=bench_ts.bits)
    report = check_theorem1(ts)
    assert report.theorem1_applicable
    assert all(e.zero for e in report.entries)


# --- constraint assembly ----------------------------------------------------

def test_build_constraints_benchmark_structure(bench_ts):
    cs = build_constraints(bench_ts, benchmark_design_spec())
    names = [c.name for c in cs.constraints]
    assert names == ["pd_P", "pd_Q", "lmi12_1", "lmi12_2", "schur13"]
    assert len(cs.constraints) == 5
    by_name = {v.name: v for v in cs.variables}
    assert by_name["P"].rows == 3 and by_name["P"].symmetric
    assert by_name["Q"].rows == 3 and by_name["Q"].symmetric
    assert by_name["M_1"].rows == 3 and by_name["M_1"].cols == 2
    assert by_name["M_2"].rows == 3 and by_name["M_2"].cols == 2
    assert cs.gamma_fixed == pytest.approx(0.25)  # (1 * 1.0 * 0.5)^2


def test_build_constraints_no_parameters():
    dims = Dimensions(n=2, n_u=0, n_y=2, n_p=0, n_theta=0)
    prem = PremiseSpec(z_min=np.zeros(0), z_max=np.zeros(0), selectors=np.zeros((0, 2)))
    ts = TSModel(dims=dims, A=np.array([-np.eye(2)]), B=np.zeros((1, 2, 0)),
                 F=np.zeros((1, 2)), Abar=np.zeros((1, 0, 2, 2)),
                 Bbar=np.zeros((1, 0, 2, 0)), Fbar=np.zeros((1, 0, 2)),
                 C=np.eye(2), premises=prem, bits=corner_bits(0))
    cs = build_constraints(ts, DesignSpec(objective="min_beta"))
    assert [c.name for c in cs.constraints] == ["pd_P", "pd_Q", "lmi12_1"]
    assert cs.gamma_fixed == 0.0


def test_build_constraints_requires_theta_bar(bench_ts):
    with pytest.raises(ValueError):
        build_constraints(bench_ts, DesignSpec(objective="min_beta", theta_bar=None))


def test_stable_submodel_feasible_by_substitution():
    # A = -I, C = I: P = Q = (1/2 - delta) I with M = 0 satisfies the decay block
    from tsobs.lmi import _constraint_matrix
    dims = Dimensions(n=2, n_u=0, n_y=2, n_p=0, n_theta=0)
    prem = PremiseSpec(z_min=np.zeros(0), z_max=np.zeros(0), selectors=np.zeros((0, 2)))
    ts = TSModel(dims=dims, A=np.array([-np.eye(2)]), B=np.zeros((1, 2, 0)),
                 F=np.zeros((1, 2)), Abar=np.zeros((1, 0, 2, 2)),
                 Bbar=np.zeros((1, 0, 2, 0)), Fbar=np.zeros((1, 0, 2)),
                 C=np.eye(2), premises=prem, bits=corner_bits(0))
    cs = build_constraints(ts, DesignSpec(objective="min_beta"))
    val = 0.5 - 1e-3
    P = Q = val * np.eye(2)
    M = [np.zeros((2, 2))]
    blk = _constraint_matrix(cs, "lmi12_1", P, Q, M, 0.0, 0.0)
    assert np.linalg.eigvalsh(blk).min() >= 0.0  # -(PA + A'P + Q) - eps I is PSD


# --- synthesis --------------------------------------------------------------

def test_solve_benchmark_min_beta(bench_ts, bench_design):
    d = bench_design
    assert d.beta[0] <= 1e-6
    p_fro = np.linalg.norm(d.P, "fro")
    assert abs(d.P[0, 2]) <= 1e-6 * p_fro
    assert abs(d.P[1, 2]) <= 1e-6 * p_fro
    # P must not be constrained diagonal: the measured 2x2 block stays free
    assert d.P.shape == (3, 3)
    np.testing.assert_allclose(d.P, d.P.T, atol=0)
    assert d.gamma == pytest.approx(0.25)
    assert d.theta_bar_max == pytest.approx(0.5)


def test_certificate_soundness(bench_ts, bench_design):
    # direct eigenvalue computations, independent of the solver
    d = bench_design
    eps = 1e-6
    assert np.linalg.eigvalsh(d.P).min() >= eps / 2
    assert np.linalg.eigvalsh(d.Q).min() >= eps / 2
    for i in range(2):
        Acl = bench_ts.A[i] - d.L[i] @ bench_ts.C
        S = d.P @ Acl + Acl.T @ d.P + d.Q
        assert np.linalg.eigvalsh(S).max() <= 1e-7
    blk = np.block([[d.Q - d.gamma * np.eye(3), d.P], [d.P, np.eye(3)]])
    assert np.linalg.eigvalsh(blk).min() >= -1e-7


def test_gain_consistency(bench_design):
    for i in range(2):
        np.testing.assert_allclose(bench_design.P @ bench_design.L[i],
                                   bench_design.M[i], atol=1e-9)


def test_h_annihilator_invariants(bench_design):
    H = bench_design.H
    np.testing.assert_allclose(H, H.T, atol=1e-10)
    np.testing.assert_allclose(H @ H, H, atol=1e-10)


def test_beta_residual_recomputation(bench_ts, bench_design):
    # the reported residual equals a from-scratch recomputation
    d = bench_design
    recomputed = 0.0
    PH = d.P @ d.H
    for i in range(2):
        recomputed += np.linalg.norm(bench_ts.Abar[i, 0].T @ PH, "fro")
        recomputed += np.linalg.norm(bench_ts.Bbar[i, 0].T @ PH, "fro")
        recomputed += np.linalg.norm(bench_ts.Fbar[i, 0].reshape(-1, 1).T @ PH, "fro")
    assert abs(recomputed - d.beta[0]) <= 1e-9
    np.testing.assert_allclose(beta_residuals(bench_ts, d.P, d.H), d.beta, atol=1e-12)


def test_solve_max_gamma_consistency(bench_ts):
    d = solve_design(bench_ts, DesignSpec(objective="max_gamma"))
    assert d.gamma > 0.25  # certifies more than the default bound
    admissible = theta_bar_admissible(d, bench_ts.dims.n_theta)
    assert d.theta_bar_max <= admissible + 1e-6
    # the simulation bound used elsewhere stays certified
    assert d.theta_bar_max >= 0.5


def test_solve_identity_output_floor():
    # full state measurement: H = 0, so the residual floor is reached exactly
    dims = Dimensions(n=2, n_u=1, n_y=2, n_p=1, n_theta=1)
    prem = PremiseSpec(z_min=np.array([-1.0]), z_max=np.array([1.0]),
                       selectors=np.array([[0.5, 0.0, 0.0]]))
    A = np.stack([np.array([[-1.0, 0.3], [0.0, -2.0]]),
                  np.array([[-1.5, 0.0], [0.2, -1.0]])])
    ts = TSModel(dims=dims, A=A, B=np.zeros((2, 2, 1)), F=np.zeros((2, 2)),
                 Abar=0.4 * np.ones((2, 1, 2, 2)), Bbar=np.zeros((2, 1, 2, 1)),
                 Fbar=np.zeros((2, 1, 2)), C=np.eye(2), premises=prem)
    d = solve_design(ts, DesignSpec(objective="min_beta", theta_bar=0.2))
    np.testing.assert_allclose(d.H, np.zeros((2, 2)), atol=1e-12)
    assert d.beta[0] == 0.0


def test_unstable_unobservable_is_infeasible():
    # PBH oracle: the unstable eigenvalue +1 is unobservable through C
    A = np.diag([1.0, -1.0])
    C = np.array([[0.0, 1.0]])
    pbh = np.vstack([1.0 * np.eye(2) - A, C])
    assert np.linalg.matrix_rank(pbh) < 2
    dims = Dimensions(n=2, n_u=0, n_y=1, n_p=0, n_theta=0)
    prem = PremiseSpec(z_min=np.zeros(0), z_max=np.zeros(0), selectors=np.zeros((0, 1)))
    ts = TSModel(dims=dims, A=np.array([A]), B=np.zeros((1, 2, 0)), F=np.zeros((1, 2)),
                 Abar=np.zeros((1, 0, 2, 2)), Bbar=np.zeros((1, 0, 2, 0)),
                 Fbar=np.zeros((1, 0, 2)), C=C, premises=prem, bits=corner_bits(0))
    with pytest.raises(InfeasibleDesign):
        solve_design(ts, DesignSpec(objective="feasibility_only"))


def test_robust_stability_sampling(bench_ts, bench_design):
    # blended closed-loop quadratic form stays nonpositive for certified theta
    rng = np.random.default_rng(31)
    d = bench_design
    theta_bar = d.theta_bar_max
    for _ in range(500):
        w = rng.random(2)
        mu = w / w.sum()
        theta = rng.uniform(-theta_bar, theta_bar)
        Ablend = mu[0] * bench_ts.A[0] + mu[1] * bench_ts.A[1]
        Lblend = mu[0] * d.L[0] + mu[1] * d.L[1]
        Abarblend = mu[0] * bench_ts.Abar[0, 0] + mu[1] * bench_ts.Abar[1, 0]
        Acl = Ablend - Lblend @ bench_ts.C + theta * Abarblend
        e = rng.normal(size=3)
        e /= np.linalg.norm(e)
        assert e @ (d.P @ Acl + Acl.T @ d.P) @ e <= 1e-7


# --- admissible bound -------------------------------------------------------

def test_theta_bar_admissible_formula():
    from tsobs.lmi import ObserverDesign
    mk = lambda P, Q, a_bar: ObserverDesign(
        P=P, Q=Q, M=np.zeros((1, 2, 1)), L=np.zeros((1, 2, 1)), gamma=0.0,
        a_bar=a_bar, theta_bar_max=1.0, beta=np.zeros(1), rho=np.ones(1),
        C_pinv=np.zeros((2, 1)), H=np.zeros((2, 2)))
    assert theta_bar_admissible(mk(np.eye(2), np.eye(2), 1.0), 1) == pytest.approx(0.5)
    assert theta_bar_admissible(mk(2 * np.eye(2), 4 * np.eye(2), 1.0), 2) == pytest.approx(0.5)
    assert theta_bar_admissible(mk(np.eye(2), np.eye(2), 0.0), 1) == np.inf


def test_theta_bar_admissible_benchmark(bench_design):
    assert theta_bar_admissible(bench_design, 1) >= 0.5


# --- randomized feasible models (margins + consistency) ----------------------

def test_randomized_designs_certified():
    pairs = sample_feasible_designs(seed=101, count=5)
    for model, d in pairs:
        n = model.dims.n
        assert np.linalg.eigvalsh(d.P).min() > 0
        assert np.linalg.eigvalsh(d.Q).min() > 0
        for i in range(model.dims.r):
            Acl = model.A[i] - d.L[i] @ model.C
            S = d.P @ Acl + Acl.T @ d.P + d.Q
            assert np.linalg.eigvalsh(S).max() <= 1e-7
        blk = np.block([[d.Q - d.gamma * np.eye(n), d.P], [d.P, np.eye(n)]])
        assert np.linalg.eigvalsh(blk).min() >= -1e-7
        assert d.theta_bar_max <= theta_bar_admissible(d, model.dims.n_theta) + 1e-6


# --- serialization and debug export -----------------------------------------

def test_design_roundtrip_bitwise(bench_design):
    doc = design_to_dict(bench_design)
    blob = json.dumps(doc)
    doc2 = design_to_dict(design_from_dict(json.loads(blob)))
    assert json.dumps(doc2) == blob


def test_conic_debug_export_matches_direct_evaluation(bench_ts):
    # reconstruct each PSD block from the exported triplets at a random point
    from tsobs.lmi import _constraint_matrix, _unpack
    for spec in (benchmark_design_spec(), DesignSpec(objective="max_gamma")):
        cs = build_constraints(bench_ts, spec)
        doc = conic_debug_dict(cs)
        assert doc["format"] == "tsobs-conic-debug-v1"
        assert doc["num_scalars"] == cs.n_scalars
        rng = np.random.default_rng(13)
        x = rng.normal(size=cs.n_scalars)
        P, Q, Ms, gamma, t = _unpack(cs, x)
        for cone in doc["psd_cones"]:
            direct = _constraint_matrix(cs, cone["name"], P, Q, Ms, gamma, t)
            rebuilt = np.array(cone["constant"], dtype=float)
            for coeff in cone["coefficients"]:
                for i, j, v in coeff["triplets"]:
                    rebuilt[i, j] += x[coeff["var"]] * v
            np.testing.assert_allclose(rebuilt, np.atleast_2d(direct), atol=1e-12)


def test_conic_debug_objective_sections(bench_ts):
    doc = conic_debug_dict(build_constraints(bench_ts, benchmark_design_spec()))
    assert doc["objective"]["kind"] == "min_beta"
    assert len(doc["objective"]["soc_terms"]) == 6  # 2 vertices x 3 families
    doc_g = conic_debug_dict(build_constraints(bench_ts, DesignSpec(objective="max_gamma")))
    assert doc_g["objective"]["sense"] == "maximize"
    names = [c["name"] for c in doc_g["psd_cones"]]
    assert "cap_P" in names and "iso13" in names
