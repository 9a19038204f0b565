"""Independent certification of (model, design) pairs.

Every condition the design is supposed to satisfy is re-checked here from
scratch with symmetric eigenvalue computations, regardless of how the design
was produced.  Margin convention: for the eigenvalue conditions the margin is
a signed distance to satisfaction (positive = satisfied, ``pass`` iff
``margin >= -tol``).  The two informational condition kinds deviate:
``thm1_rank`` stores minus the number of failing rank tests, and the
``thm2_residual_j`` records store the recomputed residual itself with
``pass`` iff it is below the residual tolerance.

``overall_pass`` requires positive definiteness of P and Q, the per-vertex
decay conditions, and at least one of the two parameter-robustness forms
(Schur block or eigenvalue ratio); the rank and residual records never gate
it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .model import TSModel
from .lmi import ObserverDesign, check_theorem1

__all__ = [
    "ConditionRecord",
    "CertificationReport",
    "LyapunovAudit",
    "certify",
    "lyapunov_decrease_audit",
    "constant_theta_windows",
    "report_to_dict",
    "report_from_dict",
    "save_report",
]

DEFAULT_TOL = 1e-7
RESIDUAL_TOL = 1e-6
ROBUST_SAMPLES = 100


@dataclass(frozen=True)
class ConditionRecord:
    condition: str
    margin: float
    passed: bool
    tolerance: float
    mandatory: bool


@dataclass(frozen=True)
class CertificationReport:
    records: tuple
    overall_pass: bool
    theta_bar_certified: float
    robust_sampling: dict | None  # spot-check attached when the ratio form holds

    def record(self, condition):
        for rec in self.records:
            if rec.condition == condition:
                return rec
        raise KeyError(condition)


def _lmin(M):
    return float(np.linalg.eigvalsh(0.5 * (M + M.T)).min())


def _lmax(M):
    return float(np.linalg.eigvalsh(0.5 * (M + M.T)).max())


def _pd_record(name, M, tol):
    asym = float(np.max(np.abs(M - M.T)))
    if asym > tol:
        margin = -asym
    else:
        margin = _lmin(M)
    return ConditionRecord(name, margin, margin >= -tol, tol, mandatory=True)


def _recompute_beta(model, P, H):
    # independent of lmi.beta_residuals by intent: this is the audit route
    PH = P @ H
    out = []
    for j in range(model.dims.n_theta):
        total = 0.0
        for i in range(model.dims.r):
            for stack in (model.Abar, model.Bbar, model.Fbar):
                X = stack[i, j]
                if X.ndim == 1:
                    X = X.reshape(-1, 1)
                total += float(np.linalg.norm(X.T @ PH, "fro"))
        out.append(total)
    return out


def _robust_sample(model, design, theta_bound, samples, seed=20240901):
    """Sampled check of the blended closed-loop quadratic form.

    Draws random convex weights, parameter vectors within the certified bound
    and unit directions, and evaluates
    ``e' [P (A(mu) - L(mu) C + sum_j theta_j Abar_j(mu)) + (.)' P] e``.
    """
    rng = np.random.default_rng(seed)
    d = model.dims
    P = design.P
    worst = -math.inf
    bound = 0.0 if not np.isfinite(theta_bound) else theta_bound
    for _ in range(samples):
        w = rng.random(d.r)
        mu = w / w.sum()
        Ablend = np.tensordot(mu, model.A, axes=1)
        Lblend = np.tensordot(mu, design.L, axes=1)
        Acl = Ablend - Lblend @ model.C
        if d.n_theta:
            theta = rng.uniform(-bound, bound, size=d.n_theta)
            for j in range(d.n_theta):
                Acl = Acl + theta[j] * np.tensordot(mu, model.Abar[:, j], axes=1)
        e = rng.normal(size=d.n)
        e /= np.linalg.norm(e)
        val = float(e @ (P @ Acl + Acl.T @ P) @ e)
        worst = max(worst, val)
    return {"samples": samples, "worst_value": worst, "passed": worst <= DEFAULT_TOL}


def certify(model: TSModel, design: ObserverDesign, tol: float = DEFAULT_TOL) -> CertificationReport:
    """Re-verify every design condition with numeric margins.

    Pure and deterministic: identical inputs produce an identical report.
    """
    d = model.dims
    if design.P.shape != (d.n, d.n) or design.L.shape != (d.r, d.n, d.n_y):
        raise ValueError("design dimensions do not match the model")
    P, Q = design.P, design.Q
    records = [_pd_record("pd_P", P, tol), _pd_record("pd_Q", Q, tol)]

    Ps = 0.5 * (P + P.T)
    for i in range(d.r):
        Acl = model.A[i] - design.L[i] @ model.C
        S = Ps @ Acl + Acl.T @ Ps + Q
        margin = -_lmax(S)
        records.append(ConditionRecord(f"lmi12_{i + 1}", margin, margin >= -tol,
                                       tol, mandatory=True))

    n_a = d.n_theta * design.a_bar
    if d.n_theta == 0:
        records.append(ConditionRecord("schur13", math.inf, True, tol, mandatory=False))
        records.append(ConditionRecord("eig10", math.inf, True, tol, mandatory=False))
        theta_cert = math.inf
    else:
        blk = np.block([[Q - design.gamma * np.eye(d.n), Ps], [Ps, np.eye(d.n)]])
        m13 = _lmin(blk)
        records.append(ConditionRecord("schur13", m13, m13 >= -tol, tol, mandatory=False))
        ratio = _lmin(Q) / (2.0 * _lmax(Ps))
        if n_a > 0:
            theta_cert = ratio / n_a
            # the ratio form is checked at the design's own claimed bound
            m10 = (ratio - n_a * design.theta_bar_max
                   if np.isfinite(design.theta_bar_max) else -math.inf)
        else:
            theta_cert = math.inf
            m10 = ratio
        records.append(ConditionRecord("eig10", m10, m10 >= -tol, tol, mandatory=False))

    rank_report = check_theorem1(model)
    n_fail = len(rank_report.failing())
    records.append(ConditionRecord("thm1_rank", -float(n_fail),
                                   rank_report.theorem1_applicable, 0.0, mandatory=False))

    for j, bj in enumerate(_recompute_beta(model, Ps, design.H)):
        records.append(ConditionRecord(f"thm2_residual_{j + 1}", bj, bj <= RESIDUAL_TOL,
                                       RESIDUAL_TOL, mandatory=False))

    by_name = {rec.condition: rec for rec in records}
    mandatory_ok = all(rec.passed for rec in records if rec.mandatory)
    robust_ok = by_name["schur13"].passed or by_name["eig10"].passed
    overall = mandatory_ok and robust_ok

    sampling = None
    if by_name["eig10"].passed and d.n_theta > 0:
        sampling = _robust_sample(model, design, theta_cert, ROBUST_SAMPLES)

    return CertificationReport(records=tuple(records), overall_pass=overall,
                               theta_bar_certified=float(theta_cert),
                               robust_sampling=sampling)


# ---------------------------------------------------------------------------
# Lyapunov decrease audit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LyapunovAudit:
    steps: int                  # consecutive sample pairs audited
    max_positive_jump: float
    violation_fraction: float   # fraction of steps with increase beyond tol_V
    tol_V: float
    saturated_fraction: float   # samples with the premise clamp active
    window: tuple               # (start index, end index) inclusive


def constant_theta_windows(trajectory):
    """Maximal index windows over which the recorded parameter is constant.

    Returns a list of ``(start, end)`` inclusive sample-index pairs.
    """
    theta = np.asarray(trajectory.theta)
    n = theta.shape[0]
    if n == 0:
        return []
    windows = []
    start = 0
    for k in range(1, n):
        if not np.array_equal(theta[k], theta[start]):
            windows.append((start, k - 1))
            start = k
    windows.append((start, n - 1))
    return windows


def lyapunov_decrease_audit(trajectory, design: ObserverDesign, window=None) -> LyapunovAudit:
    """Audit the decrease of ``V = e_x' P e_x + sum_j rho_j e_theta_j^2``.

    ``window`` is an inclusive pair of sample indices (defaults to the whole
    trajectory); the parameter must be constant over it, otherwise a
    ``ValueError`` is raised.  The permitted per-step increase couples the
    annihilation residuals to the trajectory magnitude::

        tol_V = sum(beta) * max_k(||e_x|| * (||x_hat|| + ||u|| + 1)) + 1e-9

    so a residual-free design is held to (numerically) strict decrease while
    an optimization-based one is allowed the bias its residuals can inject.
    """
    k0, k1 = window if window is not None else (0, len(trajectory.t) - 1)
    if not (0 <= k0 <= k1 < len(trajectory.t)):
        raise ValueError("audit window out of range")
    theta = np.asarray(trajectory.theta)[k0:k1 + 1]
    if theta.shape[0] and not np.all(theta == theta[0]):
        raise ValueError("parameter varies inside the audit window; "
                         "split it with constant_theta_windows()")

    x = np.asarray(trajectory.x)[k0:k1 + 1]
    xh = np.asarray(trajectory.x_hat)[k0:k1 + 1]
    th_hat = np.asarray(trajectory.theta_hat)[k0:k1 + 1]
    u = np.asarray(trajectory.u)[k0:k1 + 1]
    sat = np.asarray(trajectory.sat)[k0:k1 + 1]

    e_x = x - xh
    e_th = theta - th_hat
    P = 0.5 * (design.P + design.P.T)
    V = np.einsum("ki,ij,kj->k", e_x, P, e_x) + (e_th ** 2) @ design.rho

    scale = np.linalg.norm(e_x, axis=1) * (np.linalg.norm(xh, axis=1)
                                           + np.linalg.norm(u, axis=1) + 1.0)
    tol_V = float(design.beta.sum()) * float(scale.max(initial=0.0)) + 1e-9

    dV = np.diff(V)
    steps = len(dV)
    max_jump = float(dV.max(initial=0.0))
    violations = int(np.sum(dV > tol_V))
    return LyapunovAudit(
        steps=steps,
        max_positive_jump=max(max_jump, 0.0),
        violation_fraction=violations / steps if steps else 0.0,
        tol_V=tol_V,
        saturated_fraction=float(np.mean(sat)) if len(sat) else 0.0,
        window=(k0, k1),
    )


# ---------------------------------------------------------------------------
# report serialization
# ---------------------------------------------------------------------------

def report_to_dict(report: CertificationReport):
    return {
        "overall_pass": report.overall_pass,
        "theta_bar_certified": report.theta_bar_certified,
        "conditions": [
            {"condition": r.condition, "margin": float(r.margin), "pass": bool(r.passed),
             "tolerance": float(r.tolerance), "mandatory": bool(r.mandatory)}
            for r in report.records
        ],
        "robust_sampling": report.robust_sampling,
    }


def report_from_dict(doc) -> CertificationReport:
    records = tuple(
        ConditionRecord(condition=c["condition"], margin=float(c["margin"]),
                        passed=bool(c["pass"]), tolerance=float(c["tolerance"]),
                        mandatory=bool(c["mandatory"]))
        for c in doc["conditions"]
    )
    return CertificationReport(records=records, overall_pass=bool(doc["overall_pass"]),
                               theta_bar_certified=float(doc["theta_bar_certified"]),
                               robust_sampling=doc.get("robust_sampling"))


def save_report(report: CertificationReport, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report), fh, indent=2)
        fh.write("\n")
