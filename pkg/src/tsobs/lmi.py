"""Observer gain synthesis for polytopic models via semidefinite programming.

The synthesis problem finds a common Lyapunov matrix ``P``, a decay matrix
``Q`` and per-vertex output-injection gains ``L_i = P^{-1} M_i`` such that

* ``P >= eps*I``, ``Q >= eps*I``,
* ``P A_i + A_i' P - M_i C - C' M_i' + Q <= -eps*I`` for every vertex,
* the parameter-robustness block ``[[Q - gamma*I, P], [P, I]] >= 0`` holds,
  where ``gamma = (n_theta * a_bar * theta_bar)**2`` couples the certified
  parameter magnitude to the decay margin.

Three objectives are supported: minimizing the annihilation residuals
``beta_j = sum_i ||Abar_ij' P H||_F + ||Bbar_ij' P H||_F + ||Fbar_ij' P H||_F``
(with ``H = I - pinv(C) C`` the output annihilator), maximizing ``gamma`` to
find the largest certifiable parameter bound, or a plain feasibility solve.
Strict inequalities are realized with the margin ``eps`` throughout.

Solutions are never trusted as returned: the solver output is post-processed
(symmetrized, ``gamma`` clipped to what eigenvalue computations certify) and
re-verified before an :class:`ObserverDesign` is handed back.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from .model import TSModel

__all__ = [
    "DesignSpec",
    "ObserverDesign",
    "RankEntry",
    "RankReport",
    "MatrixConstraint",
    "VariableBlock",
    "ConstraintSystem",
    "InfeasibleDesign",
    "SolverFailure",
    "pseudo_inverse",
    "check_theorem1",
    "beta_residuals",
    "build_constraints",
    "solve_design",
    "theta_bar_admissible",
    "design_to_dict",
    "design_from_dict",
    "conic_debug_dict",
]

PINV_RTOL = 1e-12
RANK_RTOL = 1e-10
GAMMA_CAP = 1e4          # certifying theta_bar beyond ~100/a_bar is meaningless
SELF_CHECK_TOL = 1e-7

# preferred solver first; SCS at tight accuracy as fallback
_SOLVER_CHAIN = (
    (cp.CLARABEL, {}),
    (cp.SCS, {"eps": 1e-9, "max_iters": 200_000}),
)

_OK = {cp.OPTIMAL, cp.OPTIMAL_INACCURATE}
_INFEASIBLE = {cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE}


class InfeasibleDesign(Exception):
    """No observer of this structure exists for the requested parameter bound."""


class SolverFailure(Exception):
    """The conic solver broke down numerically (distinct from infeasibility)."""


@dataclass(frozen=True)
class DesignSpec:
    """Inputs of the synthesis problem.

    ``theta_bar`` is the assumed bound on each unknown parameter; it is
    required for the ``min_beta`` and ``feasibility_only`` objectives whenever
    a parameter enters through a nonzero A-transmission, and ignored for
    ``max_gamma``.  ``rho`` (adaptation gains, one per parameter) is not a
    decision variable; it is carried through to the returned design.
    """

    objective: str = "min_beta"  # min_beta | max_gamma | feasibility_only
    theta_bar: float | None = None
    pd_margin: float = 1e-6
    rho: tuple = None

    def __post_init__(self):
        if self.objective not in ("min_beta", "max_gamma", "feasibility_only"):
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.pd_margin <= 0:
            raise ValueError("pd_margin must be positive")
        if self.theta_bar is not None and self.theta_bar <= 0:
            raise ValueError("theta_bar must be positive when provided")
        if self.rho is not None:
            rho = tuple(float(v) for v in self.rho)
            if any(v <= 0 for v in rho):
                raise ValueError("adaptation gains rho must be positive")
            object.__setattr__(self, "rho", rho)


@dataclass(frozen=True, eq=False)
class ObserverDesign:
    """A solved observer: Lyapunov matrix, gains and certificates.

    Shape coherence is enforced here; the numerical conditions are the
    business of :func:`tsobs.certify.certify`, so deliberately broken designs
    can be constructed for testing.
    """

    P: np.ndarray            # (n, n)
    Q: np.ndarray            # (n, n)
    M: np.ndarray            # (r, n, n_y)
    L: np.ndarray            # (r, n, n_y)
    gamma: float
    a_bar: float
    theta_bar_max: float
    beta: np.ndarray         # (n_theta,)
    rho: np.ndarray          # (n_theta,)
    C_pinv: np.ndarray       # (n, n_y)
    H: np.ndarray            # (n, n)

    def __post_init__(self):
        for name in ("P", "Q", "M", "L", "beta", "rho", "C_pinv", "H"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        for name in ("gamma", "a_bar", "theta_bar_max"):
            object.__setattr__(self, name, float(getattr(self, name)))
        n = self.P.shape[0]
        if self.P.shape != (n, n) or self.Q.shape != (n, n) or self.H.shape != (n, n):
            raise ValueError("P, Q and H must be square of the same order")
        if self.M.shape != self.L.shape or self.M.ndim != 3 or self.M.shape[1] != n:
            raise ValueError("M and L must be (r, n, n_y) stacks")
        if self.C_pinv.shape != (n, self.M.shape[2]):
            raise ValueError("C_pinv must be n x n_y")
        if self.beta.shape != self.rho.shape:
            raise ValueError("beta and rho must both have length n_theta")


@dataclass(frozen=True)
class RankEntry:
    """Rank test of one transmission matrix (``family`` in {A, B, F})."""

    family: str
    i: int                   # submodel index, 1-based
    j: int                   # parameter index, 1-based
    zero: bool
    full_column_rank: bool
    rank: int
    rank_after_C: int
    passes: bool


@dataclass(frozen=True)
class RankReport:
    """Applicability test of the restrictive rank-based design route.

    A nonzero transmission matrix passes when it has full column rank and
    multiplying by C preserves its rank; identically-zero matrices are
    skipped.  ``theorem1_applicable`` is the conjunction over all entries.
    """

    entries: tuple
    theorem1_applicable: bool

    def failing(self):
        return tuple(e for e in self.entries if not e.passes)


def pseudo_inverse(C):
    """Moore-Penrose pseudo-inverse of C and the annihilator ``H = I - pinv(C) C``.

    Computed through the singular value decomposition; singular values below
    ``1e-12`` times the largest are truncated.
    """
    C = np.asarray(C, dtype=float)
    if not np.any(C):
        raise ValueError("C must be nonzero")
    C_pinv = np.linalg.pinv(C, rcond=PINV_RTOL)
    H = np.eye(C.shape[1]) - C_pinv @ C
    return C_pinv, H


def _rank(M):
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def check_theorem1(model: TSModel) -> RankReport:
    """Run the per-matrix rank conditions of the restrictive design route."""
    C = model.C
    entries = []
    stacks = {"A": model.Abar, "B": model.Bbar, "F": model.Fbar}
    for fam, stack in stacks.items():
        for i in range(model.dims.r):
            for j in range(model.dims.n_theta):
                X = stack[i, j]
                if X.ndim == 1:
                    X = X.reshape(-1, 1)
                if not np.any(X):
                    entries.append(RankEntry(fam, i + 1, j + 1, zero=True,
                                             full_column_rank=False, rank=0,
                                             rank_after_C=0, passes=True))
                    continue
                rk = _rank(X)
                rk_c = _rank(C @ X)
                full = rk == X.shape[1]
                entries.append(RankEntry(fam, i + 1, j + 1, zero=False,
                                         full_column_rank=full, rank=rk,
                                         rank_after_C=rk_c, passes=full and rk_c == rk))
    applicable = all(e.passes for e in entries)
    return RankReport(entries=tuple(entries), theorem1_applicable=applicable)


def beta_residuals(model: TSModel, P, H):
    """Annihilation residuals ``beta_j`` of a candidate Lyapunov matrix."""
    P = np.asarray(P, dtype=float)
    beta = np.zeros(model.dims.n_theta)
    PH = P @ H
    for j in range(model.dims.n_theta):
        total = 0.0
        for i in range(model.dims.r):
            total += np.linalg.norm(model.Abar[i, j].T @ PH, "fro")
            total += np.linalg.norm(model.Bbar[i, j].T @ PH, "fro")
            total += np.linalg.norm(model.Fbar[i, j].reshape(-1, 1).T @ PH, "fro")
        beta[j] = total
    return beta


def max_transmission_norm(model: TSModel) -> float:
    """Largest spectral norm over all A-transmission matrices (0 if none)."""
    if model.dims.n_theta == 0:
        return 0.0
    return float(max(np.linalg.norm(model.Abar[i, j], 2)
                     for i in range(model.dims.r) for j in range(model.dims.n_theta)))


# ---------------------------------------------------------------------------
# constraint system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatrixConstraint:
    name: str   # pd_P, pd_Q, lmi12_<i>, schur13, cap_P, iso13
    dim: int    # order of the required-PSD block


@dataclass(frozen=True)
class VariableBlock:
    name: str
    rows: int
    cols: int
    symmetric: bool
    offset: int
    size: int


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    """Solver-agnostic description of the synthesis program.

    ``gamma_fixed`` is the robustness level for the fixed-bound objectives and
    ``None`` when gamma is a decision variable (max_gamma).  The max_gamma
    program carries two extra blocks (``cap_P``, ``iso13``) that bound the
    spread of P so that the eigenvalue-ratio certificate holds alongside the
    Schur block at the optimum.
    """

    model: TSModel
    objective: str
    epsilon: float
    gamma_fixed: float | None
    a_bar: float
    theta_bar: float | None
    C_pinv: np.ndarray
    H: np.ndarray
    constraints: tuple       # MatrixConstraint, in emission order
    variables: tuple         # VariableBlock, packed order
    linear: tuple            # names of scalar linear constraints

    @property
    def n_scalars(self):
        return sum(v.size for v in self.variables)


def _sym_size(n):
    return n * (n + 1) // 2


def build_constraints(model: TSModel, spec: DesignSpec) -> ConstraintSystem:
    """Assemble the synthesis constraint system for a model and design spec.

    With no unknown parameters the program degenerates to a plain Luenberger
    design: the robustness block is omitted and gamma is zero.
    """
    d = model.dims
    a_bar = max_transmission_norm(model)
    C_pinv, H = pseudo_inverse(model.C)

    if spec.objective == "max_gamma":
        gamma_fixed = None if d.n_theta > 0 else 0.0
    elif d.n_theta == 0 or a_bar == 0.0:
        gamma_fixed = 0.0
    else:
        if spec.theta_bar is None:
            raise ValueError("theta_bar is required for this objective when a "
                             "parameter enters through a nonzero A-transmission")
        gamma_fixed = (d.n_theta * a_bar * spec.theta_bar) ** 2

    cons = [MatrixConstraint("pd_P", d.n), MatrixConstraint("pd_Q", d.n)]
    cons += [MatrixConstraint(f"lmi12_{i + 1}", d.n) for i in range(d.r)]
    if d.n_theta > 0:
        cons.append(MatrixConstraint("schur13", 2 * d.n))
    linear = ()
    if spec.objective == "max_gamma" and d.n_theta > 0:
        cons.append(MatrixConstraint("cap_P", d.n))
        cons.append(MatrixConstraint("iso13", 2 * d.n))
        linear = ("gamma_nonneg", "gamma_cap")

    variables = []
    offset = 0
    for name, rows, cols, symmetric in (
        [("P", d.n, d.n, True), ("Q", d.n, d.n, True)]
        + [(f"M_{i + 1}", d.n, d.n_y, False) for i in range(d.r)]
    ):
        size = _sym_size(rows) if symmetric else rows * cols
        variables.append(VariableBlock(name, rows, cols, symmetric, offset, size))
        offset += size
    if spec.objective == "max_gamma" and d.n_theta > 0:
        variables.append(VariableBlock("gamma", 1, 1, False, offset, 1))
        offset += 1
        variables.append(VariableBlock("t", 1, 1, False, offset, 1))
        offset += 1

    return ConstraintSystem(
        model=model, objective=spec.objective, epsilon=spec.pd_margin,
        gamma_fixed=gamma_fixed, a_bar=a_bar, theta_bar=spec.theta_bar,
        C_pinv=C_pinv, H=H, constraints=tuple(cons), variables=tuple(variables),
        linear=linear,
    )


def _beta_terms(cs):
    """Nonzero (i, j, constant transmission matrix) objective terms."""
    m = cs.model
    if not np.any(cs.H):
        return []
    terms = []
    for j in range(m.dims.n_theta):
        for i in range(m.dims.r):
            for stack in (m.Abar, m.Bbar, m.Fbar):
                X = stack[i, j]
                if X.ndim == 1:
                    X = X.reshape(-1, 1)
                if np.any(X):
                    terms.append((i, j, X))
    return terms


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------

class _Program:
    """cvxpy realization of a ConstraintSystem for one solve."""

    def __init__(self, cs, gamma_value=None, with_scale_var=False):
        d = cs.model.dims
        n, ny = d.n, d.n_y
        eps = cs.epsilon
        I = np.eye(n)
        self.P = cp.Variable((n, n), symmetric=True)
        self.Q = cp.Variable((n, n), symmetric=True)
        self.M = [cp.Variable((n, ny)) for _ in range(d.r)]
        self.gamma = None
        self.t = None
        self.s = cp.Variable() if with_scale_var else None

        if cs.gamma_fixed is not None:
            gamma = cs.gamma_fixed
        elif gamma_value is not None:
            gamma = gamma_value
        else:
            self.gamma = cp.Variable()
            gamma = self.gamma

        cons = [self.P >> eps * I, self.Q >> eps * I]
        for i in range(d.r):
            Ai = cs.model.A[i]
            cons.append(self.P @ Ai + Ai.T @ self.P - self.M[i] @ cs.model.C
                        - cs.model.C.T @ self.M[i].T + self.Q << -eps * I)
        if d.n_theta > 0:
            cons.append(cp.bmat([[self.Q - gamma * I, self.P],
                                 [self.P, I]]) >> eps * np.eye(2 * n))
        if cs.objective == "max_gamma" and d.n_theta > 0:
            self.t = cp.Variable()
            cons.append(self.P << self.t * I)
            cons.append(cp.bmat([[self.Q - gamma * I, self.t * I],
                                 [self.t * I, I]]) >> eps * np.eye(2 * n))
            if self.gamma is not None:
                cons += [self.gamma >= 0, self.gamma <= GAMMA_CAP]
        if self.s is not None:
            cons.append(self.P >> self.s * I)
        self.constraints = cons

    def beta_objective(self, cs):
        exprs = []
        for _i, _j, X in _beta_terms(cs):
            exprs.append(cp.norm(X.T @ self.P @ cs.H, "fro"))
        return cp.sum(cp.hstack(exprs)) if exprs else None

    def values(self):
        P = np.asarray(self.P.value, dtype=float)
        Q = np.asarray(self.Q.value, dtype=float)
        M = np.stack([np.asarray(m.value, dtype=float) for m in self.M])
        gamma = float(self.gamma.value) if self.gamma is not None else None
        return 0.5 * (P + P.T), 0.5 * (Q + Q.T), M, gamma


def _solve(problem, solver, opts):
    """Run one cvxpy solve, mapping outcomes onto the module's error model."""
    try:
        # inaccuracy warnings are redundant here: solutions are re-verified
        # by eigenvalue computations before being accepted
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            problem.solve(solver=solver, **opts)
    except cp.error.SolverError as exc:
        raise SolverFailure(f"{solver}: {exc}") from exc
    if problem.status in _INFEASIBLE:
        raise InfeasibleDesign(
            f"solver {solver} reports status {problem.status!r}: no observer of "
            "this structure exists for the requested parameter bound; consider "
            "rerunning with objective='max_gamma' to find the largest "
            "certifiable bound")
    if problem.status not in _OK:
        raise SolverFailure(f"solver {solver} returned status {problem.status!r}")
    return problem.status


def _self_check(cs, P, Q, L, gamma):
    """Eigenvalue re-verification of the solved design, independent of the solver."""
    d = cs.model.dims
    eps = cs.epsilon
    if np.linalg.eigvalsh(P).min() < eps / 2 or np.linalg.eigvalsh(Q).min() < eps / 2:
        return False
    for i in range(d.r):
        Acl = cs.model.A[i] - L[i] @ cs.model.C
        S = P @ Acl + Acl.T @ P + Q
        if np.linalg.eigvalsh(S).max() > SELF_CHECK_TOL:
            return False
    if d.n_theta > 0:
        n = d.n
        blk = np.block([[Q - gamma * np.eye(n), P], [P, np.eye(n)]])
        if np.linalg.eigvalsh(blk).min() < -SELF_CHECK_TOL:
            return False
    return True


def _certified_gamma(P, Q, gamma_solved):
    """Clip gamma to what direct eigenvalue computations certify.

    The Schur block certifies ``gamma <= lmin(Q - P^2)``; the eigenvalue-ratio
    form certifies ``sqrt(gamma) <= lmin(Q)/(2 lmax(P))``.  The reported value
    honours both, so downstream consistency checks hold exactly.
    """
    g13 = float(np.linalg.eigvalsh(Q - P @ P).min())
    g10 = float((np.linalg.eigvalsh(Q).min() / (2.0 * np.linalg.eigvalsh(P).max())) ** 2)
    return max(0.0, min(gamma_solved, g13, g10))


def solve_design(model: TSModel, spec: DesignSpec) -> ObserverDesign:
    """Solve the synthesis program and return a certified observer design.

    Two-phase strategy: the first solve optimizes the requested objective; a
    second solve then maximizes ``lmin(P)`` over the (near-)optimal set, since
    the adaptation speed of the resulting observer scales with P while none of
    the constraints pin its magnitude from below.  The second phase is skipped
    transparently when it fails.

    Raises :class:`InfeasibleDesign` when the solver produces an infeasibility
    certificate and :class:`SolverFailure` when every solver in the fallback
    chain breaks down or returns a solution that fails re-verification.
    """
    cs = build_constraints(model, spec)
    d = model.dims
    failures = []
    for solver, opts in _SOLVER_CHAIN:
        try:
            P, Q, M, gamma_solved = _solve_objective(cs, solver, opts)
        except InfeasibleDesign:
            raise
        except SolverFailure as exc:
            failures.append(str(exc))
            continue

        if cs.gamma_fixed is not None:
            gamma = cs.gamma_fixed
        else:
            gamma = _certified_gamma(P, Q, gamma_solved)

        L = np.stack([np.linalg.solve(P, M[i]) for i in range(d.r)])
        if not _self_check(cs, P, Q, L, gamma):
            failures.append(f"{solver}: solution failed eigenvalue re-verification")
            continue

        n_a = d.n_theta * cs.a_bar
        theta_bar_max = math.sqrt(gamma) / n_a if n_a > 0 else math.inf
        rho = np.asarray(spec.rho if spec.rho is not None else np.ones(d.n_theta), dtype=float)
        if rho.shape != (d.n_theta,):
            raise ValueError(f"rho must have length {d.n_theta}")
        return ObserverDesign(
            P=P, Q=Q, M=M, L=L, gamma=float(gamma), a_bar=cs.a_bar,
            theta_bar_max=float(theta_bar_max),
            beta=beta_residuals(model, P, cs.H), rho=rho,
            C_pinv=cs.C_pinv, H=cs.H,
        )
    raise SolverFailure("all solvers failed: " + "; ".join(failures))


def _solve_objective(cs, solver, opts):
    """Phase-1 objective solve followed by the lmin(P) normalization solve."""
    if cs.objective == "max_gamma" and cs.model.dims.n_theta > 0:
        pb = _Program(cs)
        _solve(cp.Problem(cp.Maximize(pb.gamma), pb.constraints), solver, opts)
        P, Q, M, gamma = pb.values()
        gamma_target = gamma * (1.0 - 1e-6) - 1e-12
        try:
            pb2 = _Program(cs, gamma_value=gamma_target, with_scale_var=True)
            _solve(cp.Problem(cp.Maximize(pb2.s), pb2.constraints), solver, opts)
            P, Q, M, _ = pb2.values()
            gamma = gamma_target
        except (SolverFailure, InfeasibleDesign):
            pass
        return P, Q, M, gamma

    pb = _Program(cs)
    beta = pb.beta_objective(cs) if cs.objective == "min_beta" else None
    if beta is not None:
        _solve(cp.Problem(cp.Minimize(beta), pb.constraints), solver, opts)
        P, Q, M, _ = pb.values()
        beta_cap = max(10.0 * float(beta.value), 1e-9)
        try:
            pb2 = _Program(cs, with_scale_var=True)
            cons = pb2.constraints + [pb2.beta_objective(cs) <= beta_cap]
            _solve(cp.Problem(cp.Maximize(pb2.s), cons), solver, opts)
            P, Q, M, _ = pb2.values()
        except (SolverFailure, InfeasibleDesign):
            pass
        return P, Q, M, None

    # feasibility (and min_beta with a vanishing objective): best-conditioned point
    pb = _Program(cs, with_scale_var=True)
    _solve(cp.Problem(cp.Maximize(pb.s), pb.constraints), solver, opts)
    P, Q, M, _ = pb.values()
    return P, Q, M, None


def theta_bar_admissible(design: ObserverDesign, n_theta: int) -> float:
    """Largest parameter bound certified by the eigenvalue-ratio condition.

    Returns ``lmin(Q) / (2 lmax(P) n_theta a_bar)``, or ``inf`` when no
    parameter acts through an A-transmission.
    """
    denom = n_theta * design.a_bar
    if denom == 0.0:
        return math.inf
    lq = np.linalg.eigvalsh(0.5 * (design.Q + design.Q.T)).min()
    lp = np.linalg.eigvalsh(0.5 * (design.P + design.P.T)).max()
    return float(lq / (2.0 * lp * denom))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def design_to_dict(design: ObserverDesign):
    return {
        "P": design.P.tolist(),
        "Q": design.Q.tolist(),
        "M": [m.tolist() for m in design.M],
        "L": [l.tolist() for l in design.L],
        "gamma": float(design.gamma),
        "a_bar": float(design.a_bar),
        "theta_bar_max": float(design.theta_bar_max),
        "beta": design.beta.tolist(),
        "rho": design.rho.tolist(),
        "C_pinv": design.C_pinv.tolist(),
        "H": design.H.tolist(),
    }


def design_from_dict(doc) -> ObserverDesign:
    return ObserverDesign(
        P=np.asarray(doc["P"], dtype=float),
        Q=np.asarray(doc["Q"], dtype=float),
        M=np.asarray(doc["M"], dtype=float),
        L=np.asarray(doc["L"], dtype=float),
        gamma=float(doc["gamma"]),
        a_bar=float(doc["a_bar"]),
        theta_bar_max=float(doc["theta_bar_max"]),
        beta=np.asarray(doc["beta"], dtype=float),
        rho=np.asarray(doc["rho"], dtype=float),
        C_pinv=np.asarray(doc["C_pinv"], dtype=float),
        H=np.asarray(doc["H"], dtype=float),
    )


# ---------------------------------------------------------------------------
# debug export of the assembled conic program
# ---------------------------------------------------------------------------

def _unpack(cs, x):
    """Flat scalar vector -> (P, Q, M list, gamma, t)."""
    d = cs.model.dims
    out = {}
    for vb in cs.variables:
        chunk = x[vb.offset:vb.offset + vb.size]
        if vb.symmetric:
            Mstored = np.zeros((vb.rows, vb.cols))
            idx = 0
            for i in range(vb.rows):
                for j in range(i + 1):
                    Mstored[i, j] = Mstored[j, i] = chunk[idx]
                    idx += 1
            out[vb.name] = Mstored
        elif vb.size == 1:
            out[vb.name] = float(chunk[0])
        else:
            out[vb.name] = chunk.reshape(vb.rows, vb.cols)
    Ms = [out[f"M_{i + 1}"] for i in range(d.r)]
    return out["P"], out["Q"], Ms, out.get("gamma", cs.gamma_fixed), out.get("t", 0.0)


def _constraint_matrix(cs, name, P, Q, Ms, gamma, t):
    """Numeric value of the block that the named constraint requires PSD."""
    d = cs.model.dims
    n = d.n
    eps = cs.epsilon
    I = np.eye(n)
    if name == "pd_P":
        return P - eps * I
    if name == "pd_Q":
        return Q - eps * I
    if name.startswith("lmi12_"):
        i = int(name.split("_")[1]) - 1
        Ai = cs.model.A[i]
        lhs = P @ Ai + Ai.T @ P - Ms[i] @ cs.model.C - cs.model.C.T @ Ms[i].T + Q
        return -lhs - eps * I
    if name == "schur13":
        blk = np.block([[Q - gamma * I, P], [P, I]])
        return blk - eps * np.eye(2 * n)
    if name == "cap_P":
        return t * I - P
    if name == "iso13":
        blk = np.block([[Q - gamma * I, t * I], [t * I, I]])
        return blk - eps * np.eye(2 * n)
    raise KeyError(name)


def _linear_row(cs, name, gamma):
    if name == "gamma_nonneg":
        return gamma
    if name == "gamma_cap":
        return GAMMA_CAP - gamma
    raise KeyError(name)


def conic_debug_dict(cs: ConstraintSystem):
    """Export the assembled program in a documented JSON debug form.

    Every PSD block and linear row is given as an affine map of the packed
    scalar vector: a constant part plus per-variable coefficient triplets
    ``[row, col, value]``.  Symmetric blocks are packed as their row-major
    lower triangles.  The objective section lists either the linear objective
    or the second-order-cone terms whose norms are summed (one implied
    epigraph scalar per term).
    """
    d = cs.model.dims
    nx = cs.n_scalars
    zero = np.zeros(nx)

    def probe(fn):
        base = fn(zero)
        coeffs = []
        for k in range(nx):
            e = np.zeros(nx)
            e[k] = 1.0
            delta = fn(e) - base
            triplets = [[int(i), int(j), float(v)]
                        for (i, j), v in np.ndenumerate(np.atleast_2d(delta)) if v != 0.0]
            if triplets:
                coeffs.append({"var": k, "triplets": triplets})
        return base, coeffs

    cones = []
    for mc in cs.constraints:
        def block_fn(x, name=mc.name):
            P, Q, Ms, gamma, t = _unpack(cs, x)
            return _constraint_matrix(cs, name, P, Q, Ms, gamma, t)
        base, coeffs = probe(block_fn)
        cones.append({
            "name": mc.name, "kind": "psd", "dim": mc.dim,
            "constant": np.atleast_2d(base).tolist(), "coefficients": coeffs,
        })

    linear_rows = []
    for name in cs.linear:
        def row_fn(x, name=name):
            _P, _Q, _Ms, gamma, _t = _unpack(cs, x)
            return np.array([[_linear_row(cs, name, gamma)]])
        base, coeffs = probe(row_fn)
        linear_rows.append({"name": name, "constant": float(base[0, 0]),
                            "coefficients": coeffs})

    objective = {"kind": cs.objective}
    if cs.objective == "max_gamma" and d.n_theta > 0:
        gi = next(v for v in cs.variables if v.name == "gamma")
        objective["sense"] = "maximize"
        objective["linear"] = [[gi.offset, 1.0]]
    elif cs.objective == "min_beta":
        objective["sense"] = "minimize"
        soc_terms = []
        for i, j, X in _beta_terms(cs):
            def vec_fn(x, X=X):
                P, _Q, _Ms, _g, _t = _unpack(cs, x)
                return np.atleast_2d((X.T @ P @ cs.H).ravel())
            base, coeffs = probe(vec_fn)
            soc_terms.append({
                "name": f"beta_{j + 1}_term_{i + 1}_{X.shape[1]}x{X.shape[0]}",
                "output_dim": int(base.shape[1]),
                "constant": base.ravel().tolist(),
                "coefficients": coeffs,
            })
        objective["soc_terms"] = soc_terms
    else:
        objective["sense"] = "feasibility"

    return {
        "format": "tsobs-conic-debug-v1",
        "variables": [vars(v) for v in cs.variables],
        "num_scalars": nx,
        "epsilon": cs.epsilon,
        "gamma_fixed": cs.gamma_fixed,
        "objective": objective,
        "psd_cones": cones,
        "linear_constraints": linear_rows,
    }
