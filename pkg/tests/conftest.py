import numpy as np
import pytest

from tsobs.benchmark import (benchmark_design_spec, benchmark_param_affine,
                             benchmark_scenario, benchmark_ts_model)
from tsobs.lmi import DesignSpec, InfeasibleDesign, SolverFailure, solve_design
from tsobs.model import (Dimensions, MatrixFamily, ParamAffineModel, PremiseSpec,
                         TSModel, TransmissionFamily, corner_bits)


@pytest.fixture(scope="session")
def bench_pam():
    return benchmark_param_affine()


@pytest.fixture(scope="session")
def bench_ts():
    return benchmark_ts_model()


@pytest.fixture(scope="session")
def bench_design(bench_ts):
    return solve_design(bench_ts, benchmark_design_spec())


@pytest.fixture(scope="session")
def bench_scenario_short():
    return benchmark_scenario(t_end=3.0, dt=1e-3, record_stride=10)


def random_param_affine(rng, n=3, n_u=1, n_y=2, n_p=1, n_theta=1):
    """Random well-posed parameter-affine model (not necessarily stabilizable)."""
    dims = Dimensions(n=n, n_u=n_u, n_y=n_y, n_p=n_p, n_theta=n_theta)

    def family(cols, scale=1.0):
        return MatrixFamily(base=scale * rng.normal(size=(n, cols)),
                            slopes=scale * rng.normal(size=(n_p, n, cols)))

    transmissions = tuple(
        TransmissionFamily(A=family(n, 0.5), B=family(n_u, 0.5), F=family(1, 0.5))
        for _ in range(n_theta)
    )
    # orthonormal rows guarantee full row rank
    q, _ = np.linalg.qr(rng.normal(size=(n, n_y)))
    C = q.T[:n_y]
    lo = rng.uniform(-2.0, -0.1, size=n_p)
    hi = rng.uniform(0.1, 2.0, size=n_p)
    premises = PremiseSpec(z_min=lo, z_max=hi,
                           selectors=rng.normal(size=(n_p, n_y + n_u)))
    return ParamAffineModel(dims=dims, A=family(n), B=family(n_u), F=family(1),
                            transmissions=transmissions, C=C, premises=premises)


def random_stable_ts(rng, n=3, n_u=1, n_y=2, n_theta=1):
    """Random vertex model with a stability margin, feasible with high probability."""
    dims = Dimensions(n=n, n_u=n_u, n_y=n_y, n_p=1, n_theta=n_theta)
    A0 = rng.normal(size=(n, n))
    A0 = A0 - (np.linalg.eigvals(A0).real.max() + 1.0) * np.eye(n)
    A = np.stack([A0 + 0.3 * rng.normal(size=(n, n)) for _ in range(2)])
    B = rng.normal(size=(2, n, n_u))
    F = rng.normal(size=(2, n))
    Abar = 0.5 * rng.normal(size=(2, n_theta, n, n))
    Bbar = 0.5 * rng.normal(size=(2, n_theta, n, n_u))
    Fbar = 0.5 * rng.normal(size=(2, n_theta, n))
    q, _ = np.linalg.qr(rng.normal(size=(n, n_y)))
    C = q.T[:n_y]
    premises = PremiseSpec(z_min=np.array([-1.0]), z_max=np.array([1.0]),
                           selectors=rng.normal(size=(1, n_y + n_u)))
    return TSModel(dims=dims, A=A, B=B, F=F, Abar=Abar, Bbar=Bbar, Fbar=Fbar,
                   C=C, premises=premises, bits=corner_bits(1))


def sample_feasible_designs(seed, count, objective="max_gamma", max_tries=200):
    """Deterministically draw `count` random models whose synthesis succeeds."""
    rng = np.random.default_rng(seed)
    spec = DesignSpec(objective=objective,
                      theta_bar=None if objective == "max_gamma" else 0.5)
    out = []
    tries = 0
    while len(out) < count and tries < max_tries:
        tries += 1
        model = random_stable_ts(rng)
        try:
            design = solve_design(model, spec)
        except (InfeasibleDesign, SolverFailure):
            continue
        out.append((model, design))
    if len(out) < count:
        raise RuntimeError(f"only {len(out)} feasible models after {tries} draws")
    return out
