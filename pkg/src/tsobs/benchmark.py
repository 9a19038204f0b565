"""Built-in three-state benchmark system with one unknown parameter.

The underlying nonlinear dynamics are::

    dx1/dt = -0.7 x1^2 - x2 + x3 + (1 - 0.8 x1) theta
    dx2/dt = -x1 x3 - 2 x2 + (x2 + u) theta
    dx3/dt = 0.5 x1 - 2 x3 + u
    y1 = x1 + x2,  y2 = x2

With the premise variable ``z = x1`` (recovered from the outputs as
``y1 - y2``) confined to the sector (0, 2), the right-hand side is affine in
``z`` and in ``theta``, so the sector decomposition with two vertices
reproduces it exactly inside the sector.  This model doubles as the
acceptance benchmark: its decomposed matrices, the reachable annihilation
residual and the structure of the solved Lyapunov matrix are all known.
"""

from __future__ import annotations

import numpy as np

from .lmi import DesignSpec
from .model import (Dimensions, MatrixFamily, ParamAffineModel, PremiseSpec,
                    TransmissionFamily, snl_decompose)
from .simulate import InputSignal, SimScenario

__all__ = [
    "benchmark_param_affine",
    "benchmark_ts_model",
    "expected_vertex_matrices",
    "benchmark_design_spec",
    "benchmark_scenario",
    "REFERENCE_BETA1",
    "REFERENCE_P",
    "REFERENCE_P_OFFBLOCK",
]

# Reference solution values for this benchmark (for comparison in summaries):
# the residual and the off-block magnitudes of the Lyapunov matrix that the
# residual-minimizing design is known to reach on this system.
REFERENCE_BETA1 = 1.31e-13
REFERENCE_P = np.array([
    [1.169, 0.657, -4.7e-14],
    [0.657, 1.153, -3.3e-14],
    [-4.7e-14, -3.3e-14, 1.365],
])
REFERENCE_P_OFFBLOCK = 4.7e-14


def benchmark_param_affine() -> ParamAffineModel:
    """The benchmark system in parameter-affine form."""
    dims = Dimensions(n=3, n_u=1, n_y=2, n_p=1, n_theta=1)
    zeros_col = np.zeros((3, 1))
    A = MatrixFamily(
        base=np.array([[0.0, -1.0, 1.0], [0.0, -2.0, 0.0], [0.5, 0.0, -2.0]]),
        slopes=np.array([[[-0.7, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 0.0, 0.0]]]),
    )
    B = MatrixFamily(base=np.array([[0.0], [0.0], [1.0]]), slopes=np.zeros((1, 3, 1)))
    F = MatrixFamily(base=zeros_col, slopes=np.zeros((1, 3, 1)))
    transmission = TransmissionFamily(
        A=MatrixFamily(base=np.diag([-0.8, 1.0, 0.0]), slopes=np.zeros((1, 3, 3))),
        B=MatrixFamily(base=np.array([[0.0], [1.0], [0.0]]), slopes=np.zeros((1, 3, 1))),
        F=MatrixFamily(base=np.array([[1.0], [0.0], [0.0]]), slopes=np.zeros((1, 3, 1))),
    )
    C = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0]])
    premises = PremiseSpec(z_min=np.array([0.0]), z_max=np.array([2.0]),
                           selectors=np.array([[1.0, -1.0, 0.0]]))
    return ParamAffineModel(dims=dims, A=A, B=B, F=F,
                            transmissions=(transmission,), C=C, premises=premises)


def benchmark_ts_model():
    return snl_decompose(benchmark_param_affine())


def expected_vertex_matrices():
    """The vertex matrices the sector decomposition must reproduce exactly."""
    return {
        "A_1": np.array([[-1.4, -1.0, 1.0], [0.0, -2.0, -2.0], [0.5, 0.0, -2.0]]),
        "A_2": np.array([[0.0, -1.0, 1.0], [0.0, -2.0, 0.0], [0.5, 0.0, -2.0]]),
        "Abar": np.diag([-0.8, 1.0, 0.0]),        # identical at both vertices
        "B": np.array([[0.0], [0.0], [1.0]]),     # identical at both vertices
        "Bbar": np.array([[0.0], [1.0], [0.0]]),  # identical at both vertices
        "Fbar": np.array([[1.0], [0.0], [0.0]]),  # identical at both vertices
        "C": np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0]]),
    }


def benchmark_design_spec(objective="min_beta") -> DesignSpec:
    """Default synthesis inputs: parameter bound 0.5, unit adaptation gain."""
    return DesignSpec(objective=objective, theta_bar=0.5, pd_margin=1e-6, rho=(1.0,))


def benchmark_scenario(t_end=100.0, dt=1e-3, record_stride=100) -> SimScenario:
    """Default excitation scenario: two-tone input, parameter step at mid-run.

    The tones and the initial state keep the premise variable inside its
    sector for the whole run while exercising both submodels.
    """
    return SimScenario(
        t_end=t_end,
        dt=dt,
        x0=np.array([1.0, 0.4, 0.3]),
        xhat0=np.zeros(3),
        thetahat0=np.zeros(1),
        theta_profile=((0.0, np.array([0.5])), (t_end / 2.0, np.array([0.3]))),
        input_signal=InputSignal("multisine",
                                 amplitudes=(0.5, 0.35),
                                 frequencies=(0.1, 0.031),
                                 phases=(0.0, 1.0)),
        rho=np.array([1.0]),
        record_stride=record_stride,
    )
