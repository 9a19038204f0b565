"""Adaptive observer design, certification and simulation for T-S polytopic systems."""

from .model import (
    Dimensions,
    MatrixFamily,
    ModelFormatError,
    ParamAffineModel,
    PremiseSpec,
    TSModel,
    TransmissionFamily,
    assemble_matrices,
    eval_weights,
    load_model,
    model_from_dict,
    model_to_dict,
    premise_from_io,
    save_model,
    snl_decompose,
)
from .lmi import (
    ConstraintSystem,
    DesignSpec,
    InfeasibleDesign,
    ObserverDesign,
    RankReport,
    SolverFailure,
    beta_residuals,
    build_constraints,
    check_theorem1,
    conic_debug_dict,
    design_from_dict,
    design_to_dict,
    pseudo_inverse,
    solve_design,
    theta_bar_admissible,
)
from .certify import (
    CertificationReport,
    LyapunovAudit,
    certify,
    constant_theta_windows,
    lyapunov_decrease_audit,
    report_from_dict,
    report_to_dict,
)
from .simulate import (
    ExcitationDiagnostics,
    InputSignal,
    SimScenario,
    Trajectory,
    diagnostics_to_dict,
    make_input,
    read_trajectory_csv,
    run,
    step,
    write_trajectory_csv,
)

__version__ = "0.1.0"
