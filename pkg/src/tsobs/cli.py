"""Command-line front end: design, certify and simulate pipelines.

Exit codes: 0 success (design/certify additionally require the certification
to pass), 1 certification or consistency check failed, 2 synthesis infeasible,
3 solver failure, 4 invalid config or model, 5 simulation divergence.
The ``TSOBS_LOG`` environment variable sets the log level.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import benchmark
from .certify import certify, report_to_dict
from .lmi import (DesignSpec, InfeasibleDesign, SolverFailure, build_constraints,
                  conic_debug_dict, design_from_dict, design_to_dict, solve_design)
from .model import ModelFormatError, ParamAffineModel, load_model, model_from_dict, snl_decompose
from .plots import save_trajectory_plots
from .simulate import SimScenario, diagnostics_to_dict, run, write_trajectory_csv

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INFEASIBLE = 2
EXIT_SOLVER_FAILURE = 3
EXIT_BAD_CONFIG = 4
EXIT_DIVERGED = 5

log = logging.getLogger("tsobs")


class ConfigError(ValueError):
    pass


@dataclass
class OutputOptions:
    directory: Path
    emit_csv: bool = True
    emit_plots: bool = True
    emit_report: bool = True
    emit_program: bool = False


@dataclass
class RunConfig:
    model: object            # TSModel after normalization
    design: DesignSpec | None
    design_file: Path | None
    scenario: SimScenario | None
    outputs: OutputOptions


def _design_spec_from_dict(doc) -> DesignSpec:
    objective = doc.get("objective", "min_beta")
    if objective == "feasibility":
        objective = "feasibility_only"
    return DesignSpec(
        objective=objective,
        theta_bar=float(doc["theta_bar"]) if doc.get("theta_bar") is not None else None,
        pd_margin=float(doc.get("pd_margin", 1e-6)),
        rho=tuple(float(v) for v in doc["rho"]) if doc.get("rho") is not None else None,
    )


def load_config(path, out_override=None) -> RunConfig:
    """Parse a run configuration document and normalize the model to vertex form."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc

    has_inline = "model" in doc
    has_file = "model_file" in doc
    if has_inline == has_file:
        raise ConfigError("config must provide exactly one of 'model' or 'model_file'")
    model = (model_from_dict(doc["model"]) if has_inline
             else load_model(Path(path).parent / doc["model_file"]))
    if isinstance(model, ParamAffineModel):
        model = snl_decompose(model)

    design = _design_spec_from_dict(doc["design"]) if "design" in doc else None
    design_file = doc.get("design_file")
    if design_file is not None:
        design_file = Path(path).parent / design_file
    scenario = SimScenario.from_dict(doc["scenario"]) if "scenario" in doc else None

    out_doc = doc.get("outputs", {})
    directory = Path(out_override or out_doc.get("directory", "tsobs-out"))
    outputs = OutputOptions(
        directory=directory,
        emit_csv=bool(out_doc.get("emit_csv", True)),
        emit_plots=bool(out_doc.get("emit_plots", True)),
        emit_report=bool(out_doc.get("emit_report", True)),
        emit_program=bool(out_doc.get("emit_program", False)),
    )
    return RunConfig(model=model, design=design, design_file=design_file,
                     scenario=scenario, outputs=outputs)


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _ensure_dir(directory: Path) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _load_design(cfg) -> "tuple":
    """Design from file when given, otherwise a fresh solve."""
    if cfg.design_file is not None:
        with open(cfg.design_file, "r", encoding="utf-8") as fh:
            return design_from_dict(json.load(fh)), False
    if cfg.design is None:
        raise ConfigError("config provides neither 'design' nor 'design_file'")
    return solve_design(cfg.model, cfg.design), True


def cmd_design(cfg: RunConfig) -> int:
    out = _ensure_dir(cfg.outputs.directory)
    if cfg.design is None:
        raise ConfigError("design section missing from config")
    design = solve_design(cfg.model, cfg.design)
    report = certify(cfg.model, design)
    _write_json(out / "design.json", design_to_dict(design))
    if cfg.outputs.emit_report:
        _write_json(out / "certification.json", report_to_dict(report))
    if cfg.outputs.emit_program:
        _write_json(out / "program.json", conic_debug_dict(build_constraints(cfg.model, cfg.design)))
    log.info("design: beta=%s gamma=%.6g theta_bar_max=%.6g overall_pass=%s",
             design.beta.tolist(), design.gamma, design.theta_bar_max, report.overall_pass)
    return EXIT_OK if report.overall_pass else EXIT_CHECK_FAILED


def cmd_simulate(cfg: RunConfig) -> int:
    out = _ensure_dir(cfg.outputs.directory)
    if cfg.scenario is None:
        raise ConfigError("scenario section missing from config")
    design, _solved = _load_design(cfg)
    traj, diag = run(cfg.model, design, cfg.scenario)
    if cfg.outputs.emit_csv:
        write_trajectory_csv(traj, out / "trajectory.csv")
    _write_json(out / "diagnostics.json", diagnostics_to_dict(diag))
    if cfg.outputs.emit_plots:
        save_trajectory_plots(traj, out)
    if traj.diverged:
        log.error("simulation diverged; trajectory truncated at t=%.6g",
                  traj.t[-1] if len(traj.t) else 0.0)
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_certify(cfg: RunConfig) -> int:
    out = _ensure_dir(cfg.outputs.directory)
    if cfg.design_file is None:
        raise ConfigError("certify needs a 'design_file' entry in the config")
    design, _ = _load_design(cfg)
    report = certify(cfg.model, design)
    _write_json(out / "certification.json", report_to_dict(report))
    for rec in report.records:
        log.info("%-18s margin=% .3e pass=%s", rec.condition, rec.margin, rec.passed)
    return EXIT_OK if report.overall_pass else EXIT_CHECK_FAILED


def cmd_reproduce_example(out_dir, t_end=None, dt=None) -> int:
    """Run the bundled benchmark end to end and compare against its references."""
    out = _ensure_dir(Path(out_dir))
    pam = benchmark.benchmark_param_affine()
    ts = snl_decompose(pam)
    expected = benchmark.expected_vertex_matrices()
    exact = (
        np.array_equal(ts.A[0], expected["A_1"])
        and np.array_equal(ts.A[1], expected["A_2"])
        and np.array_equal(ts.Abar[0, 0], expected["Abar"])
        and np.array_equal(ts.Abar[1, 0], expected["Abar"])
        and np.array_equal(ts.B[0], expected["B"])
        and np.array_equal(ts.B[1], expected["B"])
        and np.array_equal(ts.Bbar[0, 0], expected["Bbar"])
        and np.array_equal(ts.Bbar[1, 0], expected["Bbar"])
        and np.array_equal(ts.C, expected["C"])
    )
    if not exact:
        log.error("sector decomposition does not reproduce the benchmark matrices")
        return EXIT_CHECK_FAILED

    spec = benchmark.benchmark_design_spec()
    design = solve_design(ts, spec)
    report = certify(ts, design)
    _write_json(out / "design.json", design_to_dict(design))
    _write_json(out / "certification.json", report_to_dict(report))

    scenario = benchmark.benchmark_scenario(t_end=t_end or 100.0, dt=dt or 1e-3)
    traj, diag = run(ts, design, scenario)
    write_trajectory_csv(traj, out / "trajectory.csv")
    _write_json(out / "diagnostics.json", diagnostics_to_dict(diag))
    save_trajectory_plots(traj, out)

    p_fro = float(np.linalg.norm(design.P, "fro"))
    p_offblock = float(max(abs(design.P[0, 2]), abs(design.P[1, 2])))
    e_x_final = float(np.linalg.norm(traj.x[-1] - traj.x_hat[-1]))
    e_th_final = float(np.max(np.abs(traj.theta[-1] - traj.theta_hat[-1]))) \
        if traj.theta.shape[1] else 0.0
    summary = {
        "matrices_exact": exact,
        "H": design.H.tolist(),
        "theorem1_applicable": report.record("thm1_rank").passed,
        "beta": design.beta.tolist(),
        "beta1_reference": benchmark.REFERENCE_BETA1,
        "p_offblock_max": p_offblock,
        "p_offblock_reference": benchmark.REFERENCE_P_OFFBLOCK,
        "p_offblock_relative": p_offblock / p_fro if p_fro else 0.0,
        "theta_bar_certified": report.theta_bar_certified,
        "certification_pass": report.overall_pass,
        "final_state_error": e_x_final,
        "final_parameter_error": e_th_final,
        "diverged": traj.diverged,
    }
    _write_json(out / "summary.json", summary)
    log.info("summary: %s", json.dumps(summary))
    if traj.diverged:
        return EXIT_DIVERGED
    return EXIT_OK if report.overall_pass else EXIT_CHECK_FAILED


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if cfg.design is not None and args.objective:
        objective = "feasibility_only" if args.objective == "feasibility" else args.objective
        cfg.design = dataclasses.replace(cfg.design, objective=objective)
    if cfg.scenario is not None:
        sc = cfg.scenario
        if args.dt is not None:
            sc = dataclasses.replace(sc, dt=args.dt)
        if args.t_end is not None:
            sc = dataclasses.replace(sc, t_end=args.t_end)
        if args.seed is not None and sc.input_signal.kind == "prbs":
            sig = dataclasses.replace(sc.input_signal, seed=args.seed)
            sc = dataclasses.replace(sc, input_signal=sig)
        cfg.scenario = sc
    return cfg


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tsobs",
        description="Design, certify and simulate adaptive observers for "
                    "polytopic models with unknown multiplicative parameters.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        if config_required:
            p.add_argument("--config", required=True, help="run configuration JSON")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--objective", choices=("min_beta", "max_gamma", "feasibility"),
                       default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--dt", type=float, default=None)
        p.add_argument("--t-end", dest="t_end", type=float, default=None)

    add_common(sub.add_parser("design", help="solve the gain synthesis and certify it"))
    add_common(sub.add_parser("simulate", help="run a joint estimation scenario"))
    add_common(sub.add_parser("certify", help="re-verify a stored design"))
    add_common(sub.add_parser("reproduce-example",
                              help="run the bundled benchmark end to end"),
               config_required=False)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("TSOBS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reproduce-example":
            return cmd_reproduce_example(args.out or "tsobs-out",
                                         t_end=args.t_end, dt=args.dt)
        cfg = load_config(args.config, out_override=args.out)
        cfg = _apply_overrides(cfg, args)
        if args.command == "design":
            return cmd_design(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        return cmd_certify(cfg)
    except (ConfigError, ModelFormatError) as exc:
        log.error("invalid config/model: %s", exc)
        return EXIT_BAD_CONFIG
    except InfeasibleDesign as exc:
        log.error("infeasible: %s", exc)
        return EXIT_INFEASIBLE
    except SolverFailure as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER_FAILURE
    except ValueError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
