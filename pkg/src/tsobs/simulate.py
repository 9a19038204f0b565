"""Coupled plant/observer simulation with fixed-step 4th-order Runge-Kutta.

The plant is integrated in its exact vertex-blend form (identical to the
original nonlinear system while the premise stays inside its box) together
with the adaptive observer

    d(x_hat)/dt   = sum_i mu_i { (A_i + sum_j th_hat_j Abar_ij) x_hat
                                 + (B_i + sum_j th_hat_j Bbar_ij) u
                                 + (F_i + sum_j th_hat_j Fbar_ij)
                                 + L_i (y - y_hat) }
    d(th_hat_j)/dt = (1/rho_j) sum_i mu_i (Abar_ij x_hat + Bbar_ij u
                                           + Fbar_ij)' P pinv(C) (y - y_hat)

The premise vector is recomputed from the measured (y, u) at every stage
evaluation; the true parameter is held piecewise constant per the scenario
schedule.  Runs are deterministic: identical inputs give bitwise-identical
trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import TSModel, eval_weights, premise_from_io

__all__ = [
    "InputSignal",
    "SimScenario",
    "Trajectory",
    "ExcitationDiagnostics",
    "make_input",
    "step",
    "run",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "diagnostics_to_dict",
]

PRBS_PERIOD = 4096  # dwell intervals; the seeded sign sequence repeats after this


@dataclass(frozen=True)
class InputSignal:
    """Deterministic excitation signal, broadcast over all input channels.

    kinds: ``zero``; ``constant`` (value);
    ``multisine`` (amplitudes, frequencies [Hz], phases [rad]):
    ``u(t) = sum_k a_k sin(2 pi f_k t + p_k)``;
    ``prbs`` (amplitude, dwell, seed): sign flips every ``dwell`` seconds
    following a fixed-seed pseudo-random sequence of period ``PRBS_PERIOD``.
    """

    kind: str = "zero"
    value: float = 0.0
    amplitudes: tuple = ()
    frequencies: tuple = ()
    phases: tuple = ()
    amplitude: float = 1.0
    dwell: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "multisine", "prbs"):
            raise ValueError(f"unknown input kind {self.kind!r}")
        if self.kind == "multisine":
            a, f, p = map(tuple, (self.amplitudes, self.frequencies, self.phases))
            if not (len(a) == len(f) == len(p)):
                raise ValueError("multisine amplitudes/frequencies/phases must have equal length")
            object.__setattr__(self, "amplitudes", a)
            object.__setattr__(self, "frequencies", f)
            object.__setattr__(self, "phases", p)
        if self.kind == "prbs" and self.dwell <= 0:
            raise ValueError("prbs dwell must be positive")

    @staticmethod
    def from_dict(doc):
        kind = doc.get("type", "zero")
        if kind == "zero":
            return InputSignal("zero")
        if kind == "constant":
            return InputSignal("constant", value=float(doc["value"]))
        if kind == "multisine":
            return InputSignal("multisine",
                               amplitudes=tuple(float(v) for v in doc["amplitudes"]),
                               frequencies=tuple(float(v) for v in doc["frequencies"]),
                               phases=tuple(float(v) for v in doc["phases"]))
        if kind == "prbs":
            return InputSignal("prbs", amplitude=float(doc["amplitude"]),
                               dwell=float(doc["dwell"]), seed=int(doc.get("seed", 0)))
        raise ValueError(f"unknown input kind {kind!r}")

    def to_dict(self):
        if self.kind == "zero":
            return {"type": "zero"}
        if self.kind == "constant":
            return {"type": "constant", "value": self.value}
        if self.kind == "multisine":
            return {"type": "multisine", "amplitudes": list(self.amplitudes),
                    "frequencies": list(self.frequencies), "phases": list(self.phases)}
        return {"type": "prbs", "amplitude": self.amplitude,
                "dwell": self.dwell, "seed": self.seed}


_PRBS_CACHE = {}


def _prbs_signs(seed):
    signs = _PRBS_CACHE.get(seed)
    if signs is None:
        rng = np.random.default_rng(seed)
        signs = rng.integers(0, 2, size=PRBS_PERIOD).astype(float) * 2.0 - 1.0
        signs.flags.writeable = False
        _PRBS_CACHE[seed] = signs
    return signs


def make_input(signal: InputSignal, t: float) -> float:
    """Scalar signal value at time t (broadcast to all channels by the runner)."""
    if signal.kind == "zero":
        return 0.0
    if signal.kind == "constant":
        return signal.value
    if signal.kind == "multisine":
        return float(sum(a * math.sin(2.0 * math.pi * f * t + p)
                         for a, f, p in zip(signal.amplitudes, signal.frequencies, signal.phases)))
    k = int(math.floor(t / signal.dwell)) % PRBS_PERIOD
    return signal.amplitude * float(_prbs_signs(signal.seed)[k])


@dataclass(frozen=True)
class SimScenario:
    """Simulation setup: horizon, initial conditions, schedule, excitation."""

    t_end: float
    dt: float
    x0: np.ndarray
    xhat0: np.ndarray
    thetahat0: np.ndarray
    theta_profile: tuple       # ((t_k, theta-vector), ...), t_0 = 0, increasing
    input_signal: InputSignal = InputSignal("zero")
    rho: np.ndarray = None
    record_stride: int = 1

    def __post_init__(self):
        if self.dt <= 0 or self.t_end < self.dt:
            raise ValueError("need dt > 0 and t_end >= dt")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        for name in ("x0", "xhat0", "thetahat0"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        prof = tuple((float(t), np.atleast_1d(np.asarray(v, dtype=float)))
                     for t, v in self.theta_profile)
        if not prof or prof[0][0] != 0.0:
            raise ValueError("theta_profile must start at t = 0")
        times = [t for t, _ in prof]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("theta_profile times must be strictly increasing")
        object.__setattr__(self, "theta_profile", prof)
        rho = np.ones(len(prof[0][1])) if self.rho is None else \
            np.atleast_1d(np.asarray(self.rho, dtype=float))
        if np.any(rho <= 0):
            raise ValueError("adaptation gains rho must be positive")
        object.__setattr__(self, "rho", rho)

    @staticmethod
    def from_dict(doc):
        return SimScenario(
            t_end=float(doc["t_end"]),
            dt=float(doc["dt"]),
            x0=np.asarray(doc["x0"], dtype=float),
            xhat0=np.asarray(doc["xhat0"], dtype=float),
            thetahat0=np.asarray(doc.get("thetahat0", []), dtype=float),
            theta_profile=tuple((float(t), np.asarray(v, dtype=float))
                                for t, v in doc.get("theta_profile", [[0.0, []]])),
            input_signal=InputSignal.from_dict(doc.get("input", {"type": "zero"})),
            rho=np.asarray(doc["rho"], dtype=float) if "rho" in doc else None,
            record_stride=int(doc.get("record_stride", 1)),
        )

    def to_dict(self):
        return {
            "t_end": self.t_end, "dt": self.dt,
            "x0": self.x0.tolist(), "xhat0": self.xhat0.tolist(),
            "thetahat0": self.thetahat0.tolist(),
            "theta_profile": [[t, v.tolist()] for t, v in self.theta_profile],
            "input": self.input_signal.to_dict(),
            "rho": self.rho.tolist(),
            "record_stride": self.record_stride,
        }


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled simulation record."""

    t: np.ndarray
    x: np.ndarray
    x_hat: np.ndarray
    theta: np.ndarray
    theta_hat: np.ndarray
    mu: np.ndarray
    u: np.ndarray
    y: np.ndarray
    y_hat: np.ndarray
    e_y: np.ndarray
    V: np.ndarray
    sat: np.ndarray            # uint8 premise-clamp flags
    diverged: bool = False
    schedule_truncated: bool = False


@dataclass(frozen=True)
class ExcitationDiagnostics:
    """Per-submodel weight statistics and per-parameter regressor energy."""

    mu_min: np.ndarray         # (r,)
    mu_max: np.ndarray         # (r,)
    mu_var: np.ndarray         # (r,)
    regressor_mean_sq: np.ndarray     # (n_theta,) time-average of ||phi_j||^2
    regressor_min_window: np.ndarray  # (n_theta,) min energy over sliding windows
    window_seconds: float


class _Dynamics:
    """Stacked-array right-hand side of the coupled plant/observer system."""

    def __init__(self, model, design, rho):
        d = model.dims
        self.model = model
        self.C = model.C
        self.sel = model.premises.selectors
        self.A, self.B, self.F = model.A, model.B, model.F
        self.Abar, self.Bbar, self.Fbar = model.Abar, model.Bbar, model.Fbar
        self.L = design.L
        self.W = design.P @ design.C_pinv
        self.rho = np.asarray(rho, dtype=float)
        self.n_theta = d.n_theta
        self.n_u = d.n_u
        # plant matrices for the current (piecewise-constant) true parameter
        self._theta = None
        self.Ap = self.A
        self.Bp = self.B
        self.Fp = self.F

    def set_theta(self, theta):
        if self._theta is not None and np.array_equal(theta, self._theta):
            return
        self._theta = np.asarray(theta, dtype=float).copy()
        if self.n_theta:
            self.Ap = self.A + np.tensordot(self._theta, self.Abar.swapaxes(0, 1), axes=1)
            self.Bp = self.B + np.tensordot(self._theta, self.Bbar.swapaxes(0, 1), axes=1)
            self.Fp = self.F + np.tensordot(self._theta, self.Fbar.swapaxes(0, 1), axes=1)

    def weights(self, y, u):
        z_raw = self.sel @ np.concatenate((y, u)) if self.sel.shape[0] else np.zeros(0)
        return eval_weights(self.model, z_raw)

    def __call__(self, x, xh, th_hat, u):
        y = self.C @ x
        ey = y - self.C @ xh
        mu = self.weights(y, u)
        dx = mu @ (self.Ap @ x + self.Bp @ u + self.Fp)
        dxh = mu @ (self.A @ xh + self.B @ u + self.F + self.L @ ey)
        if self.n_theta:
            phi = self.Abar @ xh + self.Bbar @ u + self.Fbar       # (r, n_theta, n)
            phimu = np.tensordot(mu, phi, axes=1)                  # (n_theta, n)
            dxh = dxh + th_hat @ phimu
            dth = (phimu @ (self.W @ ey)) / self.rho
        else:
            dth = np.zeros(0)
        return dx, dxh, dth


def _rk4(dyn, t, x, xh, th, dt, u_fn):
    u1 = u_fn(t)
    u2 = u_fn(t + 0.5 * dt)
    u3 = u_fn(t + dt)
    a1, b1, c1 = dyn(x, xh, th, u1)
    a2, b2, c2 = dyn(x + 0.5 * dt * a1, xh + 0.5 * dt * b1, th + 0.5 * dt * c1, u2)
    a3, b3, c3 = dyn(x + 0.5 * dt * a2, xh + 0.5 * dt * b2, th + 0.5 * dt * c2, u2)
    a4, b4, c4 = dyn(x + dt * a3, xh + dt * b3, th + dt * c3, u3)
    h = dt / 6.0
    return (x + h * (a1 + 2.0 * (a2 + a3) + a4),
            xh + h * (b1 + 2.0 * (b2 + b3) + b4),
            th + h * (c1 + 2.0 * (c2 + c3) + c4))


def step(model: TSModel, design, state, theta, u, dt):
    """One classical Runge-Kutta step of the coupled system with constant input.

    ``state`` is the tuple ``(x, x_hat, theta_hat)``; the true parameter is
    held constant across the step.  Raises ``FloatingPointError`` when the
    next state is not finite.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    x, xh, th = (np.asarray(v, dtype=float) for v in state)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    dyn = _Dynamics(model, design, design.rho)
    dyn.set_theta(np.atleast_1d(np.asarray(theta, dtype=float)))
    nxt = _rk4(dyn, 0.0, x, xh, th, dt, lambda _t: u)
    if not all(np.all(np.isfinite(v)) for v in nxt):
        raise FloatingPointError("state diverged during the step")
    return nxt


def run(model: TSModel, design, scenario: SimScenario):
    """Integrate a full scenario; returns ``(Trajectory, ExcitationDiagnostics)``.

    The parameter schedule is applied piecewise constantly at step boundaries;
    schedule entries beyond ``t_end`` are dropped with a flag.  On divergence
    the trajectory is truncated at the last finite record.
    """
    d = model.dims
    if scenario.x0.shape != (d.n,) or scenario.xhat0.shape != (d.n,):
        raise ValueError(f"initial states must have length {d.n}")
    if scenario.thetahat0.shape != (d.n_theta,):
        raise ValueError(f"thetahat0 must have length {d.n_theta}")
    for _t, v in scenario.theta_profile:
        if v.shape != (d.n_theta,):
            raise ValueError("theta_profile entries must have length n_theta")

    dt = scenario.dt
    steps = int(math.floor(scenario.t_end / dt + 1e-9))
    stride = scenario.record_stride
    n_rec = steps // stride + 1
    schedule = list(scenario.theta_profile)
    truncated = any(t >= scenario.t_end for t, _ in schedule[1:])

    sig = scenario.input_signal

    def u_fn(t, _nu=d.n_u, _sig=sig):
        return np.full(_nu, make_input(_sig, t))

    dyn = _Dynamics(model, design, scenario.rho)
    P = 0.5 * (design.P + design.P.T)
    rho = scenario.rho

    rec = {
        "t": np.zeros(n_rec), "x": np.zeros((n_rec, d.n)), "x_hat": np.zeros((n_rec, d.n)),
        "theta": np.zeros((n_rec, d.n_theta)), "theta_hat": np.zeros((n_rec, d.n_theta)),
        "mu": np.zeros((n_rec, d.r)), "u": np.zeros((n_rec, d.n_u)),
        "y": np.zeros((n_rec, d.n_y)), "y_hat": np.zeros((n_rec, d.n_y)),
        "e_y": np.zeros((n_rec, d.n_y)), "V": np.zeros(n_rec),
        "sat": np.zeros(n_rec, dtype=np.uint8),
    }

    x = scenario.x0.copy()
    xh = scenario.xhat0.copy()
    th_hat = scenario.thetahat0.copy()
    seg = 0
    diverged = False
    n_written = 0

    for k in range(steps + 1):
        t = k * dt
        while seg + 1 < len(schedule) and t >= schedule[seg + 1][0] - 0.5 * dt:
            seg += 1
        theta = schedule[seg][1]
        dyn.set_theta(theta)

        if k % stride == 0:
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xh))
                    and np.all(np.isfinite(th_hat))):
                diverged = True
                break
            u = u_fn(t)
            y = model.C @ x
            yh = model.C @ xh
            z, satd = premise_from_io(model, y, u)
            i = n_written
            rec["t"][i] = t
            rec["x"][i] = x
            rec["x_hat"][i] = xh
            rec["theta"][i] = theta
            rec["theta_hat"][i] = th_hat
            rec["mu"][i] = eval_weights(model, z)
            rec["u"][i] = u
            rec["y"][i] = y
            rec["y_hat"][i] = yh
            rec["e_y"][i] = y - yh
            e_x = x - xh
            e_th = theta - th_hat
            rec["V"][i] = float(e_x @ P @ e_x) + float((e_th ** 2) @ rho)
            rec["sat"][i] = 1 if satd else 0
            n_written += 1

        if k < steps:
            x, xh, th_hat = _rk4(dyn, t, x, xh, th_hat, dt, u_fn)

    if n_written < n_rec:
        for key, arr in rec.items():
            rec[key] = arr[:n_written]

    traj = Trajectory(diverged=diverged, schedule_truncated=truncated, **rec)
    return traj, _diagnostics(model, design, traj)


def _diagnostics(model, design, traj, window_seconds=None):
    d = model.dims
    n_rec = len(traj.t)
    mu = traj.mu
    if n_rec == 0:
        empty = np.zeros(0)
        return ExcitationDiagnostics(empty, empty, empty, np.zeros(d.n_theta),
                                     np.zeros(d.n_theta), 0.0)
    mu_min = mu.min(axis=0)
    mu_max = mu.max(axis=0)
    mu_var = mu.var(axis=0)

    t_span = traj.t[-1] - traj.t[0] if n_rec > 1 else 0.0
    if window_seconds is None:
        window_seconds = t_span / 10.0 if t_span > 0 else 0.0

    W = design.P @ design.C_pinv                       # (n, n_y)
    mean_sq = np.zeros(d.n_theta)
    min_window = np.zeros(d.n_theta)
    if d.n_theta and n_rec:
        # phi_j(k) = sum_i mu_i (Abar_ij x_hat + Bbar_ij u + Fbar_ij)' W, an n_y row
        phi = (np.einsum("rjmn,kn->krjm", model.Abar, traj.x_hat)
               + np.einsum("rjmn,kn->krjm", model.Bbar, traj.u)
               + model.Fbar[None, :, :, :])
        phi_mu = np.einsum("kr,krjm->kjm", mu, phi)    # (n_rec, n_theta, n)
        reg = np.einsum("kjm,my->kjy", phi_mu, W)      # (n_rec, n_theta, n_y)
        sq = np.sum(reg ** 2, axis=2)                  # (n_rec, n_theta)
        mean_sq = sq.mean(axis=0)
        if n_rec > 1 and window_seconds > 0:
            dt_rec = traj.t[1] - traj.t[0]
            w = max(1, min(n_rec - 1, int(round(window_seconds / dt_rec))))
            csum = np.concatenate([np.zeros((1, d.n_theta)), np.cumsum(sq, axis=0)])
            energies = (csum[w:] - csum[:-w]) * dt_rec
            min_window = energies.min(axis=0)
        else:
            min_window = sq[0] * 0.0
    return ExcitationDiagnostics(mu_min=mu_min, mu_max=mu_max, mu_var=mu_var,
                                 regressor_mean_sq=mean_sq,
                                 regressor_min_window=min_window,
                                 window_seconds=float(window_seconds))


def diagnostics_to_dict(diag: ExcitationDiagnostics):
    return {
        "mu_min": diag.mu_min.tolist(),
        "mu_max": diag.mu_max.tolist(),
        "mu_var": diag.mu_var.tolist(),
        "regressor_mean_sq": diag.regressor_mean_sq.tolist(),
        "regressor_min_window": diag.regressor_min_window.tolist(),
        "window_seconds": diag.window_seconds,
    }


# ---------------------------------------------------------------------------
# CSV trajectory format
# ---------------------------------------------------------------------------

def _csv_header(n, n_theta, r, n_u, n_y):
    cols = ["t"]
    cols += [f"x{i + 1}" for i in range(n)]
    cols += [f"xhat{i + 1}" for i in range(n)]
    cols += [f"theta_{j + 1}" for j in range(n_theta)]
    cols += [f"thetahat_{j + 1}" for j in range(n_theta)]
    cols += [f"mu_{i + 1}" for i in range(r)]
    cols += [f"u_{i + 1}" for i in range(n_u)]
    cols += [f"ey_{i + 1}" for i in range(n_y)]
    cols += ["V", "sat"]
    return cols


def write_trajectory_csv(traj: Trajectory, path):
    """Write the trajectory in the documented CSV layout (row 0 at t = 0)."""
    n = traj.x.shape[1]
    n_theta = traj.theta.shape[1]
    r = traj.mu.shape[1]
    n_u = traj.u.shape[1]
    n_y = traj.e_y.shape[1]
    header = _csv_header(n, n_theta, r, n_u, n_y)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(len(traj.t)):
            row = [repr(float(traj.t[k]))]
            row += [repr(float(v)) for v in traj.x[k]]
            row += [repr(float(v)) for v in traj.x_hat[k]]
            row += [repr(float(v)) for v in traj.theta[k]]
            row += [repr(float(v)) for v in traj.theta_hat[k]]
            row += [repr(float(v)) for v in traj.mu[k]]
            row += [repr(float(v)) for v in traj.u[k]]
            row += [repr(float(v)) for v in traj.e_y[k]]
            row += [repr(float(traj.V[k])), str(int(traj.sat[k]))]
            fh.write(",".join(row) + "\n")


def read_trajectory_csv(path):
    """Load a trajectory CSV into a column-name -> array mapping (bit-exact)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = np.array([[float(v) for v in row] for row in rows]) if rows else \
        np.zeros((0, len(header)))
    return {name: data[:, k].copy() for k, name in enumerate(header)}
