"""Minimal SVG line charts for trajectories (matplotlib, Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["save_line_plot", "save_trajectory_plots"]


def save_line_plot(path, t, series, labels, title, ylabel=""):
    fig, ax = plt.subplots(figsize=(7.0, 3.2), constrained_layout=True)
    for values, label in zip(series, labels):
        ax.plot(t, values, linewidth=1.0, label=label)
    ax.set_xlabel("t [s]")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    if labels:
        ax.legend(loc="best", fontsize=8)
    fig.savefig(path, format="svg")
    plt.close(fig)


def save_trajectory_plots(traj, out_dir):
    """Write the four standard charts; returns the created file paths."""
    e_x = traj.x - traj.x_hat
    n = e_x.shape[1]
    paths = []

    p = out_dir / "err_states.svg"
    save_line_plot(p, traj.t, [e_x[:, i] for i in range(n)],
                   [f"e_x{i + 1}" for i in range(n)],
                   "State estimation errors", "e_x")
    paths.append(p)

    p = out_dir / "theta_tracking.svg"
    n_theta = traj.theta.shape[1]
    series, labels = [], []
    for j in range(n_theta):
        series += [traj.theta[:, j], traj.theta_hat[:, j]]
        labels += [f"theta_{j + 1}", f"thetahat_{j + 1}"]
    save_line_plot(p, traj.t, series, labels, "Parameter tracking", "theta")
    paths.append(p)

    p = out_dir / "input.svg"
    save_line_plot(p, traj.t, [traj.u[:, i] for i in range(traj.u.shape[1])],
                   [f"u_{i + 1}" for i in range(traj.u.shape[1])],
                   "Excitation input", "u")
    paths.append(p)

    p = out_dir / "weights.svg"
    save_line_plot(p, traj.t, [traj.mu[:, i] for i in range(traj.mu.shape[1])],
                   [f"mu_{i + 1}" for i in range(traj.mu.shape[1])],
                   "Submodel weights", "mu")
    paths.append(p)
    return paths
