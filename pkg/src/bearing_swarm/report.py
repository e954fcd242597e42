"""CSV traces and SVG figures for a finished run."""

import csv
import os

import matplotlib

matplotlib.use("Agg")
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure
import numpy as np

FLOAT_FMT = "%.17g"

SUMMARY_FIELDS = (
    "status", "t_end", "delta_norm", "ptilde_norm", "bearing_err_max", "min_edge_dist", "W1",
    "delta_norm_initial", "ptilde_norm_initial", "min_edge_dist_run",
)

# Fixed SVG ids and no timestamp, so identical traces give identical files.
_SVG_RC = {"svg.hashsalt": "bearing-swarm", "svg.fonttype": "path", "path.simplify": False}
_SVG_META = {"Date": None, "Creator": "bearing-swarm"}


def trace_header(n):
    cols = ["t"]
    for i in range(1, n + 1):
        cols += [f"x{i}", f"y{i}", f"theta{i}", f"xhat{i}", f"yhat{i}"]
    cols += ["delta_norm", "ptilde_norm", "bearing_err_max", "min_edge_dist", "W1"]
    return cols


def _fmt(v):
    return FLOAT_FMT % v


def write_trace_csv(trace, path):
    n = trace.n
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_header(n))
        for r in range(len(trace)):
            row = [trace.t[r]]
            for i in range(n):
                row += [trace.positions[r, i, 0], trace.positions[r, i, 1], trace.headings[r, i],
                        trace.estimates[r, i, 0], trace.estimates[r, i, 1]]
            row += [trace.delta_norm[r], trace.ptilde_norm[r], trace.bearing_err_max[r],
                    trace.min_edge_dist[r], trace.W1[r]]
            w.writerow([_fmt(v) for v in row])


def summarize(trace, status="completed"):
    if not len(trace):
        return {f: (status if f == "status" else float("nan")) for f in SUMMARY_FIELDS}
    fin = trace.final()
    return {
        "status": status,
        "t_end": fin["t"],
        "delta_norm": fin["delta_norm"],
        "ptilde_norm": fin["ptilde_norm"],
        "bearing_err_max": fin["bearing_err_max"],
        "min_edge_dist": fin["min_edge_dist"],
        "W1": fin["W1"],
        "delta_norm_initial": float(trace.delta_norm[0]),
        "ptilde_norm_initial": float(trace.ptilde_norm[0]),
        "min_edge_dist_run": float(np.min(trace.min_edge_dist)),
    }


def write_rows_csv(rows, fields, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for row in rows:
            w.writerow([_fmt(row[f]) if isinstance(row[f], float) else row[f] for f in fields])


def write_summary_csv(summary, path):
    write_rows_csv([summary], SUMMARY_FIELDS, path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _save(fig, path):
    FigureCanvasSVG(fig)
    fig.savefig(path, format="svg", metadata=_SVG_META)


def plot_errors(trace, path):
    """Localization and tracking error norms against time, log scale."""
    with matplotlib.rc_context(_SVG_RC):
        fig = Figure(figsize=(7, 5.5))
        ax1, ax2 = fig.subplots(2, 1, sharex=True)
        floor = 1e-16
        ax1.semilogy(trace.t, np.maximum(trace.delta_norm, floor), color="C0")
        ax1.set_ylabel(r"$\|\delta\|$ (m)")
        ax2.semilogy(trace.t, np.maximum(trace.ptilde_norm, floor), color="C3")
        ax2.set_ylabel(r"$\|\tilde p\|$ (m)")
        ax2.set_xlabel("t (s)")
        for ax in (ax1, ax2):
            ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        _save(fig, path)


def plot_trajectories(trace, config, path):
    """Actual (solid) and desired (dashed) paths with start/end markers and final-time edges."""
    spec, graph = config.scenario, config.graph
    desired = np.array([spec.kinematics(float(t))[0] for t in trace.t])
    with matplotlib.rc_context(_SVG_RC):
        fig = Figure(figsize=(8, 6))
        ax = fig.subplots()
        P = trace.positions
        for i in range(trace.n):
            color = f"C{i % 10}"
            ax.plot(desired[:, i, 0], desired[:, i, 1], "--", color=color, lw=0.8)
            ax.plot(P[:, i, 0], P[:, i, 1], "-", color=color, lw=1.2, label=f"agent {i + 1}")
            ax.plot(P[0, i, 0], P[0, i, 1], "o", color=color, ms=5)
            ax.plot(P[-1, i, 0], P[-1, i, 1], "o", mfc="none", color=color, ms=7)
            ax.plot(desired[-1, i, 0], desired[-1, i, 1], "*", color=color, ms=8)
        for a, b in graph.edges:
            ax.plot(P[-1, [a - 1, b - 1], 0], P[-1, [a - 1, b - 1], 1], ":", color="c", lw=0.8)
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_xlabel("x (m)")
        ax.set_ylabel("y (m)")
        ax.legend(fontsize=7, loc="best")
        fig.tight_layout()
        _save(fig, path)


def write_run_outputs(trace, config, out_dir, status="completed"):
    os.makedirs(os.path.join(out_dir, "plots"), exist_ok=True)
    write_trace_csv(trace, os.path.join(out_dir, "trace.csv"))
    summary = summarize(trace, status)
    write_summary_csv(summary, os.path.join(out_dir, "summary.csv"))
    if len(trace):
        plot_errors(trace, os.path.join(out_dir, "plots", "errors.svg"))
        plot_trajectories(trace, config, os.path.join(out_dir, "plots", "trajectories.svg"))
    return summary
