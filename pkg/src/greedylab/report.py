"""Run reports: flat CSV tables and log-log SVG figures."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

RUN_COLUMNS = ("k", "residual_norm", "correlation", "packing_cumsum")
LOWER_BOUND_COLUMNS = ("n", "residual_norm", "bound", "ratio")
COUNTEREXAMPLE_COLUMNS = ("epsilon", "variation_norm", "bound")

FIGURE_STYLE = {
    "font.family": "sans-serif",
    "font.size": 11,
    "axes.labelsize": 12,
    "axes.linewidth": 0.8,
    "legend.fontsize": 10,
    "legend.frameon": False,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "svg.fonttype": "none",      # keep labels as searchable text
    "svg.hashsalt": "greedylab",  # stable element ids
}
FIGURE_SIZE_PX = (800, 600)


@dataclass
class RunReport:
    command: str
    columns: tuple
    rows: list = field(default_factory=list)
    rate: object = None
    checks: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    duration: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def column(self, name) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([row[j] for row in self.rows], dtype=float)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def csv_text(report: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.columns)
    for row in report.rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def emit_csv(report: RunReport, path) -> None:
    """Write the report table as UTF-8 CSV with LF line endings."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text(report))
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write CSV to {path}: {exc.strerror}") from exc


def read_csv(path) -> tuple[list[str], list[list[float]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(v) for v in row] for row in rows[1:]]


def _plot_columns(report: RunReport):
    if report.columns == LOWER_BOUND_COLUMNS:
        return "n", "residual_norm", "bound", r"$\|r_n\|$"
    if report.columns == COUNTEREXAMPLE_COLUMNS:
        return "epsilon", "variation_norm", "bound", "variation norm"
    return "k", "residual_norm", None, "error"


def render_figure(report: RunReport):
    """Log-log figure of the report's main series, fitted line and order label."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xname, yname, refname, ylabel = _plot_columns(report)
    with plt.rc_context(FIGURE_STYLE):
        fig, ax = plt.subplots(figsize=(FIGURE_SIZE_PX[0] / 72, FIGURE_SIZE_PX[1] / 72))
        ax.set_xscale("log")
        ax.set_yscale("log")
        if report.rows:
            x, y = report.column(xname), report.column(yname)
            ax.plot(x, y, "o", ms=4, color="C0", label=yname, gid="data-points")
            if refname is not None:
                ax.plot(x, report.column(refname), "--", color="0.4", label=refname, gid="reference")
            for name, (sx, sy) in report.series.items():
                ok = np.asarray(sy) > 0
                ax.plot(np.asarray(sx)[ok], np.asarray(sy)[ok], "s", ms=3, mfc="none", label=name,
                        gid=f"series-{name}")
            rate = report.rate
            if rate is not None:
                xs = x[x > rate.skip_prefix]
                xf = np.array([xs.min(), xs.max()])
                ax.plot(xf, np.exp(rate.intercept) * xf ** rate.slope, "-", color="C3", lw=1.5,
                        label="fit", gid="fit-line")
                ax.text(0.05, 0.06, f"estimated order {rate.order:.3f}", transform=ax.transAxes,
                        gid="order-label")
        ax.set_xlabel(xname)
        ax.set_ylabel(ylabel)
        ax.set_title(report.command)
        ax.legend(loc="upper right")
        fig.tight_layout()
    return fig


def emit_svg(report: RunReport, path) -> None:
    """Save the figure as SVG; the style stays active so ids and text are stable."""
    import matplotlib.pyplot as plt

    with plt.rc_context(FIGURE_STYLE):
        fig = render_figure(report)
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write SVG to {path}: {exc.strerror}") from exc
        finally:
            plt.close(fig)


def output_paths(output, fmt: str) -> dict:
    """Map ``csv``/``svg`` to target paths derived from ``--output``."""
    stem, ext = os.path.splitext(os.fspath(output))
    if ext.lower() not in (".csv", ".svg"):
        stem = os.fspath(output)
    kinds = ("csv", "svg") if fmt == "both" else (fmt,)
    return {k: f"{stem}.{k}" for k in kinds}


def summary_lines(report: RunReport) -> list[str]:
    lines = []
    for k, v in report.summary.items():
        if isinstance(v, float):
            v = f"{v:.6g}" if math.isfinite(v) else str(v)
        lines.append(f"{k}: {v}")
    if report.rate is not None:
        r = report.rate
        lines.append(f"estimated order: {r.order:.4f} (slope {r.slope:.4f}, R^2 {r.r_squared:.4f}, "
                     f"{r.n_points} points after skipping {r.skip_prefix})")
    for name, ok in report.checks.items():
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}")
    lines.extend(f"warning: {w}" for w in report.warnings)
    return lines
