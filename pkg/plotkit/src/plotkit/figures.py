"""Render result tables from the estimation benchmark into figures.

Four figure kinds, one per table schema:

  gain        (theta, gain_sq) profile            -> single-panel curve
  recovery    per-cell success probabilities      -> marker plot vs theta0,
                                                     one panel per SNR
  error_box   per-trial frequency errors          -> boxplot per theta0 group,
                                                     one panel per SNR
  comparison  recovery rows for several methods   -> one marker series per
                                                     method, panel per SNR

Recovery and comparison plots draw markers at the computed cells joined
by light dotted lines; the lines are visual guides only, the markers are
the data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

FIGURE_KINDS = ("gain", "recovery", "error_box", "comparison")

REQUIRED_COLUMNS = {
    "gain": ["theta", "gain_sq"],
    "recovery": ["method", "theta0", "snr_db", "trials", "successes", "p_succ"],
    "error_box": ["method", "theta0", "snr_db", "trial_index", "freq_error"],
    "comparison": ["method", "theta0", "snr_db", "trials", "successes", "p_succ"],
}

MARKERS = ("o", "s", "^", "d", "v", "*")


class SchemaError(ValueError):
    """Table columns do not match the figure kind."""


@dataclass(frozen=True)
class PlotJob:
    table_path: str
    kind: str
    out_path: str
    xlabel: str | None = None
    ylabel: str | None = None
    title: str | None = None

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; choices: {FIGURE_KINDS}")


@dataclass
class FigureBundle:
    """A built figure plus the exact data series that were drawn.

    series maps a label to (x, y) lists for marker/curve plots, or to the
    per-group value lists for boxplots. Tests compare these against the
    source tables.
    """

    figure: object
    series: dict = field(default_factory=dict)

    def save(self, out_path: str) -> None:
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        self.figure.savefig(out_path, dpi=150, bbox_inches="tight")
        plt.close(self.figure)


def read_table(path: str, kind: str) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path} is empty")
        missing = [c for c in REQUIRED_COLUMNS[kind] if c not in reader.fieldnames]
        if missing:
            raise SchemaError(
                f"{path} lacks columns {missing} required by kind {kind!r} "
                f"(found {list(reader.fieldnames)})"
            )
        return list(reader)


def _panel_grid(n_panels: int):
    cols = 2 if n_panels > 1 else 1
    rows = math.ceil(n_panels / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(5.0 * cols, 3.6 * rows), squeeze=False)
    flat = [ax for row in axes for ax in row]
    for ax in flat[n_panels:]:
        ax.set_visible(False)
    return fig, flat[:n_panels]


def build_gain_figure(job: PlotJob) -> FigureBundle:
    rows = read_table(job.table_path, "gain")
    thetas = [float(r["theta"]) for r in rows]
    gains = [float(r["gain_sq"]) for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ax.plot(thetas, gains, lw=1.2)
    ax.set_xlabel(job.xlabel or "frequency (rad)")
    ax.set_ylabel(job.ylabel or "squared gain")
    if job.title:
        ax.set_title(job.title)
    ax.grid(alpha=0.3)
    return FigureBundle(figure=fig, series={"gain": (thetas, gains)})


def _by_snr(rows: list[dict]) -> dict[float, list[dict]]:
    groups: dict[float, list[dict]] = {}
    for r in rows:
        groups.setdefault(float(r["snr_db"]), []).append(r)
    return dict(sorted(groups.items()))


def build_recovery_figure(job: PlotJob, kind: str = "recovery") -> FigureBundle:
    rows = read_table(job.table_path, kind)
    by_snr = _by_snr(rows)
    fig, axes = _panel_grid(len(by_snr))
    series: dict = {}
    for ax, (snr, cell_rows) in zip(axes, by_snr.items()):
        methods: dict[str, list[dict]] = {}
        for r in cell_rows:
            methods.setdefault(r["method"], []).append(r)
        for k, (method, mrows) in enumerate(sorted(methods.items())):
            mrows = sorted(mrows, key=lambda r: float(r["theta0"]))
            x = [float(r["theta0"]) for r in mrows]
            y = [float(r["p_succ"]) for r in mrows]
            # dotted guide line carries no meaning; markers are the data
            ax.plot(x, y, linestyle=":", lw=0.8, alpha=0.5,
                    marker=MARKERS[k % len(MARKERS)], markersize=6, label=method)
            series[f"{method}@{snr:g}dB"] = (x, y)
        ax.set_ylim(-0.05, 1.05)
        ax.set_xlabel(job.xlabel or "center frequency (rad)")
        ax.set_ylabel(job.ylabel or "success probability")
        ax.set_title(f"SNR = {snr:g} dB")
        ax.grid(alpha=0.3)
        if len(methods) > 1:
            ax.legend(fontsize=8)
    if job.title:
        fig.suptitle(job.title)
    fig.tight_layout()
    return FigureBundle(figure=fig, series=series)


def build_error_box_figure(job: PlotJob) -> FigureBundle:
    rows = read_table(job.table_path, "error_box")
    by_snr = _by_snr(rows)
    fig, axes = _panel_grid(len(by_snr))
    series: dict = {}
    for ax, (snr, snr_rows) in zip(axes, by_snr.items()):
        groups: dict[float, list[float]] = {}
        for r in snr_rows:
            groups.setdefault(float(r["theta0"]), []).append(float(r["freq_error"]))
        positions = sorted(groups)
        data = [groups[p] for p in positions]
        ax.boxplot(data, positions=range(len(positions)), whis=1.5, widths=0.6)
        ax.set_xticks(range(len(positions)))
        ax.set_xticklabels([f"{p:g}" for p in positions], rotation=45)
        ax.set_xlabel(job.xlabel or "center frequency (rad)")
        ax.set_ylabel(job.ylabel or "frequency error")
        ax.set_title(f"SNR = {snr:g} dB")
        ax.grid(alpha=0.3, axis="y")
        for p in positions:
            series[f"{p:g}@{snr:g}dB"] = sorted(groups[p])
    if job.title:
        fig.suptitle(job.title)
    fig.tight_layout()
    return FigureBundle(figure=fig, series=series)


def build_figure(job: PlotJob) -> FigureBundle:
    if job.kind == "gain":
        return build_gain_figure(job)
    if job.kind == "recovery":
        return build_recovery_figure(job, "recovery")
    if job.kind == "comparison":
        return build_recovery_figure(job, "comparison")
    return build_error_box_figure(job)


def render(job: PlotJob) -> str:
    """Build and write the figure; returns the output path."""
    bundle = build_figure(job)
    bundle.save(job.out_path)
    return job.out_path
