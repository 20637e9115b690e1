"""Figure rendering for evaluation reports and search runs.

All figures render through the Agg backend straight to files, so they
work in headless environments and never open a window.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from litscout.core.types import PaperClassification, PaperVerdict  # noqa: E402
from litscout.evalkit.reports import (  # noqa: E402
    GENERATION_COLUMNS,
    GENERATION_METRICS,
    VERDICT_LABELS,
    VERDICT_ORDER,
    GenerationReport,
    MatchingReport,
)

_FIGURE_STYLE = {
    "figure.dpi": 150,
    "savefig.bbox": "tight",
    "axes.titlesize": 11,
    "axes.labelsize": 10,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
}


def _new_axes(width: float = 6.0, height: float = 3.6):
    fig, ax = plt.subplots(figsize=(width, height))
    return fig, ax


def save_generation_figures(report: GenerationReport, out_dir: str | Path) -> list[Path]:
    """Render the generation-metric bars; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(_FIGURE_STYLE):
        fig, ax = _new_axes()
        labels = [GENERATION_COLUMNS[name] for name in GENERATION_METRICS]
        values = [
            report.metrics[name] * (100.0 if name != "length_ratio" else 1.0)
            for name in GENERATION_METRICS
        ]
        bars = ax.bar(range(len(labels)), values, color="#4878a8")
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=20, ha="right")
        ax.set_ylabel("score (%)")
        ax.set_title(f"Plan generation quality over {report.items} items")
        for bar, value in zip(bars, values):
            ax.annotate(
                f"{value:.1f}",
                (bar.get_x() + bar.get_width() / 2.0, bar.get_height()),
                ha="center", va="bottom", fontsize=8,
            )
        path = out / "generation_metrics.png"
        fig.savefig(path)
        plt.close(fig)
    return [path]


def save_matching_figures(report: MatchingReport, out_dir: str | Path) -> list[Path]:
    """Render the accuracy bars and the confusion heatmap."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []
    with plt.rc_context(_FIGURE_STYLE):
        fig, ax = _new_axes()
        labels = [VERDICT_LABELS[v] for v in VERDICT_ORDER] + ["Overall"]
        values = [100.0 * report.per_category_accuracy[v] for v in VERDICT_ORDER]
        values.append(100.0 * report.overall_accuracy)
        colors = ["#4878a8"] * len(VERDICT_ORDER) + ["#b8604d"]
        bars = ax.bar(range(len(labels)), values, color=colors)
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=20, ha="right")
        ax.set_ylabel("accuracy (%)")
        ax.set_ylim(0, 105)
        ax.set_title(f"Verdict matching accuracy over {report.items} items")
        for bar, value in zip(bars, values):
            ax.annotate(
                f"{value:.2f}",
                (bar.get_x() + bar.get_width() / 2.0, bar.get_height()),
                ha="center", va="bottom", fontsize=8,
            )
        path = out / "matching_accuracy.png"
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)

        fig, ax = _new_axes(5.4, 4.6)
        matrix = [[float(n) for n in row] for row in report.confusion]
        image = ax.imshow(matrix, cmap="Blues")
        ax.set_xticks(range(len(VERDICT_ORDER)))
        ax.set_yticks(range(len(VERDICT_ORDER)))
        short = [VERDICT_LABELS[v].replace("Insufficient Information", "Insufficient") for v in VERDICT_ORDER]
        ax.set_xticklabels(short, rotation=20, ha="right")
        ax.set_yticklabels(short)
        ax.set_xlabel("predicted")
        ax.set_ylabel("gold")
        ax.set_title("Verdict confusion")
        peak = max(max(row) for row in report.confusion) or 1
        for i, row in enumerate(report.confusion):
            for j, count in enumerate(row):
                ax.text(
                    j, i, str(count), ha="center", va="center",
                    color="white" if count > peak / 2 else "black", fontsize=9,
                )
        fig.colorbar(image, ax=ax, shrink=0.8)
        path = out / "matching_confusion.png"
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)
    return paths


def save_run_figures(verdicts: Sequence[PaperVerdict], out_dir: str | Path) -> list[Path]:
    """Render the Perfect/Partial/No partition of one search run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    order = (PaperClassification.PERFECT, PaperClassification.PARTIAL, PaperClassification.NO)
    counts = {c: 0 for c in order}
    for verdict in verdicts:
        counts[verdict.classification] += 1
    with plt.rc_context(_FIGURE_STYLE):
        fig, ax = _new_axes(4.6, 3.4)
        values = [counts[c] for c in order]
        bars = ax.bar(
            [c.value for c in order], values,
            color=["#3d8c5f", "#c9a227", "#b8604d"],
        )
        ax.set_ylabel("papers")
        ax.set_title(f"Validation outcome for {len(verdicts)} candidates")
        for bar, value in zip(bars, values):
            ax.annotate(
                str(value),
                (bar.get_x() + bar.get_width() / 2.0, bar.get_height()),
                ha="center", va="bottom", fontsize=9,
            )
        path = out / "run_partition.png"
        fig.savefig(path)
        plt.close(fig)
    return [path]
