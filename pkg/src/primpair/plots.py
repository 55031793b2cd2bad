"""Figure rendering for report commands.

Figures are written next to the delimited output a report command produces.
They are diagnostic companions: the survey figure compares recomputed sieve
thresholds against the published reference values row by row, and the
exception figure maps the pairs the sieve criteria leave unresolved, showing
whether each was confirmed a member by exhaustive count or by randomized
witness search.

Rendering uses the Agg backend so it works headless; every function takes
explicit data and a target path and returns the path it wrote.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["render_table_figure", "render_exception_figure"]

_DPI = 150


def render_table_figure(evaluations, path: str) -> str:
    """Plot recomputed vs reference thresholds and per-row deviations.

    ``evaluations`` is the sequence produced by ``table1.evaluate_all``.
    Rows whose recomputed threshold disagrees with the reference by more
    than printing precision are annotated with their (q, n) label.
    """
    reference = [float(ev.row.reference_threshold) for ev in evaluations]
    recomputed = [float(ev.report.threshold) for ev in evaluations]
    deviations = [ev.threshold_deviation for ev in evaluations]
    colors = ["tab:blue" if ev.passes else "tab:red" for ev in evaluations]

    fig, (left, right) = plt.subplots(1, 2, figsize=(11, 4.5))

    left.scatter(reference, recomputed, s=18, c=colors, zorder=3)
    lo = min(min(reference), min(recomputed)) * 0.8
    hi = max(max(reference), max(recomputed)) * 1.2
    left.plot([lo, hi], [lo, hi], color="gray", lw=0.8, zorder=2)
    left.set_xscale("log")
    left.set_yscale("log")
    left.set_xlabel("reference threshold")
    left.set_ylabel("recomputed threshold")
    left.set_title("threshold agreement")
    for ev in evaluations:
        # deviation beyond 6th-decimal printing noise gets a label
        if ev.threshold_deviation > 1e-3:
            left.annotate(
                f"({ev.row.q},{ev.row.n})",
                (float(ev.row.reference_threshold), float(ev.report.threshold)),
                textcoords="offset points",
                xytext=(6, -4),
                fontsize=8,
            )

    index = range(len(evaluations))
    right.bar(index, [max(d, 1e-12) for d in deviations], color=colors, width=0.8)
    right.set_yscale("log")
    right.set_xlabel("row index")
    right.set_ylabel("|recomputed - reference| threshold")
    right.set_title("per-row deviation")

    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def render_exception_figure(pairs, path: str) -> str:
    """Map the sieve-unresolved pairs by extension degree and check mode.

    ``pairs`` is the ``pairs`` list from ``verify.confirm_exceptions``:
    dicts with q, n, mode, and verdict keys.  Any pair whose verdict is not
    membership gets flagged on the plot.
    """
    fig, ax = plt.subplots(figsize=(7, 4.5))
    styles = {
        "count": ("tab:blue", "o", "exhaustive count"),
        "witness": ("tab:orange", "s", "witness search"),
    }
    for mode, (color, marker, label) in styles.items():
        xs = [row["q"] for row in pairs if row["mode"] == mode]
        ys = [row["n"] for row in pairs if row["mode"] == mode]
        if xs:
            ax.scatter(xs, ys, c=color, marker=marker, s=30, label=label, zorder=3)
    bad = [(row["q"], row["n"]) for row in pairs if row["verdict"] != "IN_P"]
    for q, n in bad:
        ax.annotate("unconfirmed", (q, n), textcoords="offset points", xytext=(5, 5), fontsize=8, color="tab:red")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("subfield size q")
    ax.set_ylabel("extension degree n")
    ax.set_title("confirmed exception pairs by check mode")
    ax.grid(True, lw=0.3, alpha=0.5)
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path
