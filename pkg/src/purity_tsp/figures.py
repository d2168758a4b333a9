"""Figure rendering for the report paths.

matplotlib is imported lazily inside each function (Agg backend) so the
computational core never touches a plotting dependency; the CLI calls
these alongside its CSV output unless figures are disabled.
"""

import numpy as np

from .stats import proportions


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def purity_law_figure(pools, report, out_path) -> None:
    """log10 proportion vs purity order per cell, with the fitted lines.

    pools: {(scale, distribution): OrderHistogramPool}; report: the
    matching PurityLawReport.
    """
    plt = _plt()
    dists = sorted({d for _, d in pools})
    fig, axes = plt.subplots(1, len(dists), figsize=(4 * len(dists), 3.4),
                             sharey=True, squeeze=False)
    fits = {(c.scale, c.distribution): c.fit for c in report.cells}
    for ax, dist in zip(axes[0], dists):
        for scale in sorted({s for s, d in pools if d == dist}):
            y = proportions(pools[(scale, dist)])
            ks = np.flatnonzero(y > 0)
            ax.scatter(ks, np.log10(y[ks]), s=14, label=f"n={scale}")
            fit = fits[(scale, dist)]
            grid = np.linspace(0, ks.max(), 50)
            ax.plot(grid, np.log10(fit.alpha * np.exp(-fit.beta * grid)), lw=1)
        ax.set_title(dist)
        ax.set_xlabel("purity order k")
        ax.legend(fontsize=8)
    axes[0][0].set_ylabel("log10 y(k)")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def train_report_figure(report, out_path) -> None:
    """Per-epoch greedy eval length, gap, and parameter norm."""
    plt = _plt()
    epochs = [r.epoch for r in report.rows]
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.2))
    axes[0].plot(epochs, [r.eval_greedy_length for r in report.rows], marker="o", ms=3)
    axes[0].set_xlabel("epoch"); axes[0].set_ylabel("eval greedy length")
    axes[1].plot(epochs, [r.eval_gap_pct for r in report.rows], marker="o", ms=3)
    axes[1].set_xlabel("epoch"); axes[1].set_ylabel("eval gap (%)")
    axes[2].plot(epochs, [r.param_norm for r in report.rows], marker="o", ms=3)
    axes[2].set_xlabel("epoch"); axes[2].set_ylabel("|w|")
    fig.suptitle(f"{report.config.mode} training, scale {report.config.scale}")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def eval_figure(result, out_path) -> None:
    """Gap histogram and per-instance purity proportions."""
    plt = _plt()
    gaps = [r.gap_pct for r in result.rows]
    prop0 = [r.prop0 for r in result.rows]
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.2))
    axes[0].hist(gaps, bins=24)
    axes[0].set_xlabel("gap (%)"); axes[0].set_ylabel("instances")
    axes[1].hist(prop0, bins=24)
    axes[1].set_xlabel("proportion of 0-order edges")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
