"""Figure rendering for the CLI report paths.

Each function takes already-computed table data and writes a PNG next to
the delimited output.  Rendering is opt-in from the CLI; the CSV files
remain the primary interface.  PNG metadata is pinned so identical inputs
produce identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_SAVE_KW = dict(dpi=144, metadata={"Software": "vrsmooth"})


def save_functionals_figure(path, deltas, gamma_q_vals, gamma_a_vals, kernel_name):
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6), sharex=True)
    for ax, vals, label in zip(axes, (gamma_q_vals, gamma_a_vals),
                               ("single combination", "two-sided average")):
        ax.plot(deltas, vals, lw=1.5)
        ax.axhline(1.0, color="0.7", lw=0.8)
        ax.set_xlabel("bin width (units of h)")
        ax.set_title(label, fontsize=10)
    axes[0].set_ylabel("relative efficiency")
    fig.suptitle(f"{kernel_name} kernel", fontsize=11)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_coverage_table_figure(path, deltas, table):
    """``table`` maps kernel name -> {beta: [ratio per delta]}."""
    fig, axes = plt.subplots(1, len(table), figsize=(4 * len(table), 3.4),
                             sharey=True, squeeze=False)
    for ax, (kname, rows) in zip(axes[0], table.items()):
        for beta, vals in rows.items():
            ax.plot(deltas, vals, marker="o", ms=3, lw=1.2, label=f"{beta:g}")
        ax.axhline(1.0, color="0.7", lw=0.8)
        ax.set_title(kname, fontsize=10)
        ax.set_xlabel("bin width (units of h)")
    axes[0][0].set_ylabel("coverage-accuracy ratio")
    axes[0][-1].legend(title="level", fontsize=8, title_fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_fit_figure(path, data_xs, data_ys, grid, estimates, lower=None,
                    title=""):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(data_xs, data_ys, ".", ms=3, color="0.6", label="data")
    ax.plot(grid, estimates, lw=1.6, label="fit")
    if lower is not None:
        ax.plot(grid, lower, lw=1.0, ls="--", label="lower bound")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_simulation_figure(path, report_dict):
    """Curves of MISE, ISB and IV against bandwidth per estimator."""
    rows = report_dict["rows"]
    labels = [e["label"] for e in report_dict["estimators"]]
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6), sharex=True)
    for ax, key in zip(axes, ("mise", "isb", "iv")):
        for label in labels:
            hs = [r["h"] for r in rows if r["estimator"] == label]
            vs = [r[key] for r in rows if r["estimator"] == label]
            ax.plot(hs, vs, lw=1.3, label=label)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("bandwidth")
        ax.set_title(key.upper(), fontsize=10)
    axes[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
