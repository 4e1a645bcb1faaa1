"""Matplotlib renderers for the report commands.

Each function writes one PNG next to the delimited output of the same
command. Rendering is headless (Agg) and deterministic given the data.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_scatter(path, actual, predicted, slope, intercept, note=""):
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.scatter(actual, predicted, s=14, alpha=0.6, edgecolors="none")
    lo = min(min(actual), min(predicted))
    hi = max(max(actual), max(predicted))
    pad = 0.05 * (hi - lo if hi > lo else 1.0)
    xs = [lo - pad, hi + pad]
    ax.plot(xs, [slope * x + intercept for x in xs], "k--", linewidth=1.2,
            label=f"best fit: {slope:.3f} x + {intercept:.3f}")
    ax.set_xlabel("actual label (bits)")
    ax.set_ylabel("predicted label (bits)")
    if note:
        ax.set_title(note, fontsize=10)
    ax.legend(loc="upper left", fontsize=9)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep(path, sizes, train_r2, test_r2):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(sizes, train_r2, "o-", label="train R^2")
    ax.plot(sizes, test_r2, "s-", label="test R^2")
    ax.set_xlabel("training rows")
    ax.set_ylabel("R^2")
    ax.legend(loc="lower right", fontsize=9)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_crossval(path, degrees, r2_means, r2_stds):
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.errorbar(degrees, r2_means, yerr=r2_stds, fmt="o", capsize=4)
    ax.set_xticks(list(degrees))
    ax.set_xlabel("polynomial degree")
    ax.set_ylabel("cross-validated R^2")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
