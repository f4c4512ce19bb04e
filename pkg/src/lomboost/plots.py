"""Figure rendering for the normalized criterion curves."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_SERIES = [
    ("entropy", "tab:blue"),
    ("gini", "tab:orange"),
    ("modified_gini", "tab:green"),
    ("test_error", "tab:red"),
]


def render_curves(rows: list[dict], path) -> None:
    """Render normalized criterion curves versus the split count to a file.

    ``rows`` are dicts with keys t, entropy, gini, modified_gini and
    test_error (the last one may be None).
    """
    steps = [row["t"] for row in rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for key, color in _SERIES:
        values = [row[key] for row in rows]
        if any(v is None for v in values):
            continue
        ax.plot(steps, values, color=color, label=key.replace("_", " "), linewidth=1.6)
    ax.set_xlabel("splits")
    ax.set_ylabel("normalized value")
    ax.set_ylim(bottom=0.0)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper right", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
