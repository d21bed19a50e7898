"""PNG plots of the report tables (matplotlib, Agg backend)."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from gazemask.analysis.report import read_csv  # noqa: E402


def _numeric(frame: pd.DataFrame, column: str) -> pd.Series:
    # gap cells become NaN
    return pd.to_numeric(frame[column], errors="coerce")


def plot_accuracy(report_csv: str | Path, out_png: str | Path) -> Path:
    """Accuracy per iteration, before and after adaptation, with chance lines."""
    frame, _ = read_csv(report_csv)
    chance = frame[frame["iteration"] == "chance"]
    data = frame[frame["iteration"] != "chance"]
    x = pd.to_numeric(data["iteration"])

    fig, ax = plt.subplots(figsize=(7, 4))
    styles = {
        "stim_no_adapt": ("tab:green", "--", "stimulus, no adaptation"),
        "stim_adapt": ("tab:green", "-", "stimulus, adapted"),
        "sub_no_adapt": ("tab:red", "--", "subject, no adaptation"),
        "sub_adapt": ("tab:red", "-", "subject, adapted"),
    }
    for column, (color, style, label) in styles.items():
        ax.plot(x, _numeric(data, column), style, color=color, marker="o", label=label)
    if not chance.empty:
        for column, color in (("stim_adapt", "tab:green"), ("sub_adapt", "tab:red")):
            ax.axhline(float(chance[column].iloc[0]), color=color, lw=0.8, ls=":")
    ax.set_xlabel("iteration")
    ax.set_ylabel("test accuracy")
    ax.set_ylim(0.0, 1.0)
    ax.legend(fontsize="small")
    fig.tight_layout()
    out = Path(out_png)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=100)
    plt.close(fig)
    return out


def plot_importance(importance_csv: str | Path, out_png: str | Path) -> Path:
    """Stacked channel shares per iteration."""
    frame, _ = read_csv(importance_csv)
    x = pd.to_numeric(frame["iteration"])
    red = _numeric(frame, "red_pct")
    green = _numeric(frame, "green_pct")
    blue = _numeric(frame, "blue_pct")

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(x, red, color="tab:red", label="red")
    ax.bar(x, green, bottom=red, color="tab:green", label="green")
    ax.bar(x, blue, bottom=red + green, color="tab:blue", label="blue")
    ax.set_xlabel("iteration")
    ax.set_ylabel("changed values (%)")
    ax.set_ylim(0.0, 100.0)
    ax.legend(fontsize="small")
    fig.tight_layout()
    out = Path(out_png)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=100)
    plt.close(fig)
    return out
