"""Figure rendering for selection runs: per-query relevance curves with the
selected frames marked, plus a run-level budget-split summary."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .core import Selection, StreamPair, View
from .scoring import RelevanceVector

_VIEW_COLOR = {View.EGO: "tab:blue", View.EXO: "tab:orange"}


def save_query_figure(
    pair: StreamPair,
    relevance: dict[View, RelevanceVector],
    selection: Selection,
    title: str,
    path: Path | str,
) -> Path:
    """Plot both views' relevance over time and mark the selected frames."""
    fig, axes = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
    for ax, view in zip(axes, (View.EGO, View.EXO)):
        stream = pair.stream(view)
        ax.plot(
            stream.timestamps,
            relevance[view].scores,
            color=_VIEW_COLOR[view],
            lw=1.0,
            label=f"{view.value} relevance",
        )
        picked = [e for e in selection.entries if e.view is view]
        if picked:
            ax.scatter(
                [e.timestamp for e in picked],
                [relevance[view].scores[e.index] for e in picked],
                color="black",
                zorder=3,
                s=24,
                label="selected",
            )
        ax.set_ylabel(f"{view.value} score")
        ax.grid(True, alpha=0.3)
        ax.legend(loc="upper right", fontsize=8)
    axes[-1].set_xlabel("time (s)")
    split = selection.provenance.get("split", {})
    fig.suptitle(f"{title}  (ego {split.get('ego', '?')} / exo {split.get('exo', '?')})")
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=110)
    plt.close(fig)
    return out


def save_split_summary_figure(rows: list[dict], path: Path | str) -> Path:
    """Stacked per-query bar chart of the ego/exo budget split."""
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(rows) + 2), 4))
    labels = [r["query_id"] for r in rows]
    ego = [r["k_ego"] for r in rows]
    exo = [r["k_exo"] for r in rows]
    xs = range(len(rows))
    ax.bar(xs, ego, color=_VIEW_COLOR[View.EGO], label="ego")
    ax.bar(xs, exo, bottom=ego, color=_VIEW_COLOR[View.EXO], label="exo")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("frames")
    ax.set_title("budget split per query")
    ax.legend()
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=110)
    plt.close(fig)
    return out
