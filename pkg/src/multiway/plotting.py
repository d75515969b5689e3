"""Matplotlib renderings of multiway graphs and their generation census."""

from __future__ import annotations

from typing import Dict, Iterable, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .graph import MultiwayGraph, ProofPath  # noqa: E402

BASE_COLOUR = "#737373"
RUNG_COLOUR = "#A95AAE"
PATH_COLOURS = ("#FF3F5D", "#FFA44E")

# Fixed metadata keeps PNG bytes identical across runs.
_PNG_META = {"Software": None}


def layered_positions(g: MultiwayGraph) -> Dict[int, Tuple[float, float]]:
    """Nodes on rows by generation, centred, in node-id order within a row."""
    rows: Dict[int, list] = {}
    for n in g.nodes:
        rows.setdefault(n.generation, []).append(n.id)
    pos = {}
    for gen, ids in rows.items():
        width = len(ids)
        for k, nid in enumerate(ids):
            pos[nid] = (k - (width - 1) / 2.0, -float(gen))
    return pos


def draw_multiway(
    g: MultiwayGraph,
    path: str,
    *,
    highlight: Sequence[ProofPath] = (),
    title: Optional[str] = None,
    dpi: int = 120,
) -> None:
    """Draw ``g`` to ``path``; rung edges purple, ``highlight`` paths red/yellow."""
    pos = layered_positions(g)
    widest = max((sum(1 for n in g.nodes if n.generation == d) for d in range(g.depth + 1)), default=1)
    fig, ax = plt.subplots(figsize=(max(4.0, 1.3 * widest), max(3.0, 0.9 * (g.depth + 1))))

    on_path = {}
    for colour, p in zip(PATH_COLOURS, highlight):
        for e in p.edges:
            on_path.setdefault((e.src, e.dst), colour)

    for e in g.edges:
        rung = max(g.system[w.rule].order for w in e.witnesses) >= 2
        colour = on_path.get((e.src, e.dst), RUNG_COLOUR if rung else BASE_COLOUR)
        (x0, y0), (x1, y1) = pos[e.src], pos[e.dst]
        ax.annotate(
            "",
            xy=(x1, y1),
            xytext=(x0, y0),
            arrowprops=dict(
                arrowstyle="->",
                color=colour,
                lw=2.0 if (e.src, e.dst) in on_path else 1.0,
                shrinkA=12,
                shrinkB=12,
                connectionstyle="arc3,rad=0.25" if rung else "arc3",
            ),
        )
    for n in g.nodes:
        x, y = pos[n.id]
        ax.text(x, y, n.string, ha="center", va="center", fontsize=7,
                bbox=dict(boxstyle="round,pad=0.2", fc="white", ec=BASE_COLOUR, lw=0.5))
    xs = [p[0] for p in pos.values()] or [0.0]
    ax.set_xlim(min(xs) - 1, max(xs) + 1)
    ax.set_ylim(-g.depth - 0.7, 0.7)
    ax.set_yticks([-d for d in range(g.depth + 1)])
    ax.set_yticklabels([str(d) for d in range(g.depth + 1)])
    ax.set_ylabel("generation")
    ax.set_xticks([])
    for side in ("top", "right", "bottom"):
        ax.spines[side].set_visible(False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi, metadata=_PNG_META)
    plt.close(fig)


def draw_census(
    layer_sizes: Sequence[int],
    edge_counts: Sequence[int],
    path: str,
    *,
    rung_counts: Iterable[Tuple[int, int]] = (),
    dpi: int = 120,
) -> None:
    """Bar chart of states per generation, edges per generation, and rungs per order."""
    rung_counts = list(rung_counts)
    ncols = 2 if rung_counts else 1
    fig, axes = plt.subplots(1, ncols, figsize=(5.0 * ncols, 3.2), squeeze=False)
    ax = axes[0][0]
    gens = list(range(len(layer_sizes)))
    ax.bar([x - 0.2 for x in gens], layer_sizes, width=0.4, color=BASE_COLOUR, label="states")
    ax.bar([x + 0.2 for x in gens], edge_counts, width=0.4, color=PATH_COLOURS[0], label="out-edges")
    ax.set_xlabel("generation")
    ax.set_xticks(gens)
    ax.legend(frameon=False)
    if rung_counts:
        ax = axes[0][1]
        orders = [k for k, _ in rung_counts]
        ax.bar(orders, [c for _, c in rung_counts], color=RUNG_COLOUR)
        ax.set_xlabel("homotopy order")
        ax.set_ylabel("rung rules")
        ax.set_xticks(orders)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi, metadata=_PNG_META)
    plt.close(fig)
