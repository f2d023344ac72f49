"""Render the report tables as matplotlib figures.

Figures are written next to the delimited exports; they visualize the same
tables and carry no extra data. Empty tables are skipped.
"""
from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evolution import StableGroup
from .roles import Role

DPI = 150

plt.rcParams.update(
    {
        "figure.figsize": (7.0, 4.2),
        "axes.grid": True,
        "grid.alpha": 0.3,
        "axes.spines.top": False,
        "axes.spines.right": False,
    }
)


def _save(fig, out_dir: Path, name: str, rendered: list[str]) -> None:
    fig.tight_layout()
    fig.savefig(out_dir / name, dpi=DPI)
    plt.close(fig)
    rendered.append(name)


def fig_group_sizes(size_hist: Sequence[tuple[int, int]], out_dir: Path, rendered: list[str]) -> None:
    if not size_hist:
        return
    sizes, counts = zip(*size_hist)
    fig, ax = plt.subplots()
    ax.bar(sizes, counts, color="#4878a8")
    ax.set_xlabel("stable group size")
    ax.set_ylabel("occurrences over all slots")
    ax.set_title("Stable group sizes")
    _save(fig, out_dir, "fig_group_sizes.png", rendered)


def fig_groups_per_slot(stable_groups: Sequence[StableGroup], out_dir: Path, rendered: list[str]) -> None:
    per_slot: Counter[int] = Counter()
    for g in stable_groups:
        for slot_index, _ in g.lifespan:
            per_slot[slot_index] += 1
    if not per_slot:
        return
    slots = sorted(per_slot)
    fig, ax = plt.subplots()
    ax.plot(slots, [per_slot[s] for s in slots], marker="o", color="#4878a8")
    ax.set_xlabel("slot")
    ax.set_ylabel("stable groups present")
    ax.set_title("Stable groups per slot")
    _save(fig, out_dir, "fig_groups_per_slot.png", rendered)


def fig_role_counts(
    rows: Sequence[tuple[int, str, str, int]], scope_label: str, out_dir: Path, rendered: list[str]
) -> None:
    if not rows:
        return
    slots = sorted({r[0] for r in rows})
    by_role: dict[str, dict[int, int]] = {}
    for slot_index, _, role, count in rows:
        by_role.setdefault(role, {})[slot_index] = count
    fig, ax = plt.subplots()
    for role in Role:
        series = by_role.get(role.value)
        if series:
            ax.plot(slots, [series.get(s, 0) for s in slots], label=role.value)
    ax.set_xlabel("slot")
    ax.set_ylabel("users")
    ax.set_title(f"Role counts per slot ({scope_label})")
    ax.legend(fontsize=7, ncol=2)
    _save(fig, out_dir, f"fig_role_counts_{scope_label}.png", rendered)


def fig_group_role_shares(rows: Sequence[dict], out_dir: Path, rendered: list[str]) -> None:
    if not rows:
        return
    labels = [f"{r['bucket']}/{r['scope']}" for r in rows]
    x = range(len(rows))
    width = 0.27
    fig, ax = plt.subplots()
    ax.bar([i - width for i in x], [r["share_influential"] for r in rows], width, label="influential")
    ax.bar(list(x), [r["share_cooperative"] for r in rows], width, label="cooperative")
    ax.bar([i + width for i in x], [r["share_selfish"] for r in rows], width, label="selfish")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("mean member share")
    ax.set_title("Special-role shares by group bucket")
    ax.legend(fontsize=8)
    _save(fig, out_dir, "fig_group_role_shares.png", rendered)


def render_figures(
    out_dir: Path | str,
    size_hist: Sequence[tuple[int, int]],
    stable_groups: Sequence[StableGroup],
    role_count_rows_global: Sequence[tuple[int, str, str, int]],
    role_count_rows_local: Sequence[tuple[int, str, str, int]],
    share_rows: Sequence[dict],
) -> list[str]:
    out = Path(out_dir)
    rendered: list[str] = []
    fig_group_sizes(size_hist, out, rendered)
    fig_groups_per_slot(stable_groups, out, rendered)
    fig_role_counts(role_count_rows_global, "global", out, rendered)
    fig_role_counts(role_count_rows_local, "local", out, rendered)
    fig_group_role_shares(share_rows, out, rendered)
    return rendered
