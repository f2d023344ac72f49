"""Tidy result tables derived from assignments, groups, and profiles.

Every emitter returns plain rows (one observation each) and has a matching
CSV writer, so any plotting tool can consume the exports; the bundled
matplotlib rendering in ``figures`` is a convenience on top of the same
tables, not a separate data path.
"""
from __future__ import annotations

import csv
from collections import Counter
from pathlib import Path
from statistics import mean
from typing import Iterable, Sequence

from .evolution import StableGroup
from .groupstats import GroupProfile, size_bucket
from .roles import Role, RoleAssignment

ROLE_ORDER = list(Role)


def emit_group_size_histogram(stable_groups: Sequence[StableGroup]) -> list[tuple[int, int]]:
    """Stable-group occurrences by size, summed over slots."""
    counts: Counter[int] = Counter()
    for g in stable_groups:
        for _, members in g.lifespan:
            counts[len(members)] += 1
    return sorted(counts.items())


def emit_role_counts(
    assignments: Iterable[RoleAssignment], scope_label: str
) -> list[tuple[int, str, str, int]]:
    """Per-slot role counts: rows (slot_index, scope_label, role, count)."""
    counts: Counter[tuple[int, Role]] = Counter()
    for a in assignments:
        counts[(a.slot_index, a.role)] += 1
    rows = []
    for slot_index in sorted({s for s, _ in counts}):
        for role in ROLE_ORDER:
            n = counts.get((slot_index, role), 0)
            if n:
                rows.append((slot_index, scope_label, role.value, n))
    return rows


def emit_user_role_history(
    assignments: Iterable[RoleAssignment],
    scope_label: str,
    user_ids: Sequence[str] | None = None,
) -> list[tuple[str, str, str, int, int]]:
    """Occurrence counts per user and role plus competition rank (1, 1, 3).

    The ranking population is every user with at least one assignment in
    the scope (plus any explicitly requested ids, which may be all-zero).
    """
    counts: Counter[tuple[str, Role]] = Counter()
    seen: set[str] = set()
    for a in assignments:
        counts[(a.user, a.role)] += 1
        seen.add(a.user)
    # Requested ids without assignments are legitimate: they report zeros.
    population = sorted(seen | set(user_ids or ()))

    rows = []
    for role in ROLE_ORDER:
        per_user = {u: counts.get((u, role), 0) for u in population}
        values = sorted(per_user.values(), reverse=True)
        for u in population:
            rank = 1 + sum(1 for v in values if v > per_user[u])
            rows.append((u, scope_label, role.value, per_user[u], rank))
    rows.sort(key=lambda r: (r[0], ROLE_ORDER.index(Role(r[2]))))
    return rows


def emit_group_role_shares(profiles: Iterable[GroupProfile]) -> list[dict]:
    """Mean role shares per (size bucket, scope); empty buckets are omitted."""
    grouped: dict[tuple[str, str], list[GroupProfile]] = {}
    for p in profiles:
        grouped.setdefault((size_bucket(p.size), p.scope), []).append(p)
    rows = []
    for (bucket, scope), group in sorted(grouped.items()):
        rows.append(
            {
                "bucket": bucket,
                "scope": scope,
                "n_groups": len(group),
                "share_influential": mean(p.share_influential for p in group),
                "share_cooperative": mean(p.share_cooperative for p in group),
                "share_selfish": mean(p.share_selfish for p in group),
            }
        )
    return rows


def write_group_size_histogram_csv(rows: Sequence[tuple[int, int]], path: Path | str) -> int:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["size", "count"])
        writer.writerows(rows)
    return len(rows)


def write_role_counts_csv(rows: Sequence[tuple[int, str, str, int]], path: Path | str) -> int:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slot_index", "scope", "role", "count"])
        writer.writerows(rows)
    return len(rows)


def write_user_role_history_csv(
    rows: Sequence[tuple[str, str, str, int, int]], path: Path | str
) -> int:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "scope", "role", "count", "rank"])
        writer.writerows(rows)
    return len(rows)


def write_group_role_shares_csv(rows: Sequence[dict], path: Path | str) -> int:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["bucket", "scope", "n_groups", "share_influential", "share_cooperative", "share_selfish"]
        )
        for r in rows:
            writer.writerow(
                [
                    r["bucket"],
                    r["scope"],
                    r["n_groups"],
                    format(r["share_influential"], ".6g"),
                    format(r["share_cooperative"], ".6g"),
                    format(r["share_selfish"], ".6g"),
                ]
            )
    return len(rows)
