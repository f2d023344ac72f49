"""Role composition of groups, class binning, and structural measures.

Groups are profiled by the share of members holding influence-bearing
roles along three dimensions: influential (any of the five strong roles),
cooperative (the socially oriented subset), and selfish (the self-oriented
subset). Since the cooperative and selfish sets are subsets of the
influential set, real profiles always satisfy coop <= infl and
selfish <= infl; binning itself accepts arbitrary triples.

Each dimension is cut into three labeled ranges (1: below the first cut,
2: between, 3: at or above the second; lower bounds inclusive). Cut points
come either from the built-in reference tables, keyed by size bucket and
role scope, or are re-derived from the observed share distribution by
splitting its value range into three equal-width intervals.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from statistics import mean
from typing import Iterable, Mapping, Sequence

from .netbuild import InteractionGraph
from .roles import Role

logger = logging.getLogger(__name__)

INFLUENTIAL_ROLES = frozenset(
    {
        Role.INFLUENTIAL_USER_SELFISH,
        Role.INFLUENTIAL_USER_SOCIAL,
        Role.INFLUENTIAL_BLOGGER_SELFISH,
        Role.INFLUENTIAL_BLOGGER_SOCIAL,
        Role.INFLUENTIAL_COMMENTATOR,
    }
)
COOPERATIVE_ROLES = frozenset(
    {
        Role.INFLUENTIAL_USER_SOCIAL,
        Role.INFLUENTIAL_BLOGGER_SOCIAL,
        Role.INFLUENTIAL_COMMENTATOR,
    }
)
SELFISH_ROLES = frozenset(
    {Role.INFLUENTIAL_USER_SELFISH, Role.INFLUENTIAL_BLOGGER_SELFISH}
)

SMALL_GROUP_SIZE = 9
LARGE_GROUP_MIN = 150
LARGE_GROUP_MAX = 250


@dataclass(frozen=True)
class GroupProfile:
    group_id: str
    slot_index: int
    size: int
    scope: str  # "global" or "local" role assignments used
    share_influential: float
    share_cooperative: float
    share_selfish: float


@dataclass(frozen=True)
class ClassThresholds:
    influential: tuple[float, float]
    cooperative: tuple[float, float]
    selfish: tuple[float, float]

    def __post_init__(self) -> None:
        for t1, t2 in (self.influential, self.cooperative, self.selfish):
            if not (0.0 <= t1 <= t2):
                raise ValueError("cut points must satisfy 0 <= t1 <= t2")


# Reference cut points by (size bucket, role scope).
BUILTIN_CLASS_THRESHOLDS: dict[tuple[str, str], ClassThresholds] = {
    ("small", "global"): ClassThresholds((0.2, 0.4), (0.1, 0.3), (0.1, 0.2)),
    ("small", "local"): ClassThresholds((0.15, 0.3), (0.1, 0.2), (0.1, 0.15)),
    ("large", "global"): ClassThresholds((0.1, 0.2), (0.1, 0.15), (0.05, 0.07)),
    ("large", "local"): ClassThresholds((0.04, 0.08), (0.02, 0.05), (0.02, 0.04)),
}


def role_shares(
    group_id: str,
    slot_index: int,
    members: Iterable[str],
    assignments: Mapping[str, Role],
    scope: str,
) -> GroupProfile:
    """Fraction of members in each special role set."""
    member_list = sorted(set(members))
    if not member_list:
        raise ValueError("group has no members")
    counts = {"influential": 0, "cooperative": 0, "selfish": 0}
    for member in member_list:
        role = assignments.get(member)
        if role is None:
            raise ValueError(f"no {scope} role assignment for member {member!r}")
        if role in INFLUENTIAL_ROLES:
            counts["influential"] += 1
        if role in COOPERATIVE_ROLES:
            counts["cooperative"] += 1
        if role in SELFISH_ROLES:
            counts["selfish"] += 1
    n = len(member_list)
    return GroupProfile(
        group_id=group_id,
        slot_index=slot_index,
        size=n,
        scope=scope,
        share_influential=counts["influential"] / n,
        share_cooperative=counts["cooperative"] / n,
        share_selfish=counts["selfish"] / n,
    )


def derive_thresholds(values: Sequence[float]) -> tuple[float, float]:
    """Cut one dimension's share distribution into three equal-width ranges.

    Returns the two cut points at 1/3 and 2/3 of the observed [min, max]
    range, rounded to 2 decimals. A degenerate distribution (all values
    equal) yields a single bin with a warning.
    """
    if not values:
        raise ValueError("empty distribution")
    lo, hi = min(values), max(values)
    if lo == hi:
        logger.warning("degenerate share distribution (all values %.4f): single bin", lo)
        return (round(lo, 2), round(lo, 2))
    span = hi - lo
    return (round(lo + span / 3.0, 2), round(lo + 2.0 * span / 3.0, 2))


def _bin_one(share: float, cuts: tuple[float, float]) -> int:
    t1, t2 = cuts
    if share < t1:
        return 1
    if share < t2:
        return 2
    return 3


def bin_profile(profile: GroupProfile, thresholds: ClassThresholds) -> tuple[int, int, int]:
    """Class labels (influential, cooperative, selfish), each in {1, 2, 3}."""
    return (
        _bin_one(profile.share_influential, thresholds.influential),
        _bin_one(profile.share_cooperative, thresholds.cooperative),
        _bin_one(profile.share_selfish, thresholds.selfish),
    )


def _intra_pairs(graph: InteractionGraph, member_set: frozenset[str]) -> tuple[int, int]:
    directed = 0
    undirected: set[frozenset[str]] = set()
    for (u, v) in graph.edges:
        if u in member_set and v in member_set:
            directed += 1
            undirected.add(frozenset((u, v)))
    return directed, len(undirected)


def density(graph: InteractionGraph, members: Iterable[str], mode: str = "directed") -> float:
    """Intra-group edge density on the slot graph.

    Directed by default: present ordered pairs over n(n-1). The undirected
    variant counts unordered pairs over n(n-1)/2.
    """
    member_set = frozenset(members)
    n = len(member_set)
    if n < 2:
        raise ValueError("density needs at least 2 members")
    directed, undirected = _intra_pairs(graph, member_set)
    if mode == "directed":
        return directed / (n * (n - 1))
    if mode == "undirected":
        return undirected / (n * (n - 1) / 2)
    raise ValueError(f"unknown density mode {mode!r}")


def cohesion(graph: InteractionGraph, members: Iterable[str]) -> float:
    """Mean intra-group degree on the symmetrized graph: 2*edges/n."""
    member_set = frozenset(members)
    n = len(member_set)
    if n < 2:
        raise ValueError("cohesion needs at least 2 members")
    _, undirected = _intra_pairs(graph, member_set)
    return 2.0 * undirected / n


def size_bucket(size: int) -> str:
    if size == SMALL_GROUP_SIZE:
        return "small"
    if LARGE_GROUP_MIN <= size <= LARGE_GROUP_MAX:
        return "large"
    return "other"


@dataclass(frozen=True)
class ClassedGroup:
    """One group occurrence after binning, ready for class aggregation."""

    bucket: str
    scope: str
    labels: tuple[int, int, int]
    density: float
    cohesion: float


def aggregate_classes(entries: Iterable[ClassedGroup]) -> list[dict]:
    """Collapse binned occurrences into one row per (bucket, scope, class)."""
    grouped: dict[tuple, list[ClassedGroup]] = {}
    for e in entries:
        grouped.setdefault((e.bucket, e.scope, e.labels), []).append(e)
    rows = []
    for (bucket, scope, labels), group in sorted(grouped.items()):
        rows.append(
            {
                "bucket": bucket,
                "scope": scope,
                "i_label": labels[0],
                "c_label": labels[1],
                "s_label": labels[2],
                "count": len(group),
                "mean_density": mean(e.density for e in group),
                "mean_cohesion": mean(e.cohesion for e in group),
            }
        )
    return rows


def write_class_table_csv(rows: Sequence[dict], path: Path | str) -> int:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["bucket", "scope", "i_label", "c_label", "s_label", "count", "mean_density", "mean_cohesion"]
        )
        for r in rows:
            writer.writerow(
                [
                    r["bucket"],
                    r["scope"],
                    r["i_label"],
                    r["c_label"],
                    r["s_label"],
                    r["count"],
                    format(r["mean_density"], ".6g"),
                    format(r["mean_cohesion"], ".6g"),
                ]
            )
    return len(rows)
