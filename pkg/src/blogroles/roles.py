"""Influence metrics and role classification.

Four per-user metrics drive the role taxonomy, computed per slot either
over the whole slot graph (global scope) or restricted to one group's
members (local scope):

* post influence — threshold-weighted count of a user's posts by how many
  responses each drew; the positive terms are cumulative, so one very
  strong post can score in several bands at once.
* comment ratio — replies drawn per comment written (0 for users without
  comments).
* comment influence — threshold-weighted indicator sum over the comment
  ratio and the absolute reply count.
* comment ego — fraction of a user's comments written under their own
  posts.

Local scope reuses the same machinery with thresholds rescaled by the
square root of the group size; the ratio cut-offs stay fixed.
"""
from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .netbuild import InteractionGraph

GLOBAL_SCOPE = "global"


class Role(str, Enum):
    INFLUENTIAL_USER_SELFISH = "influential_user_selfish"
    INFLUENTIAL_USER_SOCIAL = "influential_user_social"
    INFLUENTIAL_BLOGGER_SELFISH = "influential_blogger_selfish"
    INFLUENTIAL_BLOGGER_SOCIAL = "influential_blogger_social"
    INFLUENTIAL_COMMENTATOR = "influential_commentator"
    STANDARD_COMMENTATOR = "standard_commentator"
    NOT_ACTIVE = "not_active"
    STANDARD_BLOGGER = "standard_blogger"


@dataclass(frozen=True)
class RoleParams:
    """Thresholds for the influence metrics and the role decision list.

    Defaults are the global-scope values; ``local_params`` derives the
    group-size-scaled variant. ``influence_min_postinf`` is strict (>),
    as are both not-active bounds (<).
    """

    a_p: float = 100.0
    b_p: float = 100.0
    c_p: float = 50.0
    d_p: float = 6.0
    e_p: float = 1.0
    a_c: float = 1.25
    b_c: float = 1.0
    c_c: float = 0.75
    d_c: float = 50.0
    e_c: float = 20.0
    f_c: float = 10.0
    ego_threshold: float = 0.75
    commentator_min_comments: int = 20
    commentator_max_posts: int = 2
    influence_min_postinf: int = 2
    notactive_max_posts: int = 1
    notactive_max_comments: int = 2

    def __post_init__(self) -> None:
        for name in ("a_p", "b_p", "c_p", "d_p", "e_p", "a_c", "b_c", "c_c", "d_c", "e_c", "f_c"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0.0 <= self.ego_threshold <= 1.0:
            raise ValueError("ego_threshold must lie in [0, 1]")


def local_params(group_size: int, base: RoleParams = RoleParams()) -> RoleParams:
    """Role parameters for a group of the given size.

    Post and reply-count thresholds scale with sqrt(size); the comment
    ratio cut-offs and the activity-count bounds stay at their base values.
    """
    if group_size < 1:
        raise ValueError("group_size must be >= 1")
    root = math.sqrt(group_size)
    a_p = 10.0 * root
    d_c = 2.0 * root
    return replace(
        base,
        a_p=a_p, b_p=a_p / 2.0, c_p=a_p / 4.0, d_p=0.0, e_p=1.0,
        d_c=d_c, e_c=d_c / 2.0, f_c=d_c / 4.0,
    )


@dataclass(frozen=True)
class ActivityStats:
    """Per-user activity in one scope (whole slot or one group)."""

    user: str
    scope: str
    post_responses: tuple[int, ...]
    n_comments: int
    comment_response: int
    own_comments: int

    @property
    def n_posts(self) -> int:
        return len(self.post_responses)


def post_response(post_author: str, thread_comments: Iterable) -> int:
    """Responses a post drew: thread comments not written by the post author."""
    return sum(1 for c in thread_comments if c.author != post_author)


def post_influence(stats: ActivityStats, p: RoleParams) -> int:
    score = 0
    for pr in stats.post_responses:
        if pr >= p.a_p:
            score += 4
        if pr >= p.b_p:
            score += 2
        if pr >= p.c_p:
            score += 1
        if pr < p.d_p:
            score -= 1
        if pr < p.e_p:
            score -= 2
    return score


def comment_ratio(stats: ActivityStats) -> float:
    if stats.n_comments == 0:
        return 0.0
    return stats.comment_response / stats.n_comments


def comment_influence(stats: ActivityStats, p: RoleParams) -> int:
    ratio = comment_ratio(stats)
    cr = stats.comment_response
    score = 0
    if ratio >= p.a_c:
        score += 4
    if ratio >= p.b_c:
        score += 2
    if ratio >= p.c_c:
        score += 1
    if cr < p.d_c:
        score -= 1
    if cr < p.e_c:
        score -= 2
    if cr < p.f_c:
        score -= 4
    return score


def comment_ego(stats: ActivityStats) -> float:
    # Guarded like the comment ratio: no comments means no ego signal.
    if stats.n_comments == 0:
        return 0.0
    return stats.own_comments / stats.n_comments


def classify_metrics(
    post_inf: int,
    com_inf: int,
    com_ego: float,
    n_posts: int,
    n_comments: int,
    p: RoleParams = RoleParams(),
) -> Role:
    """Walk the role decision list; first match wins, fallback is StandardBlogger."""
    selfish = com_ego >= p.ego_threshold
    if post_inf > p.influence_min_postinf and com_inf > 0:
        return Role.INFLUENTIAL_USER_SELFISH if selfish else Role.INFLUENTIAL_USER_SOCIAL
    if post_inf > p.influence_min_postinf and com_inf <= 0:
        return Role.INFLUENTIAL_BLOGGER_SELFISH if selfish else Role.INFLUENTIAL_BLOGGER_SOCIAL
    if com_inf > 0 and post_inf <= p.influence_min_postinf:
        return Role.INFLUENTIAL_COMMENTATOR
    if n_comments >= p.commentator_min_comments and n_posts <= p.commentator_max_posts:
        return Role.STANDARD_COMMENTATOR
    if n_posts < p.notactive_max_posts and n_comments < p.notactive_max_comments:
        return Role.NOT_ACTIVE
    return Role.STANDARD_BLOGGER


def classify(stats: ActivityStats, p: RoleParams = RoleParams()) -> Role:
    return classify_metrics(
        post_influence(stats, p),
        comment_influence(stats, p),
        comment_ego(stats),
        stats.n_posts,
        stats.n_comments,
        p,
    )


@dataclass(frozen=True)
class RoleAssignment:
    user: str
    slot_index: int
    scope: str
    role: Role
    post_inf: int
    com_inf: int
    com_ratio: float
    com_ego: float


def slot_activity_stats(graph: InteractionGraph) -> dict[str, ActivityStats]:
    """Global-scope activity stats for every node of a slot graph.

    Reply counts consider only explicitly '@'-targeted comments: the plain
    fallback relation points at the post author and is already captured by
    the per-post response counts.
    """
    n_comments: Counter[str] = Counter()
    own: Counter[str] = Counter()
    cr: Counter[str] = Counter()
    for rc in graph.resolved:
        a = rc.comment.author
        n_comments[a] += 1
        if rc.own_thread:
            own[a] += 1
        if rc.explicit and rc.target != a:
            cr[rc.target] += 1

    stats: dict[str, ActivityStats] = {}
    for user in sorted(graph.nodes):
        prs = tuple(
            post_response(user, graph.comments_by_post.get(p.post_id, ()))
            for p in graph.posts_by_author.get(user, ())
        )
        stats[user] = ActivityStats(
            user=user,
            scope=GLOBAL_SCOPE,
            post_responses=prs,
            n_comments=n_comments[user],
            comment_response=cr[user],
            own_comments=own[user],
        )
    return stats


def local_stats(
    graph: InteractionGraph,
    members: Iterable[str],
    scope: str | None = None,
    count_external: bool = False,
) -> dict[str, ActivityStats]:
    """Activity stats restricted to one group's members.

    Both sides of every interaction must be group members: a member's
    comment counts only when its target is in the group, and responses or
    replies count only from fellow members. ``count_external=True`` relaxes
    the per-post response count to include outside commenters.
    """
    member_set = frozenset(members)
    missing = member_set - graph.nodes
    if missing:
        raise ValueError(f"member {sorted(missing)[0]!r} not in slot graph")
    scope = scope if scope is not None else "group"

    n_comments: Counter[str] = Counter()
    own: Counter[str] = Counter()
    cr: Counter[str] = Counter()
    for rc in graph.resolved:
        a = rc.comment.author
        if a in member_set and rc.target in member_set:
            n_comments[a] += 1
            if rc.own_thread:
                own[a] += 1
        if rc.explicit and rc.target != a and rc.target in member_set and a in member_set:
            cr[rc.target] += 1

    stats: dict[str, ActivityStats] = {}
    for user in sorted(member_set):
        prs = []
        for p in graph.posts_by_author.get(user, ()):
            thread = graph.comments_by_post.get(p.post_id, ())
            if count_external:
                prs.append(post_response(user, thread))
            else:
                prs.append(sum(1 for c in thread if c.author != user and c.author in member_set))
        stats[user] = ActivityStats(
            user=user,
            scope=scope,
            post_responses=tuple(prs),
            n_comments=n_comments[user],
            comment_response=cr[user],
            own_comments=own[user],
        )
    return stats


def assign_roles(
    stats: Mapping[str, ActivityStats],
    params: RoleParams,
    slot_index: int,
    scope: str,
) -> list[RoleAssignment]:
    out = []
    for user in sorted(stats):
        st = stats[user]
        out.append(
            RoleAssignment(
                user=user,
                slot_index=slot_index,
                scope=scope,
                role=classify(st, params),
                post_inf=post_influence(st, params),
                com_inf=comment_influence(st, params),
                com_ratio=comment_ratio(st),
                com_ego=comment_ego(st),
            )
        )
    return out


def params_from_dict(overrides: Mapping[str, object], base: RoleParams = RoleParams()) -> RoleParams:
    """Apply JSON-style overrides whose keys match RoleParams field names."""
    unknown = set(overrides) - set(RoleParams.__dataclass_fields__)
    if unknown:
        raise ValueError(f"unknown role parameter(s): {sorted(unknown)}")
    return replace(base, **overrides)  # type: ignore[arg-type]


def write_roles_csv(assignments: Iterable[RoleAssignment], path: Path | str) -> int:
    rows = 0
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["slot_index", "scope", "user_id", "role", "post_inf", "com_inf", "com_ratio", "com_ego"]
        )
        for a in assignments:
            writer.writerow(
                [
                    a.slot_index,
                    a.scope,
                    a.user,
                    a.role.value,
                    a.post_inf,
                    a.com_inf,
                    format(a.com_ratio, ".6g"),
                    format(a.com_ego, ".6g"),
                ]
            )
            rows += 1
    return rows


def read_roles_csv(path: Path | str) -> list[RoleAssignment]:
    out = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(
                RoleAssignment(
                    user=row["user_id"],
                    slot_index=int(row["slot_index"]),
                    scope=row["scope"],
                    role=Role(row["role"]),
                    post_inf=int(row["post_inf"]),
                    com_inf=int(row["com_inf"]),
                    com_ratio=float(row["com_ratio"]),
                    com_ego=float(row["com_ego"]),
                )
            )
    return out
