"""Synthetic corpora with planted roles and planted group structure.

The generator lays out activity so that each analysis window sees a fixed,
per-slot bundle of events: all events for slot k land on one day covered
by slot k alone (day 0 for the first slot, day ``4k + 3`` for the rest
under the default 7-day window and 4-day step), so overlapping windows
never mix bundles and per-slot statistics are exactly controllable. This
requires ``window < 2 * step``. Starting the first bundle on day 0 also
pins the corpus date range to the slot grid origin, so the analysis
pipeline reproduces the generator's slotting without explicit dates.

Each planted archetype has an activity recipe (posts written, responses
each post draws, comments written, own-comment fraction, explicit replies
drawn). Before any events are emitted the expected per-slot statistics are
audited: every threshold comparison on the plant's classification path
must clear its cut-off by at least 20 percent, otherwise generation fails
naming the archetype. A crowd of background users supplies responses and
replies; crowd members never interact with each other, so they cannot form
cliques that would pollute planted communities.

Two modes: ``deterministic`` emits exact counts (used for exact-recovery
tests); ``stochastic`` draws counts from Poisson with the same means.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .ingest import Comment, Corpus, Post, write_corpus
from .roles import ActivityStats, Role, RoleParams, classify

DEFAULT_START = datetime(2020, 1, 6, tzinfo=timezone.utc)
MARGIN = 0.2


class ScenarioError(Exception):
    """The scenario is infeasible or inconsistent."""


@dataclass(frozen=True)
class PlantSpec:
    """One planted archetype and its activity intensities.

    Rates are per day; a slot's counts are ``round(rate * window_days)``.
    ``responses_per_post`` is the number of plain crowd comments each post
    draws; ``replies_per_day`` the number of '@'-targeted crowd replies to
    the plant's comments.
    """

    archetype: Role
    count: int = 1
    posts_per_day: float = 0.0
    comments_per_day: float = 0.0
    own_comment_fraction: float = 0.0
    responses_per_post: float = 0.0
    replies_per_day: float = 0.0


@dataclass(frozen=True)
class CommunitySpec:
    """A planted group living from birth_slot to death_slot (inclusive).

    ``intra_rate`` is comments per member per day aimed at fellow members;
    the deterministic default of (size-1)/window makes every member comment
    on every other member once per slot, i.e. a complete digraph. A split
    divides the members into two halves from ``split_at`` on; a merge fuses
    this community with ``merge_with`` from ``merge_at`` on.
    """

    size: int
    intra_rate: float | None = None
    inter_rate: float = 0.0
    birth_slot: int = 0
    death_slot: int | None = None
    split_at: int | None = None
    merge_with: int | None = None
    merge_at: int | None = None


@dataclass(frozen=True)
class ScenarioSpec:
    n_users: int
    duration_days: int
    plants: tuple[PlantSpec, ...] = ()
    communities: tuple[CommunitySpec, ...] = ()
    seed: int = 0
    mode: str = "deterministic"
    window_days: int = 7
    step_days: int = 4
    start: datetime = DEFAULT_START


@dataclass
class GroundTruth:
    archetypes: dict[str, str]
    communities: list[dict]
    n_slots: int
    window_days: int
    step_days: int
    start: str

    def to_dict(self) -> dict:
        return {
            "archetypes": self.archetypes,
            "communities": self.communities,
            "n_slots": self.n_slots,
            "window_days": self.window_days,
            "step_days": self.step_days,
            "start": self.start,
        }

    def write(self, path: Path | str) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


# Per-slot activity targets that put each archetype deep inside its
# classification region under the default global parameters.
_RECIPES: dict[Role, dict[str, float]] = {
    Role.INFLUENTIAL_USER_SELFISH: dict(posts=1, responses=130, comments=40, own=1.0, replies=70),
    Role.INFLUENTIAL_USER_SOCIAL: dict(posts=1, responses=130, comments=40, own=0.25, replies=70),
    Role.INFLUENTIAL_BLOGGER_SELFISH: dict(posts=1, responses=130, comments=12, own=1.0, replies=0),
    Role.INFLUENTIAL_BLOGGER_SOCIAL: dict(posts=1, responses=130, comments=12, own=0.17, replies=0),
    Role.INFLUENTIAL_COMMENTATOR: dict(posts=0, responses=0, comments=40, own=0.0, replies=70),
    Role.STANDARD_COMMENTATOR: dict(posts=0, responses=0, comments=28, own=0.0, replies=0),
    Role.NOT_ACTIVE: dict(posts=0, responses=0, comments=1, own=0.0, replies=0),
    Role.STANDARD_BLOGGER: dict(posts=0, responses=0, comments=4, own=0.0, replies=0),
}


def default_plant(archetype: Role, count: int = 1, window_days: int = 7) -> PlantSpec:
    """The canonical recipe for an archetype, expressed as per-day rates."""
    r = _RECIPES[archetype]
    return PlantSpec(
        archetype=archetype,
        count=count,
        posts_per_day=r["posts"] / window_days,
        comments_per_day=r["comments"] / window_days,
        own_comment_fraction=r["own"],
        responses_per_post=r["responses"],
        replies_per_day=r["replies"] / window_days,
    )


def demo_scenario(seed: int = 7) -> ScenarioSpec:
    """40 users, one plant per archetype, two 6-member groups, 12 slots."""
    return ScenarioSpec(
        n_users=40,
        duration_days=51,  # 12 full 7-day windows at a 4-day step
        plants=tuple(default_plant(role) for role in Role),
        communities=(CommunitySpec(size=6), CommunitySpec(size=6)),
        seed=seed,
        mode="deterministic",
    )


def plausibility_scenario(seed: int = 11) -> ScenarioSpec:
    """Stochastic scenario with one small (9) and one large (200) group."""
    return ScenarioSpec(
        n_users=215,
        duration_days=23,  # 5 slots
        plants=(),
        communities=(
            CommunitySpec(size=9, intra_rate=6 / 7),
            CommunitySpec(size=200, intra_rate=3 / 7),
        ),
        seed=seed,
        mode="stochastic",
    )


def _slot_count(rate_per_day: float, window_days: int) -> int:
    return int(round(rate_per_day * window_days))


def _clear(value: float, threshold: float) -> bool:
    if threshold <= 0:
        return True
    return value >= (1 + MARGIN) * threshold or value <= (1 - MARGIN) * threshold


def expected_plant_stats(plant: PlantSpec, window_days: int) -> ActivityStats:
    """Expected per-slot activity statistics for one plant."""
    posts_n = _slot_count(plant.posts_per_day, window_days)
    comments_n = _slot_count(plant.comments_per_day, window_days)
    own_n = int(round(plant.own_comment_fraction * comments_n))
    replies_n = _slot_count(plant.replies_per_day, window_days)
    responses_n = int(round(plant.responses_per_post))
    # Replies land in the threads holding the plant's comments; when all of
    # those are the plant's own thread they add to its post responses.
    replies_in_own = replies_n if comments_n - own_n == 0 else 0
    prs: list[int] = []
    if posts_n:
        prs = [responses_n + replies_in_own] + [responses_n] * (posts_n - 1)
    return ActivityStats(
        user="<expected>",
        scope="global",
        post_responses=tuple(prs),
        n_comments=comments_n,
        comment_response=replies_n,
        own_comments=own_n,
    )


def audit_plant(plant: PlantSpec, window_days: int, params: RoleParams) -> list[str]:
    """Margin problems for one plant; empty when the recipe is feasible.

    Every metric-level comparison feeding the influence scores must be
    decisive by MARGIN on either side of its threshold, so the integer
    scores cannot flip under a 20 percent perturbation; count thresholds
    are audited only as far down the decision list as the plant's role.
    """
    stats = expected_plant_stats(plant, window_days)
    role = classify(stats, params)
    problems = []
    if role is not plant.archetype:
        problems.append(f"expected stats classify as {role.value}")

    checks: list[tuple[str, float, float]] = []
    for pr in stats.post_responses:
        for name in ("a_p", "b_p", "c_p", "d_p", "e_p"):
            checks.append((f"pr={pr} vs {name}", pr, getattr(params, name)))
    ratio = stats.comment_response / stats.n_comments if stats.n_comments else 0.0
    for name in ("a_c", "b_c", "c_c"):
        checks.append((f"comRatio={ratio:.3g} vs {name}", ratio, getattr(params, name)))
    for name in ("d_c", "e_c", "f_c"):
        checks.append(
            (f"cr={stats.comment_response} vs {name}", stats.comment_response, getattr(params, name))
        )
    ego = stats.own_comments / stats.n_comments if stats.n_comments else 0.0
    checks.append((f"comEgo={ego:.3g} vs ego_threshold", ego, params.ego_threshold))
    count_roles = (Role.STANDARD_COMMENTATOR, Role.NOT_ACTIVE, Role.STANDARD_BLOGGER)
    if plant.archetype in count_roles:
        checks.append(("comments vs commentator_min", stats.n_comments, params.commentator_min_comments))
        checks.append(("posts vs commentator_max", stats.n_posts, params.commentator_max_posts))
    if plant.archetype in (Role.NOT_ACTIVE, Role.STANDARD_BLOGGER):
        checks.append(("posts vs notactive_max_posts", stats.n_posts, params.notactive_max_posts))
        checks.append(("comments vs notactive_max_comments", stats.n_comments, params.notactive_max_comments))

    problems.extend(
        f"{label} (threshold {threshold:g}) not cleared by {MARGIN:.0%}"
        for label, value, threshold in checks
        if not _clear(value, threshold)
    )
    return problems


def _validate(spec: ScenarioSpec) -> None:
    if spec.mode not in ("deterministic", "stochastic"):
        raise ScenarioError(f"unknown mode {spec.mode!r}")
    if spec.duration_days < spec.window_days:
        raise ScenarioError("duration shorter than one window")
    if not spec.window_days < 2 * spec.step_days:
        raise ScenarioError("need window_days < 2*step_days for slot-exclusive anchor days")
    for plant in spec.plants:
        for name in ("posts_per_day", "comments_per_day", "responses_per_post", "replies_per_day"):
            if getattr(plant, name) < 0:
                raise ScenarioError(f"{plant.archetype.value}: negative {name}")
        if not 0 <= plant.own_comment_fraction <= 1:
            raise ScenarioError(f"{plant.archetype.value}: own_comment_fraction outside [0,1]")
    n_slots = (spec.duration_days - spec.window_days) // spec.step_days + 1
    for idx, c in enumerate(spec.communities):
        if c.size < 1 or (c.intra_rate is not None and c.intra_rate < 0) or c.inter_rate < 0:
            raise ScenarioError(f"community {idx}: bad size or rate")
        death = c.death_slot if c.death_slot is not None else n_slots - 1
        if not 0 <= c.birth_slot <= death < n_slots:
            raise ScenarioError(f"community {idx}: bad lifespan {c.birth_slot}..{death}")
        if c.merge_with is not None:
            if c.merge_at is None or not 0 <= c.merge_with < len(spec.communities) or c.merge_with == idx:
                raise ScenarioError(f"community {idx}: bad merge target")
        if c.split_at is not None and c.size < 2:
            raise ScenarioError(f"community {idx}: cannot split a singleton")


@dataclass
class _Emitter:
    """Event sink with per-day second ticks and monotone ids."""

    posts: list[Post] = field(default_factory=list)
    comments: list[Comment] = field(default_factory=list)
    _post_seq: int = 0
    _comment_seq: int = 0
    _tick: int = 0
    _day: datetime = DEFAULT_START

    def start_day(self, day: datetime) -> None:
        self._day = day
        self._tick = 0

    def _next_instant(self) -> datetime:
        instant = self._day + timedelta(seconds=self._tick)
        self._tick += 1
        return instant

    def post(self, author: str, title: str = "") -> Post:
        self._post_seq += 1
        p = Post(f"p{self._post_seq:06d}", author, self._next_instant(), title)
        self.posts.append(p)
        return p

    def comment(self, author: str, post: Post, title: str = "") -> Comment:
        self._comment_seq += 1
        c = Comment(f"c{self._comment_seq:07d}", post.post_id, author, self._next_instant(), title)
        self.comments.append(c)
        return c


def _community_cells(
    spec: ScenarioSpec, members_per_community: list[list[str]], slot: int, n_slots: int
) -> list[tuple[str, list[str]]]:
    """Active (cell_id, members) groups for one slot, after splits/merges."""
    cells: list[tuple[str, list[str]]] = []
    consumed: set[int] = set()
    for idx, c in enumerate(spec.communities):
        if idx in consumed:
            continue
        death = c.death_slot if c.death_slot is not None else n_slots - 1
        if not c.birth_slot <= slot <= death:
            continue
        members = members_per_community[idx]
        if c.split_at is not None and slot >= c.split_at:
            half = len(members) // 2
            cells.append((f"c{idx}a", members[:half]))
            cells.append((f"c{idx}b", members[half:]))
        elif c.merge_at is not None and c.merge_with is not None and slot >= c.merge_at:
            other = c.merge_with
            consumed.add(other)
            cells.append((f"c{idx}+c{other}", members + members_per_community[other]))
        else:
            cells.append((f"c{idx}", members))
    return cells


def generate(spec: ScenarioSpec, params: RoleParams = RoleParams()) -> tuple[Corpus, GroundTruth]:
    """Generate a corpus and its ground truth; raises ScenarioError when infeasible."""
    _validate(spec)
    n_slots = (spec.duration_days - spec.window_days) // spec.step_days + 1
    stochastic = spec.mode == "stochastic"
    rng = np.random.default_rng(spec.seed)

    plant_users: list[tuple[str, PlantSpec]] = []
    for plant in spec.plants:
        for _ in range(plant.count):
            plant_users.append((f"plant{len(plant_users):02d}", plant))
    members_per_community: list[list[str]] = [
        [f"g{ci}m{j:02d}" for j in range(c.size)] for ci, c in enumerate(spec.communities)
    ]
    # intra_rate None means "complete digraph", resolved per active cell so
    # merged or split cells stay fully connected too.
    rates_by_member: dict[str, tuple[float | None, float]] = {}
    for ci, c in enumerate(spec.communities):
        for m in members_per_community[ci]:
            rates_by_member[m] = (c.intra_rate, c.inter_rate)
    reserved = len(plant_users) + sum(len(m) for m in members_per_community)
    if reserved > spec.n_users:
        raise ScenarioError(f"{reserved} planted users exceed n_users={spec.n_users}")
    crowd = [f"w{j:03d}" for j in range(spec.n_users - reserved)]

    for uid, plant in plant_users:
        problems = audit_plant(plant, spec.window_days, params)
        if problems:
            raise ScenarioError(f"{plant.archetype.value} ({uid}): " + "; ".join(problems))
    needs_crowd = any(
        _slot_count(p.posts_per_day, spec.window_days) > 0
        or _slot_count(p.comments_per_day, spec.window_days) > 0
        for _, p in plant_users
    )
    if needs_crowd and not crowd:
        raise ScenarioError("plants need a non-empty crowd of background users")

    def count(rate_per_slot: float) -> int:
        if stochastic:
            return int(rng.poisson(rate_per_slot))
        return int(round(rate_per_slot))

    cursor = [0]

    def pick(seq_len: int) -> int:
        if stochastic:
            return int(rng.integers(seq_len))
        cursor[0] += 1
        return (cursor[0] - 1) % seq_len

    emitter = _Emitter()
    # Slot 0 anchors on day 0 so the corpus date range starts exactly at the
    # slot grid origin; later slots use their single exclusive day.
    anchor_offset = spec.window_days - spec.step_days

    def anchor_day(k: int) -> int:
        return 0 if k == 0 else k * spec.step_days + anchor_offset

    for k in range(n_slots):
        emitter.start_day(spec.start + timedelta(days=anchor_day(k)))

        home_posts = [emitter.post(u, f"home {u} s{k}") for u in crowd]
        plant_posts: dict[str, list[Post]] = {}
        for uid, plant in plant_users:
            n = count(plant.posts_per_day * spec.window_days)
            plant_posts[uid] = [emitter.post(uid, f"{uid} post {i} s{k}") for i in range(n)]
        cells = _community_cells(spec, members_per_community, k, n_slots)
        member_posts: dict[str, Post] = {}
        for _, members in cells:
            for m in members:
                member_posts[m] = emitter.post(m, f"home {m} s{k}")

        # Plant comments: own-thread ones sit under the plant's first post,
        # the rest go to crowd home threads.
        reply_anchors: dict[str, list[Comment]] = {}
        for uid, plant in plant_users:
            n_comments = count(plant.comments_per_day * spec.window_days)
            n_own = min(n_comments, int(round(plant.own_comment_fraction * n_comments)))
            if n_own and not plant_posts[uid]:
                raise ScenarioError(f"{plant.archetype.value} ({uid}): own comments need a post")
            own_anchors = [emitter.comment(uid, plant_posts[uid][0], "note") for _ in range(n_own)]
            other_anchors = [
                emitter.comment(uid, home_posts[pick(len(home_posts))], "remark")
                for _ in range(n_comments - n_own)
            ]
            reply_anchors[uid] = other_anchors if other_anchors else own_anchors

        # Planted group chatter: members comment on each other's home posts.
        for _, members in cells:
            cell_default = (len(members) - 1) / spec.window_days
            for i, m in enumerate(members):
                intra, inter = rates_by_member[m]
                if intra is None:
                    intra = cell_default
                others = [t for t in members if t != m]
                if others:
                    for j in range(count(intra * spec.window_days)):
                        idx = pick(len(others)) if stochastic else (i + 1 + j) % len(others)
                        emitter.comment(m, member_posts[others[idx]], "chat")
                if inter and home_posts:
                    for _ in range(count(inter * spec.window_days)):
                        emitter.comment(m, home_posts[pick(len(home_posts))], "drive-by")

        # Crowd responses to plant posts, then explicit '@' replies.
        post_by_id = {p.post_id: p for p in emitter.posts}
        for uid, plant in plant_users:
            for post in plant_posts[uid]:
                for _ in range(count(plant.responses_per_post)):
                    emitter.comment(crowd[pick(len(crowd))], post, "response")
            n_replies = count(plant.replies_per_day * spec.window_days)
            anchors = reply_anchors.get(uid, [])
            if n_replies and not anchors:
                raise ScenarioError(f"{plant.archetype.value} ({uid}): replies need comments to reply to")
            for j in range(n_replies):
                anchor = anchors[j % len(anchors)]
                emitter.comment(crowd[pick(len(crowd))], post_by_id[anchor.post_id], f"@{uid} indeed")

    corpus = Corpus.build(emitter.posts, emitter.comments)

    phase_slots: dict[str, list[int]] = {}
    phase_members: dict[str, list[str]] = {}
    for k in range(n_slots):
        for cell_id, members in _community_cells(spec, members_per_community, k, n_slots):
            phase_slots.setdefault(cell_id, []).append(k)
            phase_members[cell_id] = sorted(members)
    truth = GroundTruth(
        archetypes={uid: plant.archetype.value for uid, plant in plant_users},
        communities=[
            {"id": cid, "members": phase_members[cid], "slots": phase_slots[cid]}
            for cid in sorted(phase_slots)
        ],
        n_slots=n_slots,
        window_days=spec.window_days,
        step_days=spec.step_days,
        start=spec.start.strftime("%Y-%m-%dT%H:%M:%SZ"),
    )
    return corpus, truth


def write_scenario(corpus: Corpus, truth: GroundTruth, out_dir: Path | str) -> dict[str, str]:
    """Write posts.csv / comments.csv / ground_truth.json into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_corpus(corpus, out / "posts.csv", out / "comments.csv")
    truth.write(out / "ground_truth.json")
    return {
        "posts": str(out / "posts.csv"),
        "comments": str(out / "comments.csv"),
        "ground_truth": str(out / "ground_truth.json"),
    }
