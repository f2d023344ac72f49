"""Per-slot directed interaction graphs under the comments model.

Every comment induces one directed relation from its author to a target:
the author named by a leading '@' marker when that author already took part
in the thread (earlier commenters plus the post author), otherwise the post
author. Relations aggregate into weighted edges; self-loops are dropped
from the graph but the underlying comments stay in the activity
back-references because the role metrics need own-comment counts.

A comment whose parent post lies outside the slot still produces an edge
when the comment itself falls inside the slot — late responses to old
posts are real interactions; the post itself belongs only to its own
slot(s).
"""
from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .ingest import Comment, Corpus, Post, extract_reply_marker
from .timeslice import TimeSlot, events_in_slot


@dataclass(frozen=True)
class ResolvedComment:
    comment: Comment
    target: str
    explicit: bool    # True when an '@' marker picked the target
    own_thread: bool  # comment sits under the author's own post


@dataclass
class InteractionGraph:
    slot: TimeSlot
    nodes: frozenset[str]
    edges: dict[tuple[str, str], int]
    self_loops: int
    posts_in_slot: tuple[Post, ...]
    resolved: tuple[ResolvedComment, ...]

    posts_by_author: dict[str, list[Post]] = field(init=False, repr=False)
    comments_by_post: dict[str, list[Comment]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.posts_by_author = {}
        for p in self.posts_in_slot:
            self.posts_by_author.setdefault(p.author, []).append(p)
        self.comments_by_post = {}
        for rc in self.resolved:
            self.comments_by_post.setdefault(rc.comment.post_id, []).append(rc.comment)

    @property
    def n_comments(self) -> int:
        return len(self.resolved)


def resolve_comment_target(comment: Comment, thread: list[Comment], post: Post) -> str:
    """Resolve one comment's target against its thread.

    ``thread`` holds the comments of the same post; only authors strictly
    earlier than this comment (by timestamp, then id) plus the post author
    are marker candidates. Falls back to the post author.
    """
    key = (comment.timestamp, comment.comment_id)
    candidates = {post.author}
    candidates.update(
        c.author for c in thread if (c.timestamp, c.comment_id) < key
    )
    marker = extract_reply_marker(comment.title, candidates)
    return marker if marker is not None else post.author


def resolve_corpus(corpus: Corpus) -> dict[str, tuple[str, bool]]:
    """Resolve every comment once: comment_id -> (target, explicit).

    Resolution is a thread-level property independent of slotting, so the
    result is shared by all per-slot graph builds.
    """
    out: dict[str, tuple[str, bool]] = {}
    for post_id, thread in corpus.comments_by_post.items():
        post = corpus.posts[post_id]
        seen = {post.author}
        for c in thread:  # thread is already (timestamp, id)-sorted
            marker = extract_reply_marker(c.title, seen)
            out[c.comment_id] = (marker, True) if marker is not None else (post.author, False)
            seen.add(c.author)
    return out


def build_slot_graph(
    corpus: Corpus,
    slot: TimeSlot,
    resolution: dict[str, tuple[str, bool]] | None = None,
) -> InteractionGraph:
    """Build the directed weighted interaction graph for one slot."""
    if resolution is None:
        resolution = resolve_corpus(corpus)
    posts_in, comments_in = events_in_slot(corpus, slot)
    edges: Counter[tuple[str, str]] = Counter()
    resolved: list[ResolvedComment] = []
    self_loops = 0
    for c in comments_in:
        target, explicit = resolution[c.comment_id]
        own = corpus.posts[c.post_id].author == c.author
        resolved.append(ResolvedComment(c, target, explicit, own))
        if target == c.author:
            self_loops += 1
        else:
            edges[(c.author, target)] += 1
    nodes = frozenset(u for e in edges for u in e)
    return InteractionGraph(
        slot=slot,
        nodes=nodes,
        edges=dict(sorted(edges.items())),
        self_loops=self_loops,
        posts_in_slot=tuple(posts_in),
        resolved=tuple(resolved),
    )


def write_edges_csv(graphs: list[InteractionGraph], path: Path | str) -> int:
    rows = 0
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slot_index", "source", "target", "weight"])
        for g in graphs:
            for (src, dst), w in g.edges.items():
                writer.writerow([g.slot.index, src, dst, w])
                rows += 1
    return rows


def read_edges_csv(path: Path | str) -> dict[int, dict[tuple[str, str], int]]:
    """Read an edge-list export back into per-slot edge maps."""
    per_slot: dict[int, dict[tuple[str, str], int]] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            slot = int(row["slot_index"])
            per_slot.setdefault(slot, {})[(row["source"], row["target"])] = int(row["weight"])
    return per_slot
