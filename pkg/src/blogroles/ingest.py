"""Corpus loading, validation, and serialization.

Input is a pair of CSV files:

    posts.csv:    post_id,author_id,timestamp,title
    comments.csv: comment_id,post_id,author_id,timestamp,title

Timestamps are ISO-8601 and interpreted as UTC (naive values are assumed
UTC). Parsing drops comments whose parent post is missing (they cannot
produce interactions) and keeps comments timestamped before their parent
post (clock skew is common in real exports); both situations are tallied
in the load report. The parsed corpus is immutable and indexed, so it can
be shared freely across concurrent per-slot workers.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

logger = logging.getLogger(__name__)

POSTS_HEADER = ("post_id", "author_id", "timestamp", "title")
COMMENTS_HEADER = ("comment_id", "post_id", "author_id", "timestamp", "title")

# Parsing aborts when more than this fraction of a file's data rows is malformed.
MAX_MALFORMED_FRACTION = 0.10


class CorpusError(Exception):
    """An input file is unusable: unreadable, bad header, or too many bad rows."""


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime."""
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Post:
    post_id: str
    author: str
    timestamp: datetime
    title: str = ""


@dataclass(frozen=True)
class Comment:
    comment_id: str
    post_id: str
    author: str
    timestamp: datetime
    title: str = ""


@dataclass
class LoadReport:
    posts_read: int = 0
    comments_read: int = 0
    orphans_dropped: int = 0
    malformed_rows: int = 0
    early_comments: int = 0

    def to_dict(self) -> dict:
        return {
            "posts_read": self.posts_read,
            "comments_read": self.comments_read,
            "orphans_dropped": self.orphans_dropped,
            "malformed_rows": self.malformed_rows,
            "early_comments": self.early_comments,
        }

    def write(self, path: Path | str) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


@dataclass
class Corpus:
    """Validated posts and comments plus lookup indexes.

    ``comments`` is canonically sorted by (timestamp, comment_id); the same
    ordering is used for thread reconstruction, so reply resolution is
    deterministic. ``load_report`` is carried along for provenance but does
    not take part in equality.
    """

    posts: dict[str, Post]
    comments: tuple[Comment, ...]
    users: frozenset[str]
    date_range: tuple[datetime, datetime] | None
    load_report: LoadReport | None = field(default=None, compare=False)

    comments_by_post: dict[str, tuple[Comment, ...]] = field(
        init=False, repr=False, compare=False
    )
    posts_sorted: tuple[Post, ...] = field(init=False, repr=False, compare=False)
    _post_times: list[datetime] = field(init=False, repr=False, compare=False)
    _comment_times: list[datetime] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_post: dict[str, list[Comment]] = {}
        for c in self.comments:
            by_post.setdefault(c.post_id, []).append(c)
        self.comments_by_post = {pid: tuple(cs) for pid, cs in by_post.items()}
        self.posts_sorted = tuple(
            sorted(self.posts.values(), key=lambda p: (p.timestamp, p.post_id))
        )
        self._post_times = [p.timestamp for p in self.posts_sorted]
        self._comment_times = [c.timestamp for c in self.comments]

    @classmethod
    def build(
        cls,
        posts: Iterable[Post],
        comments: Iterable[Comment],
        load_report: LoadReport | None = None,
    ) -> "Corpus":
        post_map: dict[str, Post] = {}
        for p in sorted(posts, key=lambda p: (p.timestamp, p.post_id)):
            if p.post_id in post_map:
                raise ValueError(f"duplicate post_id {p.post_id!r}")
            post_map[p.post_id] = p
        ordered = tuple(sorted(comments, key=lambda c: (c.timestamp, c.comment_id)))
        seen: set[str] = set()
        for c in ordered:
            if c.comment_id in seen:
                raise ValueError(f"duplicate comment_id {c.comment_id!r}")
            seen.add(c.comment_id)
            if c.post_id not in post_map:
                raise ValueError(
                    f"comment {c.comment_id!r} references missing post {c.post_id!r}"
                )
        users = frozenset(p.author for p in post_map.values()) | frozenset(
            c.author for c in ordered
        )
        times = [p.timestamp for p in post_map.values()] + [c.timestamp for c in ordered]
        date_range = (min(times), max(times)) if times else None
        return cls(post_map, ordered, users, date_range, load_report)

    @property
    def n_posts(self) -> int:
        return len(self.posts)

    @property
    def n_comments(self) -> int:
        return len(self.comments)


def _read_rows(path: Path | str, expected_header: tuple[str, ...]) -> list[dict]:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise CorpusError(f"{path}: empty file, expected header {expected_header}")
            if tuple(reader.fieldnames) != expected_header:
                raise CorpusError(
                    f"{path}: malformed header {reader.fieldnames}, expected {list(expected_header)}"
                )
            return list(reader)
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc


def parse_corpus(posts_path: Path | str, comments_path: Path | str) -> Corpus:
    """Parse and validate a corpus from the two CSV inputs.

    Row-level problems (missing fields, bad timestamps, duplicate ids) are
    collected rather than fatal; parsing aborts only when a file exceeds
    MAX_MALFORMED_FRACTION of bad rows. Orphan comments are dropped and
    counted. The returned corpus carries the load report.
    """
    report = LoadReport()

    post_rows = _read_rows(posts_path, POSTS_HEADER)
    report.posts_read = len(post_rows)
    posts: dict[str, Post] = {}
    bad = 0
    for row in post_rows:
        try:
            pid = (row["post_id"] or "").strip()
            author = (row["author_id"] or "").strip()
            if not pid or not author or pid in posts:
                raise ValueError("bad or duplicate id")
            posts[pid] = Post(pid, author, parse_timestamp(row["timestamp"]), row["title"] or "")
        except (ValueError, TypeError, KeyError):
            bad += 1
    if post_rows and bad / len(post_rows) > MAX_MALFORMED_FRACTION:
        raise CorpusError(f"{posts_path}: {bad}/{len(post_rows)} malformed rows")
    report.malformed_rows += bad

    comment_rows = _read_rows(comments_path, COMMENTS_HEADER)
    report.comments_read = len(comment_rows)
    comments: list[Comment] = []
    seen_ids: set[str] = set()
    bad = 0
    for row in comment_rows:
        try:
            cid = (row["comment_id"] or "").strip()
            pid = (row["post_id"] or "").strip()
            author = (row["author_id"] or "").strip()
            if not cid or not pid or not author or cid in seen_ids:
                raise ValueError("bad or duplicate id")
            ts = parse_timestamp(row["timestamp"])
        except (ValueError, TypeError, KeyError):
            bad += 1
            continue
        seen_ids.add(cid)
        parent = posts.get(pid)
        if parent is None:
            report.orphans_dropped += 1
            continue
        if ts < parent.timestamp:
            report.early_comments += 1
        comments.append(Comment(cid, pid, author, ts, row["title"] or ""))
    if comment_rows and bad / len(comment_rows) > MAX_MALFORMED_FRACTION:
        raise CorpusError(f"{comments_path}: {bad}/{len(comment_rows)} malformed rows")
    report.malformed_rows += bad

    if report.orphans_dropped:
        logger.warning("dropped %d orphan comments", report.orphans_dropped)
    if report.early_comments:
        logger.warning(
            "kept %d comments timestamped before their parent post", report.early_comments
        )
    return Corpus.build(posts.values(), comments, report)


def write_corpus(corpus: Corpus, posts_path: Path | str, comments_path: Path | str) -> None:
    """Serialize a corpus back to the CSV schema parse_corpus consumes."""
    with Path(posts_path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(POSTS_HEADER)
        for p in corpus.posts_sorted:
            writer.writerow([p.post_id, p.author, format_timestamp(p.timestamp), p.title])
    with Path(comments_path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(COMMENTS_HEADER)
        for c in corpus.comments:
            writer.writerow(
                [c.comment_id, c.post_id, c.author, format_timestamp(c.timestamp), c.title]
            )


def extract_reply_marker(comment_title: str, thread_authors: Iterable[str]) -> str | None:
    """Resolve an '@name' prefix in a comment title against thread participants.

    Matching is case-insensitive and prefers the longest matching author name
    (names may contain spaces, so a plain token split would be ambiguous).
    Returns None when the title has no marker or the marker matches nobody.
    """
    if not comment_title or not comment_title.startswith("@"):
        return None
    rest = comment_title[1:].lower()
    best: str | None = None
    for name in thread_authors:
        if name and rest.startswith(name.lower()):
            if best is None or len(name) > len(best) or (len(name) == len(best) and name < best):
                best = name
    return best
