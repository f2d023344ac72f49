from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from blogroles.ingest import Comment, Corpus, Post

T0 = datetime(2021, 3, 1, tzinfo=timezone.utc)


def at(day: float = 0, seconds: int = 0) -> datetime:
    return T0 + timedelta(days=day, seconds=seconds)


def make_post(pid: str, author: str, day: float = 0, seconds: int = 0, title: str = "") -> Post:
    return Post(pid, author, at(day, seconds), title)


def make_comment(
    cid: str, pid: str, author: str, day: float = 0, seconds: int = 0, title: str = ""
) -> Comment:
    return Comment(cid, pid, author, at(day, seconds), title)


def corpus_of(posts, comments) -> Corpus:
    return Corpus.build(posts, comments)


@pytest.fixture
def tiny_corpus() -> Corpus:
    """One thread: u2 posts, u1 comments twice, u2 replies to u1 by marker."""
    posts = [make_post("p1", "u2", day=0, seconds=0)]
    comments = [
        make_comment("c1", "p1", "u1", day=0, seconds=10),
        make_comment("c2", "p1", "u1", day=0, seconds=20),
        make_comment("c3", "p1", "u2", day=0, seconds=30, title="@u1 thanks"),
    ]
    return corpus_of(posts, comments)


def users(lo: int, hi: int) -> frozenset[str]:
    return frozenset(f"u{i:02d}" for i in range(lo, hi))


def sgci_script() -> tuple[list[list[frozenset[str]]], dict]:
    """Ten-slot community script: one persistent group, one 2-slot group,
    one merge, one split. Returns (communities per slot, expected facts)."""
    P = users(1, 7)            # slots 0..9
    S = users(10, 16)          # slots 2..3 only
    M1, M2 = users(20, 26), users(26, 32)   # slot 5, merging at 6
    M = M1 | M2                # slot 6 only
    Q = users(40, 50)          # slot 7, splitting at 8
    Q1, Q2 = users(40, 45), users(45, 50)   # slot 8 only

    communities: list[list[frozenset[str]]] = [[] for _ in range(10)]
    for t in range(10):
        communities[t].append(P)
    communities[2].append(S)
    communities[3].append(S)
    communities[5].extend([M1, M2])
    communities[6].append(M)
    communities[7].append(Q)
    communities[8].extend([Q1, Q2])

    expected = {
        "persistent_members": P,
        "persistent_lifespan": 10,
        "event_counts": {
            "continuation": 10,  # P: 9 transitions, S: 1
            "growth": 0,
            "shrink": 0,
            "merge": 1,          # M1 + M2 -> M at 5 -> 6
            "split": 1,          # Q -> Q1 + Q2 at 7 -> 8
            "form": 4,           # S, M1, M2, Q
            "dissolve": 4,       # S, M, Q1, Q2
        },
    }
    return communities, expected
