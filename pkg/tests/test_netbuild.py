from __future__ import annotations

from datetime import timedelta

from blogroles.netbuild import (
    build_slot_graph,
    read_edges_csv,
    resolve_comment_target,
    resolve_corpus,
    write_edges_csv,
)
from blogroles.timeslice import SlotConfig, enumerate_slots

from conftest import T0, corpus_of, make_comment, make_post

FULL_ONLY = SlotConfig(7, 4, include_trailing_partial=False)


def slot_for(corpus, days=7):
    return enumerate_slots(T0, T0 + timedelta(days=days), FULL_ONLY)[0]


class TestResolveTarget:
    def test_fallback_to_post_author(self):
        post = make_post("p1", "bob")
        c = make_comment("c1", "p1", "anna", seconds=10)
        assert resolve_comment_target(c, [c], post) == "bob"

    def test_marker_to_earlier_commenter(self):
        post = make_post("p1", "bob")
        earlier = make_comment("c1", "p1", "anna", seconds=10)
        reply = make_comment("c2", "p1", "carl", seconds=20, title="@anna nice")
        assert resolve_comment_target(reply, [earlier, reply], post) == "anna"

    def test_marker_to_later_commenter_falls_back(self):
        post = make_post("p1", "bob")
        reply = make_comment("c1", "p1", "carl", seconds=10, title="@anna nice")
        later = make_comment("c2", "p1", "anna", seconds=20)
        assert resolve_comment_target(reply, [reply, later], post) == "bob"

    def test_own_post_self_target(self):
        post = make_post("p1", "bob")
        c = make_comment("c1", "p1", "bob", seconds=10)
        assert resolve_comment_target(c, [c], post) == "bob"


def test_weighted_aggregation():
    corpus = corpus_of(
        [make_post("p1", "u2")],
        [make_comment(f"c{i}", "p1", "u1", seconds=10 + i) for i in range(3)],
    )
    g = build_slot_graph(corpus, slot_for(corpus))
    assert g.edges == {("u1", "u2"): 3}
    assert g.nodes == {"u1", "u2"}


def test_empty_slot():
    corpus = corpus_of([make_post("p1", "a", day=20)], [])
    g = build_slot_graph(corpus, slot_for(corpus))
    assert g.nodes == frozenset()
    assert g.edges == {}


def test_two_rule_fixture(tiny_corpus):
    g = build_slot_graph(tiny_corpus, slot_for(tiny_corpus))
    assert g.edges == {("u1", "u2"): 2, ("u2", "u1"): 1}


def test_self_loops_suppressed_but_counted():
    corpus = corpus_of(
        [make_post("p1", "a")],
        [
            make_comment("c1", "p1", "a", seconds=10),
            make_comment("c2", "p1", "b", seconds=20),
        ],
    )
    g = build_slot_graph(corpus, slot_for(corpus))
    assert g.self_loops == 1
    assert g.edges == {("b", "a"): 1}
    # Weight sum + self-loops account for every comment in the slot.
    assert sum(g.edges.values()) + g.self_loops == g.n_comments == 2


def test_comment_on_old_post_still_produces_edge():
    corpus = corpus_of(
        [make_post("p1", "a", day=0)],
        [make_comment("c1", "p1", "b", day=10)],
    )
    slots = enumerate_slots(T0, T0 + timedelta(days=14), FULL_ONLY)
    late = slots[1]  # [4, 11): contains the comment, not the post
    g = build_slot_graph(corpus, late)
    assert g.posts_in_slot == ()
    assert g.edges == {("b", "a"): 1}


def test_removing_one_comment_decrements_one_edge():
    posts = [make_post("p1", "a")]
    comments = [
        make_comment("c1", "p1", "b", seconds=10),
        make_comment("c2", "p1", "b", seconds=20),
        make_comment("c3", "p1", "c", seconds=30),
    ]
    corpus = corpus_of(posts, comments)
    reduced = corpus_of(posts, comments[:-1])
    g_full = build_slot_graph(corpus, slot_for(corpus))
    g_red = build_slot_graph(reduced, slot_for(reduced))
    diff = {
        e: g_full.edges.get(e, 0) - g_red.edges.get(e, 0)
        for e in set(g_full.edges) | set(g_red.edges)
    }
    changed = {e: d for e, d in diff.items() if d}
    assert changed == {("c", "a"): 1}


def test_deterministic_build(tiny_corpus):
    slot = slot_for(tiny_corpus)
    a = build_slot_graph(tiny_corpus, slot)
    b = build_slot_graph(tiny_corpus, slot)
    assert a.edges == b.edges and a.nodes == b.nodes


def test_resolution_cache_matches_per_comment_resolution(tiny_corpus):
    res = resolve_corpus(tiny_corpus)
    for pid, thread in tiny_corpus.comments_by_post.items():
        post = tiny_corpus.posts[pid]
        for c in thread:
            assert res[c.comment_id][0] == resolve_comment_target(c, list(thread), post)


def test_edges_csv_round_trip(tmp_path, tiny_corpus):
    g = build_slot_graph(tiny_corpus, slot_for(tiny_corpus))
    path = tmp_path / "edges.csv"
    write_edges_csv([g], path)
    assert read_edges_csv(path) == {0: g.edges}
