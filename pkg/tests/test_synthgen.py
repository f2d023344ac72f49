from __future__ import annotations

from dataclasses import replace
from datetime import timedelta

import pytest

from blogroles.communities import find_communities, symmetrize
from blogroles.ingest import parse_corpus
from blogroles.netbuild import build_slot_graph, resolve_corpus
from blogroles.roles import GLOBAL_SCOPE, Role, RoleParams, classify, slot_activity_stats
from blogroles.synthgen import (
    CommunitySpec,
    ScenarioError,
    ScenarioSpec,
    audit_plant,
    default_plant,
    demo_scenario,
    expected_plant_stats,
    generate,
    plausibility_scenario,
    write_scenario,
)
from blogroles.timeslice import SlotConfig, enumerate_slots


def slots_for(spec, corpus):
    start = spec.start
    end = start + timedelta(days=spec.duration_days)
    return enumerate_slots(start, end, SlotConfig(spec.window_days, spec.step_days, False))


def test_every_archetype_recipe_passes_audit():
    for role in Role:
        assert audit_plant(default_plant(role), 7, RoleParams()) == []


def test_expected_stats_classify_as_archetype():
    for role in Role:
        stats = expected_plant_stats(default_plant(role), 7)
        assert classify(stats, RoleParams()) is role


def test_infeasible_recipe_errors_with_archetype_name():
    # 90 responses per post sits in the ambiguous band around a_p=100.
    bad = replace(default_plant(Role.INFLUENTIAL_BLOGGER_SELFISH), responses_per_post=90)
    spec = ScenarioSpec(n_users=30, duration_days=51, plants=(bad,))
    with pytest.raises(ScenarioError, match="influential_blogger_selfish"):
        generate(spec)


def test_own_comments_without_posts_rejected():
    bad = replace(
        default_plant(Role.INFLUENTIAL_COMMENTATOR), own_comment_fraction=0.5
    )
    spec = ScenarioSpec(n_users=30, duration_days=51, plants=(bad,))
    with pytest.raises(ScenarioError):
        generate(spec)


def test_planted_users_must_fit():
    spec = ScenarioSpec(n_users=5, duration_days=51, communities=(CommunitySpec(size=6),))
    with pytest.raises(ScenarioError, match="exceed"):
        generate(spec)


def test_determinism_under_seed():
    spec = demo_scenario(seed=3)
    a, _ = generate(spec)
    b, _ = generate(spec)
    assert a == b


def test_stochastic_determinism_and_variation():
    spec = replace(plausibility_scenario(seed=5), n_users=30, duration_days=15,
                   communities=(CommunitySpec(size=9, intra_rate=6 / 7),))
    a, _ = generate(spec)
    b, _ = generate(spec)
    c, _ = generate(replace(spec, seed=6))
    assert a == b
    assert a != c


def test_single_slot_role_recovery():
    spec = replace(demo_scenario(), duration_days=7)
    corpus, truth = generate(spec)
    assert truth.n_slots == 1
    slot = slots_for(spec, corpus)[0]
    graph = build_slot_graph(corpus, slot, resolve_corpus(corpus))
    stats = slot_activity_stats(graph)
    for uid, expected_role in truth.archetypes.items():
        assert classify(stats[uid], RoleParams()).value == expected_role, uid


def test_single_slot_community_recovery():
    spec = replace(demo_scenario(), duration_days=7)
    corpus, truth = generate(spec)
    slot = slots_for(spec, corpus)[0]
    graph = build_slot_graph(corpus, slot, resolve_corpus(corpus))
    found = {frozenset(c.members) for c in find_communities(symmetrize(graph), 5)}
    planted = {frozenset(c["members"]) for c in truth.communities}
    assert found == planted


def test_split_schedule_reflected_in_ground_truth_and_graph():
    spec = ScenarioSpec(
        n_users=12,
        duration_days=23,  # 5 slots
        communities=(CommunitySpec(size=10, split_at=3),),
    )
    corpus, truth = generate(spec)
    by_id = {c["id"]: c for c in truth.communities}
    assert by_id["c0"]["slots"] == [0, 1, 2]
    assert by_id["c0a"]["slots"] == [3, 4]
    assert by_id["c0b"]["slots"] == [3, 4]
    assert len(by_id["c0a"]["members"]) == 5

    slots = slots_for(spec, corpus)
    g_before = build_slot_graph(corpus, slots[0], resolve_corpus(corpus))
    g_after = build_slot_graph(corpus, slots[4], resolve_corpus(corpus))
    before = {frozenset(c.members) for c in find_communities(symmetrize(g_before), 5)}
    after = {frozenset(c.members) for c in find_communities(symmetrize(g_after), 5)}
    assert before == {frozenset(by_id["c0"]["members"])}
    assert after == {
        frozenset(by_id["c0a"]["members"]),
        frozenset(by_id["c0b"]["members"]),
    }


def test_merge_schedule_fuses_cells():
    spec = ScenarioSpec(
        n_users=14,
        duration_days=23,
        communities=(
            CommunitySpec(size=6, merge_with=1, merge_at=2),
            CommunitySpec(size=6),
        ),
    )
    corpus, truth = generate(spec)
    by_id = {c["id"]: c for c in truth.communities}
    assert by_id["c0"]["slots"] == [0, 1]
    assert by_id["c1"]["slots"] == [0, 1]
    assert by_id["c0+c1"]["slots"] == [2, 3, 4]
    assert len(by_id["c0+c1"]["members"]) == 12

    slots = slots_for(spec, corpus)
    g_after = build_slot_graph(corpus, slots[3], resolve_corpus(corpus))
    found = {frozenset(c.members) for c in find_communities(symmetrize(g_after), 5)}
    assert found == {frozenset(by_id["c0+c1"]["members"])}


def test_anchor_days_keep_slot_bundles_separate():
    spec = replace(demo_scenario(), duration_days=15)  # 3 slots
    corpus, truth = generate(spec)
    slots = slots_for(spec, corpus)
    assert truth.n_slots == len(slots) == 3
    resolution = resolve_corpus(corpus)
    counts = []
    for slot in slots:
        g = build_slot_graph(corpus, slot, resolution)
        counts.append(g.n_comments)
    # Identical per-slot bundles: overlapping windows never mix anchor days.
    assert counts[0] == counts[1] == counts[2] > 0


def test_bad_window_step_combination_rejected():
    spec = replace(demo_scenario(), window_days=9, step_days=4)
    with pytest.raises(ScenarioError, match="anchor"):
        generate(spec)


def test_write_scenario_round_trip(tmp_path):
    spec = replace(demo_scenario(), duration_days=7)
    corpus, truth = generate(spec)
    paths = write_scenario(corpus, truth, tmp_path)
    again = parse_corpus(paths["posts"], paths["comments"])
    assert again == corpus
    assert (tmp_path / "ground_truth.json").exists()


def test_stochastic_mode_smoke():
    corpus, truth = generate(plausibility_scenario(seed=1))
    assert corpus.n_comments > 0
    assert truth.n_slots == 5
    sizes = sorted(len(c["members"]) for c in truth.communities)
    assert sizes == [9, 200]
