"""Influence roles, overlapping groups, and group evolution in time-sliced comment networks."""

from .communities import Community, brute_force_cpm, find_communities, symmetrize
from .evolution import (
    EventKind,
    GroupEvent,
    GroupMatch,
    StableGroup,
    extract_stable,
    jaccard,
    label_events,
    match_groups,
    modified_jaccard,
)
from .groupstats import (
    BUILTIN_CLASS_THRESHOLDS,
    ClassThresholds,
    GroupProfile,
    bin_profile,
    cohesion,
    density,
    derive_thresholds,
    role_shares,
    size_bucket,
)
from .ingest import Comment, Corpus, CorpusError, LoadReport, Post, extract_reply_marker, parse_corpus
from .netbuild import InteractionGraph, build_slot_graph, resolve_comment_target
from .pipeline import ConfigError, RunConfig, StageError, run_pipeline
from .roles import (
    ActivityStats,
    Role,
    RoleAssignment,
    RoleParams,
    classify,
    classify_metrics,
    comment_ego,
    comment_influence,
    comment_ratio,
    local_params,
    local_stats,
    post_influence,
    post_response,
)
from .synthgen import (
    CommunitySpec,
    PlantSpec,
    ScenarioError,
    ScenarioSpec,
    default_plant,
    demo_scenario,
    generate,
)
from .timeslice import SlotConfig, TimeSlot, enumerate_slots, events_in_slot

__version__ = "0.1.0"
