"""End-to-end pipeline: ingest through classed groups, with file exports.

``run_pipeline`` executes every stage in memory and writes the full export
set plus ``run_manifest.json``. The manifest records each export with its
row count and a fingerprint of the effective configuration; re-running the
same configuration produces byte-identical exports (figures are listed
separately since they are renderings, not data).
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

from . import figures as figmod
from . import report
from .communities import Community, find_communities, symmetrize, write_communities_csv
from .evolution import (
    StableGroup,
    extract_stable,
    label_events,
    match_all,
    write_events_csv,
    write_stable_groups_csv,
)
from .groupstats import (
    BUILTIN_CLASS_THRESHOLDS,
    ClassedGroup,
    ClassThresholds,
    GroupProfile,
    aggregate_classes,
    bin_profile,
    cohesion,
    density,
    derive_thresholds,
    role_shares,
    size_bucket,
    write_class_table_csv,
)
from .ingest import Corpus, LoadReport, parse_corpus
from .netbuild import InteractionGraph, build_slot_graph, resolve_corpus, write_edges_csv
from .roles import (
    GLOBAL_SCOPE,
    RoleAssignment,
    RoleParams,
    assign_roles,
    local_params,
    local_stats,
    params_from_dict,
    slot_activity_stats,
    write_roles_csv,
)
from .timeslice import SlotConfig, TimeSlot, as_utc_instant, enumerate_slots, write_slots_csv

logger = logging.getLogger(__name__)

EXPORT_FILES = (
    "load_report.json",
    "slots.csv",
    "graph_edges.csv",
    "roles_global.csv",
    "roles_local.csv",
    "communities.csv",
    "stable_groups.csv",
    "group_events.csv",
    "group_size_histogram.csv",
    "role_counts.csv",
    "user_role_history.csv",
    "group_role_shares.csv",
    "group_classes.csv",
)

MANIFEST_FILE = "run_manifest.json"


class ConfigError(Exception):
    """The run configuration is malformed."""


class StageError(Exception):
    """A pipeline stage failed; carries the stage name and the cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunConfig:
    posts: str
    comments: str
    out: str
    date_from: str | None = None  # YYYY-MM-DD, inclusive
    date_to: str | None = None    # YYYY-MM-DD, inclusive
    slot: SlotConfig = field(default_factory=SlotConfig)
    k: int = 5
    match_threshold: float = 0.5
    min_lifespan: int = 3
    size_delta: float = 0.1
    similarity: str = "mj"
    role_params: RoleParams = field(default_factory=RoleParams)
    local_count_external: bool = False
    class_thresholds: str = "builtin"  # "builtin" | "derived"
    density_mode: str = "directed"
    figures: bool = True

    def __post_init__(self) -> None:
        if self.k < 3:
            raise ConfigError("k must be >= 3")
        if self.similarity not in ("mj", "jaccard"):
            raise ConfigError(f"unknown similarity {self.similarity!r}")
        if self.class_thresholds not in ("builtin", "derived"):
            raise ConfigError(f"unknown class_thresholds mode {self.class_thresholds!r}")
        if self.density_mode not in ("directed", "undirected"):
            raise ConfigError(f"unknown density_mode {self.density_mode!r}")
        if not 0.0 <= self.match_threshold <= 1.0:
            raise ConfigError("match_threshold must lie in [0, 1]")
        if self.min_lifespan < 1:
            raise ConfigError("min_lifespan must be >= 1")

    @classmethod
    def from_json(cls, path: Path | str) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load config {path}: {exc}") from exc
        return cls.from_dict(raw, config_dir=Path(path).resolve().parent)

    @classmethod
    def from_dict(cls, raw: dict, config_dir: Path | None = None) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {
            "posts", "comments", "out", "from", "to", "window_days", "step_days",
            "trailing_partial", "k", "match_threshold", "min_lifespan", "size_delta",
            "similarity", "role_params", "local_count_external", "class_thresholds",
            "density_mode", "figures",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        for key in ("posts", "comments", "out"):
            if key not in raw:
                raise ConfigError(f"config missing required key {key!r}")

        def resolve(p: str) -> str:
            path = Path(p)
            if config_dir is not None and not path.is_absolute():
                path = config_dir / path
            return str(path)

        try:
            slot = SlotConfig(
                window_days=int(raw.get("window_days", 7)),
                step_days=int(raw.get("step_days", 4)),
                include_trailing_partial=bool(raw.get("trailing_partial", True)),
            )
            role_params = params_from_dict(raw.get("role_params", {}))
            return cls(
                posts=resolve(raw["posts"]),
                comments=resolve(raw["comments"]),
                out=resolve(raw["out"]),
                date_from=raw.get("from"),
                date_to=raw.get("to"),
                slot=slot,
                k=int(raw.get("k", 5)),
                match_threshold=float(raw.get("match_threshold", 0.5)),
                min_lifespan=int(raw.get("min_lifespan", 3)),
                size_delta=float(raw.get("size_delta", 0.1)),
                similarity=str(raw.get("similarity", "mj")),
                role_params=role_params,
                local_count_external=bool(raw.get("local_count_external", False)),
                class_thresholds=str(raw.get("class_thresholds", "builtin")),
                density_mode=str(raw.get("density_mode", "directed")),
                figures=bool(raw.get("figures", True)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad config value: {exc}") from exc

    def fingerprint(self) -> str:
        payload = {
            "posts": self.posts,
            "comments": self.comments,
            "from": self.date_from,
            "to": self.date_to,
            "window_days": self.slot.window_days,
            "step_days": self.slot.step_days,
            "trailing_partial": self.slot.include_trailing_partial,
            "k": self.k,
            "match_threshold": self.match_threshold,
            "min_lifespan": self.min_lifespan,
            "size_delta": self.size_delta,
            "similarity": self.similarity,
            "role_params": {
                name: getattr(self.role_params, name)
                for name in sorted(RoleParams.__dataclass_fields__)
            },
            "local_count_external": self.local_count_external,
            "class_thresholds": self.class_thresholds,
            "density_mode": self.density_mode,
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _parse_config_date(raw: str) -> datetime:
    try:
        return as_utc_instant(datetime.strptime(raw, "%Y-%m-%d").date())
    except ValueError as exc:
        raise ConfigError(f"bad date {raw!r}, expected YYYY-MM-DD") from exc


def slot_range(config: RunConfig, corpus: Corpus) -> tuple[datetime, datetime] | None:
    """Analysis range: explicit dates (to-date inclusive) or the corpus span."""
    if config.date_from and config.date_to:
        return (
            _parse_config_date(config.date_from),
            _parse_config_date(config.date_to) + timedelta(days=1),
        )
    if corpus.date_range is None:
        return None
    lo, hi = corpus.date_range
    start = as_utc_instant(lo.date()) if config.date_from is None else _parse_config_date(config.date_from)
    end = as_utc_instant(hi.date()) + timedelta(days=1) if config.date_to is None else (
        _parse_config_date(config.date_to) + timedelta(days=1)
    )
    return start, end


@dataclass
class PipelineResult:
    corpus: Corpus
    slots: list[TimeSlot]
    graphs: list[InteractionGraph]
    global_assignments: list[RoleAssignment]
    communities_by_slot: list[list[Community]]
    stable_groups: list[StableGroup]
    events: list
    local_assignments: list[RoleAssignment]
    profiles: list[GroupProfile]
    class_rows: list[dict]
    manifest: dict


def _derived_thresholds(
    profiles: list[GroupProfile],
) -> dict[tuple[str, str], ClassThresholds]:
    out: dict[tuple[str, str], ClassThresholds] = {}
    grouped: dict[tuple[str, str], list[GroupProfile]] = {}
    for p in profiles:
        bucket = size_bucket(p.size)
        if bucket in ("small", "large"):
            grouped.setdefault((bucket, p.scope), []).append(p)
    for key, group in grouped.items():
        out[key] = ClassThresholds(
            influential=derive_thresholds([p.share_influential for p in group]),
            cooperative=derive_thresholds([p.share_cooperative for p in group]),
            selfish=derive_thresholds([p.share_selfish for p in group]),
        )
    return out


def compute_group_classes(
    graph_by_slot: dict[int, InteractionGraph],
    stable_groups: list[StableGroup],
    global_roles_by_slot: dict[int, dict],
    role_params: RoleParams,
    local_count_external: bool = False,
    thresholds_mode: str = "builtin",
    density_mode: str = "directed",
    warnings: list[str] | None = None,
) -> tuple[list[RoleAssignment], list[GroupProfile], list[dict]]:
    """Local roles, per-occurrence profiles, and the aggregated class table.

    Every stable-group slot occurrence yields one local role assignment per
    member, a global-scope and a local-scope profile, and (for small/large
    buckets) a class-table entry binned with built-in or derived cut points.
    """
    warnings = warnings if warnings is not None else []
    local_assignments: list[RoleAssignment] = []
    profiles: list[GroupProfile] = []
    occurrence_rows = []
    for group in stable_groups:
        for slot_index, members in group.lifespan:
            g = graph_by_slot[slot_index]
            stats = local_stats(g, members, scope=group.group_id, count_external=local_count_external)
            params = local_params(len(members), role_params)
            assignments = assign_roles(stats, params, slot_index, group.group_id)
            local_assignments.extend(assignments)
            local_roles = {a.user: a.role for a in assignments}
            p_global = role_shares(
                group.group_id, slot_index, members, global_roles_by_slot[slot_index], "global"
            )
            p_local = role_shares(group.group_id, slot_index, members, local_roles, "local")
            profiles.extend([p_global, p_local])
            dens = density(g, members, density_mode)
            coh = cohesion(g, members)
            occurrence_rows.append((members, p_global, p_local, dens, coh))

    if thresholds_mode == "builtin":
        thresholds = dict(BUILTIN_CLASS_THRESHOLDS)
    else:
        thresholds = _derived_thresholds(profiles)
    classed: list[ClassedGroup] = []
    for members, p_global, p_local, dens, coh in occurrence_rows:
        bucket = size_bucket(len(members))
        if bucket not in ("small", "large"):
            continue
        for profile in (p_global, p_local):
            key = (bucket, profile.scope)
            if key not in thresholds:
                warnings.append(f"no class thresholds for {key}; occurrence skipped")
                continue
            classed.append(
                ClassedGroup(bucket, profile.scope, bin_profile(profile, thresholds[key]), dens, coh)
            )
    return local_assignments, profiles, aggregate_classes(classed)


def run_pipeline(config: RunConfig) -> PipelineResult:
    """Execute every stage and write all exports; aborts with StageError."""
    warnings: list[str] = []
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def stage(name, fn):
        try:
            return fn()
        except Exception as exc:
            raise StageError(name, exc) from exc

    corpus: Corpus = stage("ingest", lambda: parse_corpus(config.posts, config.comments))

    def _slice() -> list[TimeSlot]:
        rng = slot_range(config, corpus)
        if rng is None:
            warnings.append("empty corpus: no slots enumerated")
            return []
        return enumerate_slots(rng[0], rng[1], config.slot)

    slots = stage("slice", _slice)

    def _graphs() -> list[InteractionGraph]:
        resolution = resolve_corpus(corpus)
        return [build_slot_graph(corpus, s, resolution) for s in slots]

    graphs = stage("graph", _graphs)

    def _global_roles() -> list[RoleAssignment]:
        out: list[RoleAssignment] = []
        for g in graphs:
            stats = slot_activity_stats(g)
            out.extend(assign_roles(stats, config.role_params, g.slot.index, GLOBAL_SCOPE))
        return out

    global_assignments = stage("roles", _global_roles)

    communities_by_slot = stage(
        "groups",
        lambda: [find_communities(symmetrize(g), config.k, g.slot.index) for g in graphs],
    )

    def _evolve():
        member_sets = [[c.members for c in comms] for comms in communities_by_slot]
        matches = match_all(member_sets, config.match_threshold, config.similarity)
        stable = extract_stable(member_sets, matches, config.min_lifespan, config.size_delta)
        events = label_events(matches, member_sets, config.size_delta)
        return stable, events

    stable_groups, events = stage("evolve", _evolve)

    def _classify():
        global_roles_by_slot: dict[int, dict] = {s.index: {} for s in slots}
        for a in global_assignments:
            global_roles_by_slot.setdefault(a.slot_index, {})[a.user] = a.role
        return compute_group_classes(
            {g.slot.index: g for g in graphs},
            stable_groups,
            global_roles_by_slot,
            config.role_params,
            config.local_count_external,
            config.class_thresholds,
            config.density_mode,
            warnings,
        )

    local_assignments, profiles, class_rows = stage("classify", _classify)

    def _report() -> dict:
        exports: list[tuple[str, int]] = []
        (corpus.load_report or LoadReport()).write(out_dir / "load_report.json")
        exports.append(("load_report.json", 1))
        exports.append(("slots.csv", write_slots_csv(slots, out_dir / "slots.csv")))
        exports.append(("graph_edges.csv", write_edges_csv(graphs, out_dir / "graph_edges.csv")))
        exports.append(
            ("roles_global.csv", write_roles_csv(global_assignments, out_dir / "roles_global.csv"))
        )
        exports.append(
            ("roles_local.csv", write_roles_csv(local_assignments, out_dir / "roles_local.csv"))
        )
        exports.append(
            (
                "communities.csv",
                write_communities_csv(
                    {i: comms for i, comms in enumerate(communities_by_slot)},
                    out_dir / "communities.csv",
                ),
            )
        )
        exports.append(
            ("stable_groups.csv", write_stable_groups_csv(stable_groups, out_dir / "stable_groups.csv"))
        )
        exports.append(("group_events.csv", write_events_csv(events, out_dir / "group_events.csv")))

        size_hist = report.emit_group_size_histogram(stable_groups)
        exports.append(
            (
                "group_size_histogram.csv",
                report.write_group_size_histogram_csv(size_hist, out_dir / "group_size_histogram.csv"),
            )
        )
        rc_global = report.emit_role_counts(global_assignments, "global")
        rc_local = report.emit_role_counts(local_assignments, "local")
        exports.append(
            ("role_counts.csv", report.write_role_counts_csv(rc_global + rc_local, out_dir / "role_counts.csv"))
        )
        history = report.emit_user_role_history(global_assignments, "global") + report.emit_user_role_history(
            local_assignments, "local"
        )
        exports.append(
            ("user_role_history.csv", report.write_user_role_history_csv(history, out_dir / "user_role_history.csv"))
        )
        share_rows = report.emit_group_role_shares(profiles)
        exports.append(
            ("group_role_shares.csv", report.write_group_role_shares_csv(share_rows, out_dir / "group_role_shares.csv"))
        )
        exports.append(("group_classes.csv", write_class_table_csv(class_rows, out_dir / "group_classes.csv")))

        rendered: list[str] = []
        if config.figures:
            rendered = figmod.render_figures(
                out_dir, size_hist, stable_groups, rc_global, rc_local, share_rows
            )
        manifest = {
            "config_fingerprint": config.fingerprint(),
            "exports": [{"file": name, "rows": rows} for name, rows in exports],
            "figures": rendered,
            "warnings": warnings,
        }
        (out_dir / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return manifest

    manifest = stage("report", _report)
    for message in warnings:
        logger.warning("%s", message)

    return PipelineResult(
        corpus=corpus,
        slots=slots,
        graphs=graphs,
        global_assignments=global_assignments,
        communities_by_slot=communities_by_slot,
        stable_groups=stable_groups,
        events=events,
        local_assignments=local_assignments,
        profiles=profiles,
        class_rows=class_rows,
        manifest=manifest,
    )
