"""Command-line interface.

``analyze`` runs the whole pipeline from a JSON config; the per-stage
subcommands do the same work incrementally, each consuming the files the
previous stage wrote into the shared output directory:

    ingest -> corpus_posts.csv corpus_comments.csv load_report.json
    slice  -> slots.csv
    graph  -> graph_edges.csv
    roles  -> roles_global.csv
    groups -> communities.csv
    evolve -> stable_groups.csv group_events.csv
    classify -> roles_local.csv group_classes.csv
    report -> group_size_histogram.csv role_counts.csv user_role_history.csv
              group_role_shares.csv (+ figure PNGs)

Exit codes: 0 success, 1 stage failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import networkx as nx

from . import figures as figmod
from . import report as reportmod
from .communities import find_communities, read_communities_csv, write_communities_csv
from .evolution import (
    extract_stable,
    label_events,
    match_all,
    read_stable_groups_csv,
    write_events_csv,
    write_stable_groups_csv,
)
from .ingest import CorpusError, parse_corpus, write_corpus
from .netbuild import build_slot_graph, read_edges_csv, resolve_corpus, write_edges_csv
from .pipeline import ConfigError, RunConfig, StageError, compute_group_classes, run_pipeline
from .roles import (
    GLOBAL_SCOPE,
    RoleParams,
    assign_roles,
    params_from_dict,
    read_roles_csv,
    slot_activity_stats,
    write_roles_csv,
)
from .synthgen import ScenarioError, demo_scenario, generate, plausibility_scenario, write_scenario
from .timeslice import SlotConfig, enumerate_slots, read_slots_csv, write_slots_csv
from .pipeline import slot_range

logger = logging.getLogger(__name__)


def _load_role_params(path: str | None) -> RoleParams:
    if path is None:
        return RoleParams()
    try:
        raw = json.loads(Path(path).read_text())
        return params_from_dict(raw)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise ConfigError(f"bad role params file {path}: {exc}") from exc


def _read_stage_corpus(out_dir: Path):
    return parse_corpus(out_dir / "corpus_posts.csv", out_dir / "corpus_comments.csv")


def cmd_ingest(args) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corpus = parse_corpus(args.posts, args.comments)
    write_corpus(corpus, out / "corpus_posts.csv", out / "corpus_comments.csv")
    corpus.load_report.write(out / "load_report.json")
    print(f"ingested {corpus.n_posts} posts, {corpus.n_comments} comments -> {out}")


def cmd_slice(args) -> None:
    out = Path(args.out)
    config = SlotConfig(args.window_days, args.step_days, args.trailing_partial)
    if args.date_from and args.date_to:
        from .pipeline import _parse_config_date
        from datetime import timedelta

        start = _parse_config_date(args.date_from)
        end = _parse_config_date(args.date_to) + timedelta(days=1)
    else:
        corpus = _read_stage_corpus(out)
        stub = RunConfig(
            posts="-", comments="-", out=str(out),
            date_from=args.date_from, date_to=args.date_to, slot=config,
        )
        rng = slot_range(stub, corpus)
        if rng is None:
            print("empty corpus: no slots", file=sys.stderr)
            write_slots_csv([], out / "slots.csv")
            return
        start, end = rng
    slots = enumerate_slots(start, end, config)
    write_slots_csv(slots, out / "slots.csv")
    print(f"enumerated {len(slots)} slots -> {out / 'slots.csv'}")


def cmd_graph(args) -> None:
    out = Path(args.out)
    corpus = _read_stage_corpus(out)
    slots = read_slots_csv(out / "slots.csv")
    resolution = resolve_corpus(corpus)
    graphs = [build_slot_graph(corpus, s, resolution) for s in slots]
    rows = write_edges_csv(graphs, out / "graph_edges.csv")
    print(f"built {len(graphs)} slot graphs, {rows} edges -> {out / 'graph_edges.csv'}")


def cmd_roles(args) -> None:
    out = Path(args.out)
    corpus = _read_stage_corpus(out)
    slots = read_slots_csv(out / "slots.csv")
    params = _load_role_params(args.params)
    resolution = resolve_corpus(corpus)
    assignments = []
    for s in slots:
        g = build_slot_graph(corpus, s, resolution)
        assignments.extend(assign_roles(slot_activity_stats(g), params, s.index, GLOBAL_SCOPE))
    rows = write_roles_csv(assignments, out / "roles_global.csv")
    print(f"assigned {rows} global roles -> {out / 'roles_global.csv'}")


def cmd_groups(args) -> None:
    out = Path(args.out)
    edges_by_slot = read_edges_csv(out / "graph_edges.csv")
    communities_by_slot = {}
    for slot_index in sorted(edges_by_slot):
        g = nx.Graph()
        for (u, v), w in edges_by_slot[slot_index].items():
            if g.has_edge(u, v):
                g[u][v]["weight"] += w
            else:
                g.add_edge(u, v, weight=w)
        communities_by_slot[slot_index] = find_communities(g, args.k, slot_index)
    rows = write_communities_csv(communities_by_slot, out / "communities.csv")
    n = sum(len(c) for c in communities_by_slot.values())
    print(f"found {n} communities (k={args.k}) -> {out / 'communities.csv'}")


def cmd_evolve(args) -> None:
    out = Path(args.out)
    slots = read_slots_csv(out / "slots.csv")
    by_slot = read_communities_csv(out / "communities.csv")
    member_sets = [by_slot.get(i, []) for i in range(len(slots))]
    matches = match_all(member_sets, args.match_threshold, args.similarity)
    stable = extract_stable(member_sets, matches, args.min_lifespan, args.size_delta)
    events = label_events(matches, member_sets, args.size_delta)
    write_stable_groups_csv(stable, out / "stable_groups.csv")
    write_events_csv(events, out / "group_events.csv")
    print(f"{len(stable)} stable groups, {len(events)} events -> {out}")


def cmd_classify(args) -> None:
    out = Path(args.out)
    corpus = _read_stage_corpus(out)
    slots = read_slots_csv(out / "slots.csv")
    stable = read_stable_groups_csv(out / "stable_groups.csv")
    global_assignments = read_roles_csv(out / "roles_global.csv")
    params = _load_role_params(args.params)
    resolution = resolve_corpus(corpus)
    needed = sorted({slot for g in stable for slot, _ in g.lifespan})
    graph_by_slot = {i: build_slot_graph(corpus, slots[i], resolution) for i in needed}
    global_roles_by_slot: dict[int, dict] = {s.index: {} for s in slots}
    for a in global_assignments:
        global_roles_by_slot.setdefault(a.slot_index, {})[a.user] = a.role
    local_assignments, profiles, class_rows = compute_group_classes(
        graph_by_slot,
        stable,
        global_roles_by_slot,
        params,
        args.local_count_external,
        args.class_thresholds,
        args.density_mode,
    )
    write_roles_csv(local_assignments, out / "roles_local.csv")
    from .groupstats import write_class_table_csv

    write_class_table_csv(class_rows, out / "group_classes.csv")
    print(f"{len(local_assignments)} local roles, {len(class_rows)} classes -> {out}")


def cmd_report(args) -> None:
    out = Path(args.out)
    stable = read_stable_groups_csv(out / "stable_groups.csv")
    global_assignments = read_roles_csv(out / "roles_global.csv")
    local_assignments = read_roles_csv(out / "roles_local.csv")

    size_hist = reportmod.emit_group_size_histogram(stable)
    reportmod.write_group_size_histogram_csv(size_hist, out / "group_size_histogram.csv")
    rc_global = reportmod.emit_role_counts(global_assignments, "global")
    rc_local = reportmod.emit_role_counts(local_assignments, "local")
    reportmod.write_role_counts_csv(rc_global + rc_local, out / "role_counts.csv")
    history = reportmod.emit_user_role_history(
        global_assignments, "global"
    ) + reportmod.emit_user_role_history(local_assignments, "local")
    reportmod.write_user_role_history_csv(history, out / "user_role_history.csv")

    # Profiles are recomputed from the role exports: every stable-group slot
    # occurrence with its members' global and local roles.
    from .groupstats import role_shares

    profiles = []
    global_by_slot: dict[int, dict] = {}
    for a in global_assignments:
        global_by_slot.setdefault(a.slot_index, {})[a.user] = a.role
    local_by_occurrence: dict[tuple[str, int], dict] = {}
    for a in local_assignments:
        local_by_occurrence.setdefault((a.scope, a.slot_index), {})[a.user] = a.role
    for g in stable:
        for slot_index, members in g.lifespan:
            profiles.append(
                role_shares(g.group_id, slot_index, members, global_by_slot.get(slot_index, {}), "global")
            )
            local_roles = local_by_occurrence.get((g.group_id, slot_index), {})
            if local_roles:
                profiles.append(role_shares(g.group_id, slot_index, members, local_roles, "local"))
    share_rows = reportmod.emit_group_role_shares(profiles)
    reportmod.write_group_role_shares_csv(share_rows, out / "group_role_shares.csv")

    rendered = []
    if args.figures:
        rendered = figmod.render_figures(out, size_hist, stable, rc_global, rc_local, share_rows)
    print(f"report tables written -> {out}" + (f" (+{len(rendered)} figures)" if rendered else ""))


def cmd_analyze(args) -> None:
    try:
        raw = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load config {args.config}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    overrides = {
        "out": args.out,
        "k": args.k,
        "window_days": args.window_days,
        "step_days": args.step_days,
        "from": args.date_from,
        "to": args.date_to,
        "match_threshold": args.match_threshold,
        "min_lifespan": args.min_lifespan,
        "size_delta": args.size_delta,
        "similarity": args.similarity,
        "class_thresholds": args.class_thresholds,
        "density_mode": args.density_mode,
    }
    for key, value in overrides.items():
        if value is not None:
            raw[key] = value
    if args.trailing_partial is not None:
        raw["trailing_partial"] = args.trailing_partial
    if args.no_figures:
        raw["figures"] = False
    config = RunConfig.from_dict(raw, config_dir=Path(args.config).resolve().parent)
    result = run_pipeline(config)
    for warning in result.manifest["warnings"]:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"pipeline complete: {len(result.manifest['exports'])} exports -> {config.out}")


def cmd_synth(args) -> None:
    spec = {"demo": demo_scenario, "plausibility": plausibility_scenario}[args.preset](args.seed)
    corpus, truth = generate(spec)
    paths = write_scenario(corpus, truth, args.out)
    print(
        f"generated {corpus.n_posts} posts, {corpus.n_comments} comments "
        f"({truth.n_slots} slots) -> {paths['posts']}"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blogroles",
        description="Influence roles, overlapping groups, and group evolution in comment networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", required=True, help="working/output directory")

    p = sub.add_parser("ingest", help="parse and validate the corpus CSVs")
    p.add_argument("--posts", required=True)
    p.add_argument("--comments", required=True)
    add_out(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("slice", help="enumerate analysis windows")
    add_out(p)
    p.add_argument("--from", dest="date_from", default=None, metavar="DATE")
    p.add_argument("--to", dest="date_to", default=None, metavar="DATE")
    p.add_argument("--window-days", type=int, default=7)
    p.add_argument("--step-days", type=int, default=4)
    p.add_argument("--trailing-partial", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("graph", help="build per-slot interaction graphs")
    add_out(p)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("roles", help="assign global roles per slot")
    add_out(p)
    p.add_argument("--params", default=None, help="JSON file with role parameter overrides")
    p.set_defaults(func=cmd_roles)

    p = sub.add_parser("groups", help="detect overlapping communities (CPM)")
    add_out(p)
    p.add_argument("--k", type=int, default=5)
    p.set_defaults(func=cmd_groups)

    p = sub.add_parser("evolve", help="track stable groups and transition events")
    add_out(p)
    p.add_argument("--match-threshold", type=float, default=0.5)
    p.add_argument("--min-lifespan", type=int, default=3)
    p.add_argument("--size-delta", type=float, default=0.1)
    p.add_argument("--similarity", choices=("mj", "jaccard"), default="mj")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("classify", help="local roles, group profiles, and classes")
    add_out(p)
    p.add_argument("--params", default=None)
    p.add_argument("--class-thresholds", choices=("builtin", "derived"), default="builtin")
    p.add_argument("--local-count-external", action="store_true")
    p.add_argument("--density-mode", choices=("directed", "undirected"), default="directed")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("report", help="emit summary tables and figures")
    add_out(p)
    p.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("analyze", help="run the full pipeline from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--window-days", type=int, default=None)
    p.add_argument("--step-days", type=int, default=None)
    p.add_argument("--from", dest="date_from", default=None, metavar="DATE")
    p.add_argument("--to", dest="date_to", default=None, metavar="DATE")
    p.add_argument("--trailing-partial", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--match-threshold", type=float, default=None)
    p.add_argument("--min-lifespan", type=int, default=None)
    p.add_argument("--size-delta", type=float, default=None)
    p.add_argument("--similarity", choices=("mj", "jaccard"), default=None)
    p.add_argument("--class-thresholds", choices=("builtin", "derived"), default=None)
    p.add_argument("--density-mode", choices=("directed", "undirected"), default=None)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    add_out(p)
    p.add_argument("--preset", choices=("demo", "plausibility"), default="demo")
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (CorpusError, ScenarioError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
