from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

import pytest

from blogroles.cli import main
from blogroles.ingest import COMMENTS_HEADER, POSTS_HEADER
from blogroles.pipeline import (
    EXPORT_FILES,
    ConfigError,
    RunConfig,
    StageError,
    run_pipeline,
)
from blogroles.roles import Role
from blogroles.synthgen import CommunitySpec, default_plant, demo_scenario, generate, write_scenario


@pytest.fixture(scope="module")
def scenario_dir(tmp_path_factory) -> Path:
    """Five-slot corpus: all 8 plants, one small (9) and one 6-member group."""
    spec = replace(
        demo_scenario(seed=5),
        n_users=45,
        duration_days=23,
        communities=(CommunitySpec(size=9), CommunitySpec(size=6)),
    )
    corpus, truth = generate(spec)
    out = tmp_path_factory.mktemp("scenario")
    write_scenario(corpus, truth, out)
    return out


def base_config(scenario_dir: Path, out: Path, **overrides) -> RunConfig:
    kwargs = dict(
        posts=str(scenario_dir / "posts.csv"),
        comments=str(scenario_dir / "comments.csv"),
        out=str(out),
        figures=False,
    )
    kwargs.update(overrides)
    return RunConfig(**kwargs)


class TestRunPipeline:
    def test_manifest_lists_every_export(self, scenario_dir, tmp_path):
        result = run_pipeline(base_config(scenario_dir, tmp_path / "run"))
        names = [e["file"] for e in result.manifest["exports"]]
        assert names == list(EXPORT_FILES)
        assert len(names) == 13
        for name in names:
            assert (tmp_path / "run" / name).exists()
        assert (tmp_path / "run" / "run_manifest.json").exists()

    def test_pipeline_products(self, scenario_dir, tmp_path):
        result = run_pipeline(base_config(scenario_dir, tmp_path / "run2"))
        assert len(result.slots) == 5
        assert len(result.stable_groups) == 2
        assert {len(g.lifespan) for g in result.stable_groups} == {5}
        assert result.local_assignments
        # The 9-member group lands in the small bucket, so classes exist.
        assert result.class_rows
        assert all(r["bucket"] == "small" for r in result.class_rows)
        roles_seen = {a.role for a in result.global_assignments}
        assert Role.INFLUENTIAL_USER_SELFISH in roles_seen

    def test_figures_rendered_when_enabled(self, scenario_dir, tmp_path):
        out = tmp_path / "figs"
        result = run_pipeline(base_config(scenario_dir, out, figures=True))
        assert result.manifest["figures"]
        for name in result.manifest["figures"]:
            assert (out / name).exists() and name.endswith(".png")

    def test_derived_thresholds_mode(self, scenario_dir, tmp_path):
        result = run_pipeline(
            base_config(scenario_dir, tmp_path / "derived", class_thresholds="derived")
        )
        assert result.manifest["exports"]

    def test_empty_corpus_succeeds_with_warning(self, tmp_path):
        posts = tmp_path / "posts.csv"
        comments = tmp_path / "comments.csv"
        posts.write_text(",".join(POSTS_HEADER) + "\n")
        comments.write_text(",".join(COMMENTS_HEADER) + "\n")
        config = RunConfig(
            posts=str(posts), comments=str(comments), out=str(tmp_path / "empty"), figures=False
        )
        result = run_pipeline(config)
        assert any("empty corpus" in w for w in result.manifest["warnings"])
        rows = {e["file"]: e["rows"] for e in result.manifest["exports"]}
        assert rows["roles_global.csv"] == 0
        assert rows["stable_groups.csv"] == 0

    def test_missing_input_aborts_at_ingest(self, tmp_path):
        config = RunConfig(
            posts=str(tmp_path / "nope.csv"),
            comments=str(tmp_path / "also-nope.csv"),
            out=str(tmp_path / "x"),
        )
        with pytest.raises(StageError) as err:
            run_pipeline(config)
        assert err.value.stage == "ingest"


class TestRunConfig:
    def test_from_json(self, scenario_dir, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(
            json.dumps(
                {
                    "posts": str(scenario_dir / "posts.csv"),
                    "comments": str(scenario_dir / "comments.csv"),
                    "out": str(tmp_path / "out"),
                    "k": 5,
                    "role_params": {"a_p": 120},
                    "figures": False,
                }
            )
        )
        config = RunConfig.from_json(path)
        assert config.k == 5
        assert config.role_params.a_p == 120

    def test_relative_paths_resolve_against_config_dir(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"posts": "p.csv", "comments": "c.csv", "out": "results"}))
        config = RunConfig.from_json(path)
        assert config.posts == str(tmp_path / "p.csv")
        assert config.out == str(tmp_path / "results")

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"posts": "p", "comments": "c", "out": "o", "bogus": 1}))
        with pytest.raises(ConfigError):
            RunConfig.from_json(path)

    def test_missing_required_key_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"posts": "p", "comments": "c"})

    def test_bad_values_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig(posts="p", comments="c", out="o", similarity="cosine")
        with pytest.raises(ConfigError):
            RunConfig(posts="p", comments="c", out="o", k=2)

    def test_fingerprint_ignores_out_dir(self, scenario_dir, tmp_path):
        a = base_config(scenario_dir, tmp_path / "a")
        b = base_config(scenario_dir, tmp_path / "b")
        assert a.fingerprint() == b.fingerprint()
        c = base_config(scenario_dir, tmp_path / "a", k=6)
        assert a.fingerprint() != c.fingerprint()


class TestCli:
    def test_stage_chain(self, tmp_path):
        data = tmp_path / "data"
        work = tmp_path / "work"
        assert main(["synth", "--out", str(data), "--preset", "demo", "--seed", "9"]) == 0
        assert main(
            [
                "ingest",
                "--posts", str(data / "posts.csv"),
                "--comments", str(data / "comments.csv"),
                "--out", str(work),
            ]
        ) == 0
        assert main(["slice", "--out", str(work)]) == 0
        assert main(["graph", "--out", str(work)]) == 0
        assert main(["roles", "--out", str(work)]) == 0
        assert main(["groups", "--out", str(work), "--k", "5"]) == 0
        assert main(["evolve", "--out", str(work)]) == 0
        assert main(["classify", "--out", str(work)]) == 0
        assert main(["report", "--out", str(work)]) == 0
        for name in (
            "corpus_posts.csv", "load_report.json", "slots.csv", "graph_edges.csv",
            "roles_global.csv", "communities.csv", "stable_groups.csv", "group_events.csv",
            "roles_local.csv", "group_classes.csv", "group_size_histogram.csv",
            "role_counts.csv", "user_role_history.csv", "group_role_shares.csv",
            "fig_group_sizes.png",
        ):
            assert (work / name).exists(), name

    def test_slice_with_explicit_dates(self, tmp_path):
        work = tmp_path / "w"
        work.mkdir()
        assert main(
            ["slice", "--out", str(work), "--from", "2010-04-04", "--to", "2012-03-31"]
        ) == 0
        n_slots = sum(1 for _ in (work / "slots.csv").open()) - 1
        assert n_slots == 182

    def test_analyze(self, scenario_dir, tmp_path):
        config_path = tmp_path / "run.json"
        config_path.write_text(
            json.dumps(
                {
                    "posts": str(scenario_dir / "posts.csv"),
                    "comments": str(scenario_dir / "comments.csv"),
                    "out": str(tmp_path / "out"),
                }
            )
        )
        assert main(["analyze", "--config", str(config_path), "--no-figures"]) == 0
        manifest = json.loads((tmp_path / "out" / "run_manifest.json").read_text())
        assert len(manifest["exports"]) == 13

    def test_analyze_bad_config_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["analyze", "--config", str(bad)]) == 2
        bad.write_text(json.dumps({"posts": "p", "comments": "c", "out": "o", "k": 1}))
        assert main(["analyze", "--config", str(bad)]) == 2

    def test_analyze_missing_input_exits_1(self, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(
            json.dumps({"posts": "missing.csv", "comments": "missing2.csv", "out": "o"})
        )
        assert main(["analyze", "--config", str(config)]) == 1

    def test_stage_failure_exits_1(self, tmp_path):
        assert main(["graph", "--out", str(tmp_path / "void")]) == 1
