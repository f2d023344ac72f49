from __future__ import annotations

import csv
from pathlib import Path

import pytest

from blogroles.ingest import (
    COMMENTS_HEADER,
    POSTS_HEADER,
    CorpusError,
    extract_reply_marker,
    parse_corpus,
    write_corpus,
)

from conftest import corpus_of, make_comment, make_post


def write_rows(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def sample_files(tmp_path: Path, posts=None, comments=None) -> tuple[Path, Path]:
    if posts is None:
        posts = [
            ["p1", "anna", "2021-03-01T08:00:00Z", "first"],
            ["p2", "bob", "2021-03-02T09:00:00Z", "second"],
            ["p3", "anna", "2021-03-03T10:00:00Z", "third"],
        ]
    if comments is None:
        comments = [
            ["c1", "p1", "bob", "2021-03-01T09:00:00Z", "nice"],
            ["c2", "p1", "carol", "2021-03-01T10:00:00Z", "@bob agreed"],
            ["c3", "p2", "anna", "2021-03-02T10:00:00Z", ""],
            ["c4", "p2", "anna", "2021-03-02T11:00:00Z", ""],
            ["c5", "p3", "bob", "2021-03-03T11:00:00Z", ""],
        ]
    pp, cp = tmp_path / "posts.csv", tmp_path / "comments.csv"
    write_rows(pp, POSTS_HEADER, posts)
    write_rows(cp, COMMENTS_HEADER, comments)
    return pp, cp


def test_parse_counts(tmp_path):
    pp, cp = sample_files(tmp_path)
    corpus = parse_corpus(pp, cp)
    assert corpus.n_posts == 3
    assert corpus.n_comments == 5
    assert corpus.users == {"anna", "bob", "carol"}
    assert corpus.load_report.posts_read == 3
    assert corpus.load_report.comments_read == 5
    assert corpus.load_report.malformed_rows == 0


def test_empty_comment_file(tmp_path):
    pp, cp = sample_files(tmp_path, comments=[])
    corpus = parse_corpus(pp, cp)
    assert corpus.n_comments == 0
    assert corpus.n_posts == 3


def test_orphan_comments_dropped(tmp_path):
    comments = [
        ["c1", "p1", "bob", "2021-03-01T09:00:00Z", ""],
        ["c2", "p1", "carol", "2021-03-01T10:00:00Z", ""],
        ["c3", "p2", "anna", "2021-03-02T10:00:00Z", ""],
        ["c4", "missing", "anna", "2021-03-02T11:00:00Z", ""],
        ["c5", "p3", "bob", "2021-03-03T11:00:00Z", ""],
    ]
    pp, cp = sample_files(tmp_path, comments=comments)
    corpus = parse_corpus(pp, cp)
    assert corpus.n_comments == 4
    assert corpus.load_report.orphans_dropped == 1
    # raw rows = kept + orphans + malformed
    assert corpus.load_report.comments_read == 4 + 1 + 0


def test_malformed_rows_collected_below_threshold(tmp_path):
    comments = [["c%d" % i, "p1", "bob", "2021-03-01T09:00:00Z", ""] for i in range(20)]
    comments.append(["c99", "p1", "bob", "not-a-time", ""])
    pp, cp = sample_files(tmp_path, comments=comments)
    corpus = parse_corpus(pp, cp)
    assert corpus.load_report.malformed_rows == 1
    assert corpus.n_comments == 20


def test_malformed_rows_fatal_above_threshold(tmp_path):
    comments = [
        ["c1", "p1", "bob", "bogus", ""],
        ["c2", "p1", "bob", "2021-03-01T09:00:00Z", ""],
    ]
    pp, cp = sample_files(tmp_path, comments=comments)
    with pytest.raises(CorpusError):
        parse_corpus(pp, cp)


def test_bad_header_fatal(tmp_path):
    pp, cp = sample_files(tmp_path)
    cp.write_text("wrong,header\n")
    with pytest.raises(CorpusError):
        parse_corpus(pp, cp)


def test_missing_file_fatal(tmp_path):
    pp, _ = sample_files(tmp_path)
    with pytest.raises(CorpusError):
        parse_corpus(pp, tmp_path / "nope.csv")


def test_early_comment_kept_and_flagged(tmp_path):
    comments = [["c1", "p1", "bob", "2021-02-28T00:00:00Z", ""]]
    pp, cp = sample_files(tmp_path, comments=comments)
    corpus = parse_corpus(pp, cp)
    assert corpus.n_comments == 1
    assert corpus.load_report.early_comments == 1


def test_duplicate_ids_are_malformed(tmp_path):
    posts = [
        ["p1", "anna", "2021-03-01T08:00:00Z", ""],
        ["p1", "anna", "2021-03-01T08:30:00Z", ""],
        ["p2", "bob", "2021-03-02T09:00:00Z", ""],
        ["p3", "bob", "2021-03-02T09:10:00Z", ""],
        ["p4", "bob", "2021-03-02T09:20:00Z", ""],
        ["p5", "bob", "2021-03-02T09:30:00Z", ""],
        ["p6", "bob", "2021-03-02T09:40:00Z", ""],
        ["p7", "bob", "2021-03-02T09:50:00Z", ""],
        ["p8", "bob", "2021-03-02T09:55:00Z", ""],
        ["p9", "bob", "2021-03-02T09:56:00Z", ""],
        ["p10", "bob", "2021-03-02T09:57:00Z", ""],
    ]
    pp, cp = sample_files(tmp_path, posts=posts, comments=[])
    corpus = parse_corpus(pp, cp)
    assert corpus.n_posts == 10
    assert corpus.load_report.malformed_rows == 1


def test_round_trip(tmp_path):
    pp, cp = sample_files(tmp_path)
    corpus = parse_corpus(pp, cp)
    out_p, out_c = tmp_path / "rt_posts.csv", tmp_path / "rt_comments.csv"
    write_corpus(corpus, out_p, out_c)
    again = parse_corpus(out_p, out_c)
    assert again == corpus


def test_round_trip_synthetic_corpus(tmp_path):
    corpus = corpus_of(
        [make_post("p1", "a", 0), make_post("p2", "b", 1, title="x, y @z")],
        [make_comment("c1", "p1", "b", 0, 5, title='@a "quoted, comma"')],
    )
    out_p, out_c = tmp_path / "p.csv", tmp_path / "c.csv"
    write_corpus(corpus, out_p, out_c)
    assert parse_corpus(out_p, out_c) == corpus


class TestReplyMarker:
    def test_basic_match(self):
        assert extract_reply_marker("@anna well said", {"anna", "bob"}) == "anna"

    def test_no_marker(self):
        assert extract_reply_marker("no marker here", {"anna", "bob"}) is None

    def test_unmatched_name(self):
        assert extract_reply_marker("@charlie hi", {"anna", "bob"}) is None

    def test_case_insensitive(self):
        assert extract_reply_marker("@ANNA hi", {"anna", "bob"}) == "anna"

    def test_longest_match_wins(self):
        assert extract_reply_marker("@anna maria hello", {"anna", "anna maria"}) == "anna maria"

    def test_prefix_name_still_matches(self):
        assert extract_reply_marker("@anna hello", {"ann", "anna"}) == "anna"

    def test_empty_title(self):
        assert extract_reply_marker("", {"anna"}) is None
        assert extract_reply_marker("@", {"anna"}) is None

    def test_deterministic(self):
        args = ("@anna hi", frozenset({"anna", "bob"}))
        assert all(extract_reply_marker(*args) == "anna" for _ in range(5))
