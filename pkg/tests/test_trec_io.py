import io
import itertools

import pytest
from hypothesis import given, strategies as st

from longeval_kit.errors import ParseError, ValidationError
from longeval_kit.trec_io import (
    Run,
    canonical_order,
    parse_manifest,
    parse_qrels,
    parse_queries,
    parse_run,
    read_run,
    write_run,
)


def run_text(run):
    buf = io.StringIO()
    write_run(run, buf)
    return buf.getvalue()


def test_single_line_run():
    run = parse_run(["q01 Q0 d7 1 12.5 bm25\n"])
    assert run.tag == "bm25"
    assert dict(run.topics) == {"q01": (("d7", 12.5),)}


def test_run_is_reordered_by_score():
    run = parse_run(["q1 Q0 a 1 3.0 t", "q1 Q0 b 2 5.0 t"])
    assert run.ranking("q1") == ["b", "a"]
    assert run.parsed_ranks["q1"] == {"a": 1, "b": 2}


def test_equal_scores_break_ties_by_doc_id_descending():
    entries = [("dA", 2.0), ("dB", 2.0)]
    # every input permutation must end in the same order
    for perm in itertools.permutations(entries):
        lines = [f"q Q0 {d} 1 {s} t" for d, s in perm]
        assert parse_run(lines).ranking("q") == ["dB", "dA"]


def test_rank_column_is_ignored_for_ordering():
    run = parse_run(["q Q0 a 1 1.0 t", "q Q0 b 2 9.0 t"])
    assert run.ranking("q") == ["b", "a"]


@pytest.mark.parametrize(
    "line",
    ["q Q0 d 1 1.0", "q Q0 d 1 1.0 t extra", "q Q0 d 1 abc t", "q Q0 d 1 nan t"],
)
def test_malformed_run_lines(line):
    with pytest.raises(ParseError) as exc:
        parse_run(["q Q0 ok 1 1.0 t", line])
    assert exc.value.line_number == 2


def test_duplicate_run_entries_are_listed():
    with pytest.raises(ValidationError, match=r"\(q1, d1\)"):
        parse_run(["q1 Q0 d1 1 1.0 t", "q1 Q0 d1 2 0.5 t"])


def test_mixed_tags_warn_and_keep_first():
    with pytest.warns(UserWarning, match="several tags"):
        run = parse_run(["q Q0 a 1 1.0 first", "q Q0 b 2 0.5 second"])
    assert run.tag == "first"


def test_blank_lines_and_empty_stream():
    assert len(parse_run(["", "   \n"])) == 0
    assert run_text(parse_run([])) == ""


def test_round_trip(tmp_path):
    text = "q2 Q0 x 1 0.1 sys\nq1 Q0 b 7 1e-07 sys\nq1 Q0 a 3 2.5 sys\nq1 Q0 c 1 2.5 sys\n"
    run = parse_run(io.StringIO(text))
    written = run_text(run)
    again = parse_run(io.StringIO(written))
    assert again == run
    assert again.tag == "sys"
    assert run_text(again) == written
    path = tmp_path / "run.txt"
    path.write_text(written)
    assert read_run(path) == run


scores = st.floats(allow_nan=False, allow_infinity=False, width=64)
topic_ids = st.sampled_from(["q1", "q2", "q10", "t"])
doc_ids = st.text(alphabet="abcdef0123", min_size=1, max_size=4)


@given(st.dictionaries(topic_ids, st.dictionaries(doc_ids, scores, max_size=8), max_size=4))
def test_write_parse_identity(topics):
    run = Run.from_scores("tag", {t: d.items() for t, d in topics.items() if d})
    parsed = parse_run(io.StringIO(run_text(run)))
    assert parsed.topics == run.topics
    if run.topics:
        assert parsed.tag == run.tag


@given(st.lists(st.tuples(doc_ids, st.sampled_from([0.0, 1.0, -2.5, 3.25])), unique_by=lambda e: e[0]))
def test_canonical_order_is_idempotent(entries):
    once = canonical_order(entries)
    assert canonical_order(once) == once
    assert canonical_order(reversed(entries)) == once
    for (d1, s1), (d2, s2) in zip(once, once[1:]):
        assert (s1, d1) > (s2, d2)


def test_qrels_basic():
    assert parse_qrels(["q01 0 d7 2"]).judgments == {"q01": {"d7": 2}}


def test_qrels_last_duplicate_wins():
    with pytest.warns(UserWarning, match="duplicate"):
        qrels = parse_qrels(["q01 0 d7 1", "q01 0 d7 0"])
    assert qrels.judgments == {"q01": {"d7": 0}}


@pytest.mark.parametrize("line", ["q01 0 d7 -1", "q01 0 d7 x", "q01 0 d7 1.5", "q01 d7 1"])
def test_qrels_errors(line):
    with pytest.raises(ParseError) as exc:
        parse_qrels(["q 0 d 1", line])
    assert exc.value.line_number == 2


@given(st.permutations([("q1", "a", 1), ("q1", "b", 0), ("q2", "a", 2), ("q3", "z", 0)]))
def test_qrels_line_order_does_not_matter(lines):
    qrels = parse_qrels([f"{t} 0 {d} {g}" for t, d, g in lines])
    assert qrels.judgments == {"q1": {"a": 1, "b": 0}, "q2": {"a": 2}, "q3": {"z": 0}}
    assert list(qrels.judgments) == ["q1", "q2", "q3"]


def test_manifest():
    m = parse_manifest(["d1\thttps://a.example\t500\n"], ee_label="WT")
    assert len(m) == 1
    rec = m.records[0]
    assert (rec.doc_id, rec.url, rec.length) == ("d1", "https://a.example", 500)
    assert m.unit == "chars"
    assert len(parse_manifest([])) == 0


def test_manifest_errors():
    with pytest.raises(ValidationError, match="d1"):
        parse_manifest(["d1\tu1\t5", "d1\tu2\t6"])
    with pytest.raises(ParseError):
        parse_manifest(["d1\tu1\tlong"])
    with pytest.raises(ParseError):
        parse_manifest(["d1 u1 5"])


def test_manifest_reports_duplicate_urls():
    m = parse_manifest(["d1\tu\t5", "d2\tu\t6", "d3\tv\t1"])
    assert m.duplicate_urls() == {"u": ["d1", "d2"]}


def test_queries():
    qs = parse_queries(["q1\tcheap flights\n", "q2\t\n", "q3\n"], ee_label="WT")
    assert qs.queries == {"q1": "cheap flights", "q2": "", "q3": ""}
    assert qs.ee_label == "WT"
    with pytest.raises(ValidationError):
        parse_queries(["q1\ta", "q1\tb"])
