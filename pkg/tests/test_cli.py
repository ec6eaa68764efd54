import json
import xml.etree.ElementTree as ET

import pytest
from scipy.stats import ttest_rel

from longeval_kit.cli import main
from longeval_kit.trec_io import read_run


def run_cli(capsys, *args):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def replicability_args(f, *extra):
    return [
        "replicability",
        "--pivot-ee1", f["pivot_ee1"], "--pivot-ee2", f["pivot_ee2"],
        "--system-ee1", f["system_ee1"], "--system-ee2", f["system_ee2"],
        "--qrels-ee1", f["qrels_ee1"], "--qrels-ee2", f["qrels_ee2"],
        "--queries-ee1", f["queries_ee1"], "--queries-ee2", f["queries_ee2"],
        *extra,
    ]


class TestEval:
    def test_rows(self, capsys, two_env_files):
        f = two_env_files
        code, out, _ = run_cli(capsys, "eval", f["system_ee1"], f["qrels_ee1"], "--measures", "map,ndcg@20")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "measure\ttopic\tscore"
        assert len(lines) - 1 == 8 * 2 + 2
        assert lines[9].startswith("MAP\tall\t")
        assert all(len(l.split("\t")[2].split(".")[1]) == 4 for l in lines[1:])

    def test_missing_file(self, capsys, two_env_files):
        code, _, err = run_cli(capsys, "eval", two_env_files["system_ee1"], "/nonexistent/qrels")
        assert code == 2 and "error" in err

    def test_parse_error_reports_line(self, capsys, tmp_path, two_env_files):
        bad = tmp_path / "bad.run"
        bad.write_text("q1 Q0 d1 1 1.0 t\nq1 Q0 d2 2 oops t\n")
        code, _, err = run_cli(capsys, "eval", bad, two_env_files["qrels_ee1"])
        assert code == 2 and ":2:" in err

    def test_formats(self, capsys, two_env_files, monkeypatch):
        f = two_env_files
        code, out, _ = run_cli(capsys, "eval", f["system_ee1"], f["qrels_ee1"], "--format", "json", "--precision", "2")
        data = json.loads(out)
        assert set(data["arp"]) == {"MAP", "Bpref", "RR", "P@20", "nDCG", "nDCG@20"}
        monkeypatch.setenv("LONGEVAL_KIT_FORMAT", "markdown")
        code, out, _ = run_cli(capsys, "eval", f["system_ee1"], f["qrels_ee1"])
        assert out.startswith("| run | MAP |")


class TestReplicability:
    def test_report(self, capsys, two_env_files):
        code, out, _ = run_cli(capsys, *replicability_args(two_env_files, "--labels", "WT", "ST"))
        assert code == 0
        header, *rows = out.splitlines()
        assert header.split("\t") == ["measure", "system", "ARP WT", "ARP ST", "ReΔ", "ER", "ΔRI", "p-val"]
        assert len(rows) == 6

    def test_pivot_against_itself(self, capsys, two_env_files):
        f = dict(two_env_files, system_ee1=two_env_files["pivot_ee1"], system_ee2=two_env_files["pivot_ee2"])
        code, out, _ = run_cli(capsys, *replicability_args(f, "--precision", "3", "--measures", "ndcg,P@20"))
        assert code == 0
        for row in out.splitlines()[1:]:
            assert row.split("\t")[5:] == ["1.000", "0.000", "1.000"]

    def test_disjoint_queries(self, capsys, two_env_files, tmp_path):
        other = tmp_path / "other.tsv"
        other.write_text("x1\tsomething else\n")
        f = dict(two_env_files, queries_ee2=other)
        code, _, _ = run_cli(capsys, *replicability_args(f))
        assert code == 3

    def test_deterministic_output_and_plots(self, capsys, two_env_files):
        plot_dir = two_env_files["dir"] / "plots"
        outputs = []
        for fmt in ("tsv", "json", "markdown"):
            first = run_cli(capsys, *replicability_args(two_env_files, "--format", fmt, "--plot", plot_dir))
            svgs = {p.name: p.read_bytes() for p in sorted(plot_dir.iterdir())}
            second = run_cli(capsys, *replicability_args(two_env_files, "--format", fmt, "--plot", plot_dir))
            assert first == second
            assert svgs == {p.name: p.read_bytes() for p in sorted(plot_dir.iterdir())}
            outputs.append(first[1])
        assert len(svgs) == 6
        for content in svgs.values():
            ET.fromstring(content)
        assert json.loads(outputs[1])["system"] == "neural"

    def test_all_undefined_exit_code(self, capsys, two_env_files, tmp_path):
        empty = tmp_path / "empty.run"
        empty.write_text("")
        f = dict(two_env_files, pivot_ee1=empty, pivot_ee2=empty, system_ee1=empty)
        code, out, _ = run_cli(capsys, *replicability_args(f, "--measures", "map"))
        assert code == 4
        assert "undef" in out


class TestCompare:
    def test_baseline_only_has_no_asterisks(self, capsys, two_env_files):
        f = two_env_files
        code, out, _ = run_cli(capsys, "compare", f["pivot_ee1"], f["system_ee1"], "--qrels", f["qrels_ee1"], "--baseline", "bm25")
        assert code == 0
        assert "*" not in out.splitlines()[1]

    def test_unknown_baseline(self, capsys, two_env_files):
        f = two_env_files
        code, _, err = run_cli(capsys, "compare", f["pivot_ee1"], "--qrels", f["qrels_ee1"], "--baseline", "nope")
        assert code == 2 and "nope" in err

    def test_dominant_system_gets_asterisk(self, capsys, tmp_path):
        qrels = tmp_path / "qrels"
        qrels.write_text("".join(f"t{i} 0 rel{i} 1\nt{i} 0 non{i} 0\n" for i in range(10)))
        good = tmp_path / "good"
        good.write_text("".join(f"t{i} Q0 rel{i} 1 2.0 good\nt{i} Q0 non{i} 2 1.0 good\n" for i in range(10)))
        # baseline finds the relevant doc at rank 2 on 9 topics and rank 1 on one
        base = tmp_path / "base"
        base.write_text(
            "".join(f"t{i} Q0 non{i} 1 2.0 base\nt{i} Q0 rel{i} 2 1.0 base\n" for i in range(9))
            + "t9 Q0 rel9 1 2.0 base\n"
        )
        code, out, _ = run_cli(
            capsys, "compare", base, good, "--qrels", qrels, "--baseline", "base",
            "--measures", "rr,P@20", "--format", "markdown", "--bold-best",
        )
        assert code == 0
        rows = out.splitlines()
        assert rows[0] == "| system | RR | P@20 |"
        # oracle: RR 1.0 everywhere vs 0.5 on nine topics; P@20 identical
        assert ttest_rel([1.0] * 10, [0.5] * 9 + [1.0]).pvalue < 0.05
        assert rows[3] == "| good | **1.0000*** | **0.0500** |"
        assert rows[2] == "| base | 0.5500 | **0.0500** |"


class TestOtherCommands:
    def test_fuse(self, capsys, two_env_files, tmp_path):
        f = two_env_files
        out_path = tmp_path / "fused.run"
        code, _, _ = run_cli(capsys, "fuse", f["pivot_ee1"], f["system_ee1"], "--tag", "combo", "-o", out_path)
        assert code == 0
        assert read_run(out_path).tag == "combo"
        code, _, err = run_cli(capsys, "fuse", f["pivot_ee1"], f["system_ee1"], "--sweep", "10", "20", "--qrels", f["qrels_ee1"])
        assert code == 0 and "selected k" in err

    def test_fuse_needs_two_runs(self, capsys, two_env_files):
        code, _, _ = run_cli(capsys, "fuse", two_env_files["pivot_ee1"])
        assert code == 2

    def test_corpus_diff(self, capsys, tmp_path):
        m = tmp_path / "m.tsv"
        m.write_text("d1\thttps://a.example/x\t10\nd2\thttps://a.example/y\t20\n")
        svg = tmp_path / "evo.svg"
        code, out, _ = run_cli(capsys, "corpus-diff", m, m, "--format", "json", "--plot", svg)
        data = json.loads(out)
        assert code == 0 and data["unchanged"] == data["matched_urls"] == 2
        ET.fromstring(svg.read_text())

    def test_harmonize(self, capsys, two_env_files):
        f = two_env_files
        code, out, err = run_cli(capsys, "harmonize", f["queries_ee1"], f["queries_ee2"], "--labels", "WT", "ST")
        assert code == 0
        assert out.splitlines()[0] == "key\tWT\tST"
        assert len(out.splitlines()) == 7 and "6 core topics" in err
        code, out, _ = run_cli(capsys, "harmonize", f["queries_ee1"], f["queries_ee2"], "--mode", "by-id", "--format", "json")
        assert json.loads(out)["n_core"] == 6

    def test_stats_and_qrels_dist(self, capsys, tmp_path, two_env_files):
        m = tmp_path / "m.tsv"
        m.write_text("d1\tu1\t794\n")
        code, out, _ = run_cli(capsys, "stats", m, "--queries", two_env_files["queries_ee1"], "--exclude", "q0", "--format", "json")
        data = json.loads(out)
        assert code == 0 and data["doc_length_mean"] == 794 and data["query_count"] == 7
        code, out, _ = run_cli(capsys, "qrels-dist", two_env_files["qrels_ee1"])
        assert code == 0 and out.splitlines()[0] == "topic\tgrade_0\tgrade_1\tgrade_2\ttotal"

    def test_drift(self, capsys, two_env_files, tmp_path):
        f = two_env_files
        svg = tmp_path / "drift.svg"
        code, out, _ = run_cli(
            capsys, "drift", "--run-ee1", f["system_ee1"], "--run-ee2", f["system_ee2"],
            "--qrels-ee1", f["qrels_ee1"], "--qrels-ee2", f["qrels_ee2"],
            "--queries-ee1", f["queries_ee1"], "--queries-ee2", f["queries_ee2"], "--plot", svg,
        )
        assert code == 0
        values = [float(line.split("\t")[1]) for line in out.splitlines()[1:]]
        assert values == sorted(values, reverse=True)
        ET.fromstring(svg.read_text())


def test_precision_must_be_positive(capsys, two_env_files):
    with pytest.raises(SystemExit):
        main(["eval", str(two_env_files["system_ee1"]), str(two_env_files["qrels_ee1"]), "--precision", "0"])
