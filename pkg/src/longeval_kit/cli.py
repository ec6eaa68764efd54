"""Command line interface: ``longeval-kit <subcommand> ...``.

Exit codes: 0 success, 2 input error, 3 empty intersection or empty result,
4 replicability report in which every ER and ΔRI is undefined.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .corpus import collection_stats, diff_corpora, qrels_distribution
from .errors import EmptyResultError, ParseError, ValidationError
from .formatting import FORMATS, render
from .fusion import FusionConfig, rrf_fuse, rrf_sweep
from .metrics import DEFAULT_MEASURES, evaluate, parse_measure, parse_measures
from .plots import drift_svg, er_delta_ri_svg, evolution_svg
from .replicability import EEPair, core_topics, format_value, replicability_report, topic_drift
from .significance import paired_ttest_bonferroni
from .trec_io import read_manifest, read_qrels, read_queries, read_run, write_run

FORMAT_ENV = "LONGEVAL_KIT_FORMAT"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_EMPTY = 3
EXIT_UNDEFINED = 4


class CommandError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _default_format() -> str:
    fmt = os.environ.get(FORMAT_ENV, "tsv").strip().lower()
    return fmt if fmt in FORMATS else "tsv"


def _precision(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("precision must be >= 1")
    return value


def _emit(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _write_file(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _measures(args) -> list:
    return parse_measures(args.measures) if args.measures else list(DEFAULT_MEASURES)


def cmd_eval(args) -> int:
    run = read_run(args.run)
    qrels = read_qrels(args.qrels)
    table = evaluate(run, qrels, _measures(args), ee_label=args.ee_label)
    p = args.precision
    if args.format == "json":
        text = table.to_json(p)
    elif args.format == "markdown":
        headers = ["run", *(str(m) for m in table.measures)]
        row = [table.run_tag, *(f"{table.arp(m):.{p}f}" for m in table.measures)]
        text = render(headers, [row], "markdown")
    else:
        text = render(["measure", "topic", "score"], [[m, t, f"{s:.{p}f}"] for m, t, s in table.to_rows()], "tsv")
    _emit(text, args.output)
    return EXIT_OK


def cmd_compare(args) -> int:
    qrels = read_qrels(args.qrels)
    measures = _measures(args)
    runs = [read_run(path) for path in args.runs]
    tags = [r.tag for r in runs]
    if len(set(tags)) != len(tags):
        raise CommandError(f"run tags must be unique, got {tags}")
    if args.baseline not in tags:
        raise CommandError(f"baseline tag {args.baseline!r} is not among the runs {tags}")
    tables = {r.tag: evaluate(r, qrels, measures) for r in runs}
    baseline = tables[args.baseline]
    others = [tables[t] for t in tags if t != args.baseline]

    flags: dict[tuple[str, str], tuple[float, bool]] = {}
    for m in measures:
        if others:
            for res in paired_ttest_bonferroni(others, baseline, m, args.alpha, args.family_size):
                flags[(res.run_tag, str(m))] = (res.pvalue, res.significant)

    p = args.precision
    if args.format == "json":
        data = {
            "baseline": args.baseline,
            "alpha": args.alpha,
            "family_size": args.family_size or len(others),
            "systems": {
                tag: {
                    str(m): {
                        "arp": round(tables[tag].arp(m), p),
                        "p_value": round(flags[(tag, str(m))][0], p) if (tag, str(m)) in flags else None,
                        "significant": flags.get((tag, str(m)), (None, False))[1],
                    }
                    for m in measures
                }
                for tag in tags
            },
        }
        _emit(json.dumps(data, indent=2) + "\n", args.output)
        return EXIT_OK

    best = {str(m): max(tables[t].arp(m) for t in tags) for m in measures}
    rows = []
    for tag in tags:
        row = [tag]
        for m in measures:
            value = tables[tag].arp(m)
            cell = f"{value:.{p}f}"
            if flags.get((tag, str(m)), (None, False))[1]:
                cell += "*"
            if args.bold_best and args.format == "markdown" and round(value, p) == round(best[str(m)], p):
                cell = f"**{cell}**"
            row.append(cell)
        rows.append(row)
    _emit(render(["system", *(str(m) for m in measures)], rows, args.format), args.output)
    return EXIT_OK


def cmd_replicability(args) -> int:
    measures = _measures(args)
    labels = tuple(args.labels)
    pivot = (read_run(args.pivot_ee1), read_run(args.pivot_ee2))
    system = (read_run(args.system_ee1), read_run(args.system_ee2))
    qrels = (read_qrels(args.qrels_ee1), read_qrels(args.qrels_ee2))
    alignment = None
    if args.queries_ee1 or args.queries_ee2:
        if not (args.queries_ee1 and args.queries_ee2):
            raise CommandError("give query files for both environments or for neither")
        sets = [read_queries(args.queries_ee1, labels[0]), read_queries(args.queries_ee2, labels[1])]
        alignment = core_topics(sets, mode=args.mode)
    elif args.mode == "by-text":
        raise CommandError("--mode by-text needs --queries-ee1 and --queries-ee2")
    pair = EEPair.from_runs(pivot, system, qrels, alignment, measures, labels)
    report = replicability_report(pair, measures, equal_var=not args.welch)

    p = args.precision
    if args.format == "json":
        text = report.to_json(p)
    else:
        text = render(report.columns(), report.table_rows(p), args.format, numeric_from=2)
    _emit(text, args.output)

    if args.plot:
        plot_dir = Path(args.plot)
        for r in report.rows:
            svg = er_delta_ri_svg([(report.system_tag, r.er, r.delta_ri)], f"{r.measure}: ER vs. ΔRI ({labels[0]} → {labels[1]})")
            _write_file(plot_dir / f"er_delta_ri_{_slug(str(r.measure))}.svg", svg)
    return EXIT_UNDEFINED if report.all_undefined() else EXIT_OK


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in text).lower()


def cmd_fuse(args) -> int:
    if len(args.runs) < 2:
        raise CommandError("fusion needs at least two runs")
    runs = [read_run(path) for path in args.runs]
    if args.sweep:
        if not args.qrels:
            raise CommandError("--sweep needs --qrels")
        best_k, _ = rrf_sweep(runs, read_qrels(args.qrels), parse_measure(args.measure), args.sweep, args.depth, args.tag)
        print(f"selected k = {best_k:g}", file=sys.stderr)
        config = FusionConfig(best_k, args.depth, args.tag)
    else:
        config = FusionConfig(args.k, args.depth, args.tag)
    fused = rrf_fuse(runs, config)
    if args.output in (None, "-"):
        write_run(fused, sys.stdout)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            write_run(fused, fh)
    return EXIT_OK


def cmd_corpus_diff(args) -> int:
    old = read_manifest(args.old, ee_label=args.labels[0])
    new = read_manifest(args.new, ee_label=args.labels[1])
    stats = diff_corpora(old, new)
    if args.format == "json":
        text = json.dumps({"from": args.labels[0], "to": args.labels[1], **stats.to_dict()}, indent=2) + "\n"
    else:
        keys = list(stats.to_dict())
        text = render(["transition", *keys], [[f"{args.labels[0]}->{args.labels[1]}", *(str(v) for v in stats.to_dict().values())]], args.format)
    _emit(text, args.output)
    if args.plot:
        _write_file(Path(args.plot), evolution_svg([(f"{args.labels[0]}→{args.labels[1]}", stats)]))
    return EXIT_OK


def cmd_harmonize(args) -> int:
    labels = args.labels or [Path(q).stem for q in args.queries]
    if len(labels) != len(args.queries):
        raise CommandError("--labels must name every query file")
    sets = [read_queries(path, label) for path, label in zip(args.queries, labels)]
    alignment = core_topics(sets, mode=args.mode)
    if args.format == "json":
        data = {
            "mode": alignment.mode,
            "labels": list(alignment.labels),
            "n_core": len(alignment),
            "core": [dict(zip(["key", *alignment.labels], row)) for row in alignment.rows()],
            "discarded": {k: list(v) for k, v in sorted(alignment.discarded.items())},
        }
        text = json.dumps(data, indent=2, ensure_ascii=False) + "\n"
    else:
        text = render(["key", *alignment.labels], alignment.rows(), args.format, numeric_from=len(labels) + 1)
    _emit(text, args.output)
    print(f"{len(alignment)} core topics", file=sys.stderr)
    return EXIT_OK


def cmd_stats(args) -> int:
    manifest = read_manifest(args.manifest, unit=args.unit)
    queries = read_queries(args.queries) if args.queries else None
    stats = collection_stats(manifest, queries, args.exclude)
    data = stats.to_dict()
    if args.format == "json":
        text = json.dumps(data, indent=2) + "\n"
    else:
        p = args.precision
        rows = [[k, f"{v:.{p}f}" if isinstance(v, float) else (",".join(v) if isinstance(v, list) else str(v))] for k, v in data.items()]
        text = render(["statistic", "value"], rows, args.format)
    _emit(text, args.output)
    return EXIT_OK


def cmd_qrels_dist(args) -> int:
    dist = qrels_distribution(read_qrels(args.qrels))
    if args.format == "json":
        text = dist.to_json()
    else:
        p = args.precision
        headers = ["topic", *(f"grade_{g}" for g in dist.grades), "total"]
        rows = [[t, *(str(c[g]) for g in dist.grades), str(sum(c.values()))] for t, c in dist.per_topic.items()]
        for name, idx in (("mean", 0), ("min", 1), ("max", 2)):
            cells = [dist.per_grade[g][idx] for g in dist.grades] + [dist.total[idx]]
            rows.append([name, *(f"{c:.{p}f}" if idx == 0 else str(c) for c in cells)])
        text = render(headers, rows, args.format)
    _emit(text, args.output)
    return EXIT_OK


def cmd_drift(args) -> int:
    measure = parse_measure(args.measure)
    labels = tuple(args.labels)
    qrels = (read_qrels(args.qrels_ee1), read_qrels(args.qrels_ee2))
    runs = (read_run(args.run_ee1), read_run(args.run_ee2))
    t1 = evaluate(runs[0], qrels[0], [measure], labels[0])
    t2 = evaluate(runs[1], qrels[1], [measure], labels[1])
    if args.queries_ee1 and args.queries_ee2:
        al = core_topics([read_queries(args.queries_ee1, labels[0]), read_queries(args.queries_ee2, labels[1])], args.mode)
        ids1, ids2 = al.topic_ids[0], al.topic_ids[1]
    else:
        shared = tuple(sorted(set(t1.evaluated_topics) & set(t2.evaluated_topics)))
        if not shared:
            raise EmptyResultError("the two qrels share no topic id")
        ids1 = ids2 = shared
    deltas = topic_drift(t1, t2, ids1, measure, ids2)
    p = args.precision
    if args.format == "json":
        text = json.dumps({"measure": str(measure), "deltas": [[t, round(d, p)] for t, d in deltas]}, indent=2) + "\n"
    else:
        text = render(["topic", f"Δ{measure}"], [[t, format_value(d, p)] for t, d in deltas], args.format)
    _emit(text, args.output)
    if args.plot:
        _write_file(Path(args.plot), drift_svg(deltas, f"Δ{measure} per topic ({labels[0]} → {labels[1]})"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=_default_format(),
                        help=f"output format (default from ${FORMAT_ENV}, else tsv)")
    common.add_argument("-o", "--output", help="output file (default: stdout)")
    common.add_argument("--precision", type=_precision, default=4, help="decimal places (default 4)")

    measures = argparse.ArgumentParser(add_help=False)
    measures.add_argument("--measures", help="comma separated, e.g. map,bpref,rr,P@20,ndcg,ndcg@20")

    parser = argparse.ArgumentParser(prog="longeval-kit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common, measures], help="per-topic and ARP scores of one run")
    p.add_argument("run")
    p.add_argument("qrels")
    p.add_argument("--ee-label", default="")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", parents=[common, measures], help="ARP table with Bonferroni-corrected paired t-tests")
    p.add_argument("runs", nargs="+")
    p.add_argument("--qrels", required=True)
    p.add_argument("--baseline", required=True, help="tag of the baseline run")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--family-size", type=int, default=None, help="Bonferroni m (default: number of compared systems)")
    p.add_argument("--bold-best", action="store_true", help="bold the best value per measure (markdown)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("replicability", parents=[common, measures], help="ReΔ, ER, ΔRI and p-values between two environments")
    for name in ("pivot-ee1", "pivot-ee2", "system-ee1", "system-ee2", "qrels-ee1", "qrels-ee2"):
        p.add_argument(f"--{name}", required=True)
    p.add_argument("--queries-ee1")
    p.add_argument("--queries-ee2")
    p.add_argument("--mode", choices=("by-id", "by-text"), default="by-text")
    p.add_argument("--labels", nargs=2, default=["EE1", "EE2"], metavar=("EE1", "EE2"))
    p.add_argument("--welch", action="store_true", help="Welch instead of Student unpaired t-test")
    p.add_argument("--plot", metavar="DIR", help="write one ER vs. ΔRI SVG per measure into DIR")
    p.set_defaults(func=cmd_replicability)

    p = sub.add_parser("fuse", parents=[common], help="reciprocal rank fusion of runs")
    p.add_argument("runs", nargs="+")
    p.add_argument("--k", type=float, default=60.0)
    p.add_argument("--depth", type=int, default=1000)
    p.add_argument("--tag", default="rrf")
    p.add_argument("--sweep", type=float, nargs="+", metavar="K", help="choose k from these values using --qrels")
    p.add_argument("--qrels")
    p.add_argument("--measure", default="ndcg")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("corpus-diff", parents=[common], help="added/removed/changed documents between two manifests")
    p.add_argument("old")
    p.add_argument("new")
    p.add_argument("--labels", nargs=2, default=["old", "new"], metavar=("OLD", "NEW"))
    p.add_argument("--plot", metavar="SVG")
    p.set_defaults(func=cmd_corpus_diff)

    p = sub.add_parser("harmonize", parents=[common], help="core topics shared by query files")
    p.add_argument("queries", nargs="+")
    p.add_argument("--labels", nargs="+")
    p.add_argument("--mode", choices=("by-id", "by-text"), default="by-text")
    p.set_defaults(func=cmd_harmonize)

    p = sub.add_parser("stats", parents=[common], help="document and query statistics")
    p.add_argument("manifest")
    p.add_argument("--queries")
    p.add_argument("--exclude", nargs="*", default=[], metavar="TOPIC")
    p.add_argument("--unit", choices=("chars", "tokens"), default="chars", help="unit of manifest lengths")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("qrels-dist", parents=[common], help="judgments per topic and grade")
    p.add_argument("qrels")
    p.set_defaults(func=cmd_qrels_dist)

    p = sub.add_parser("drift", parents=[common], help="per-topic score change of one system between environments")
    p.add_argument("--run-ee1", required=True)
    p.add_argument("--run-ee2", required=True)
    p.add_argument("--qrels-ee1", required=True)
    p.add_argument("--qrels-ee2", required=True)
    p.add_argument("--queries-ee1")
    p.add_argument("--queries-ee2")
    p.add_argument("--mode", choices=("by-id", "by-text"), default="by-text")
    p.add_argument("--measure", default="ndcg")
    p.add_argument("--labels", nargs=2, default=["EE1", "EE2"], metavar=("EE1", "EE2"))
    p.add_argument("--plot", metavar="SVG")
    p.set_defaults(func=cmd_drift)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except EmptyResultError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (OSError, ParseError, ValidationError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
