import io
import random

import pytest

from helpers import random_qrels, random_run
from longeval_kit.trec_io import write_run


def _write_run(path, run):
    buf = io.StringIO()
    write_run(run, buf)
    path.write_text(buf.getvalue())
    return path


def _write_qrels(path, qrels):
    path.write_text("".join(f"{t} 0 {d} {g}\n" for t, j in qrels.judgments.items() for d, g in j.items()))
    return path


@pytest.fixture
def two_env_files(tmp_path):
    """Pivot and system runs, qrels and queries for two environments on disk."""
    rng = random.Random(2024)
    files = {}
    for ee in ("ee1", "ee2"):
        files[f"qrels_{ee}"] = _write_qrels(tmp_path / f"qrels_{ee}.txt", random_qrels(rng, n_topics=8))
        files[f"pivot_{ee}"] = _write_run(tmp_path / f"pivot_{ee}.txt", random_run(rng, "bm25", n_topics=8))
        files[f"system_{ee}"] = _write_run(tmp_path / f"system_{ee}.txt", random_run(rng, "neural", n_topics=8))
    (tmp_path / "queries_ee1.tsv").write_text("".join(f"q{i}\tquery {i}\n" for i in range(8)))
    (tmp_path / "queries_ee2.tsv").write_text("".join(f"q{i}\tQuery  {i}\n" for i in range(2, 10)))
    files["queries_ee1"] = tmp_path / "queries_ee1.tsv"
    files["queries_ee2"] = tmp_path / "queries_ee2.tsv"
    files["dir"] = tmp_path
    return files


_CRITERIA: dict[int, tuple[str, str]] = {}
_RANK = {"PASS": 0, "SKIP": 1, "FAIL": 2}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (report.when != "call" and report.passed):
        return
    number, title = marker.args
    status = "SKIP" if report.skipped else "FAIL" if report.failed else "PASS"
    previous = _CRITERIA.get(number)
    if previous is None or _RANK[status] > _RANK[previous[0]]:
        _CRITERIA[number] = (status, title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        status, title = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")
