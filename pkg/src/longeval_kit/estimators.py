"""scikit-learn style wrappers around evaluation and fusion.

The estimators follow the usual contract: hyper-parameters are stored
unchanged by ``__init__`` (so ``get_params``/``set_params``/``clone`` work),
``fit`` learns state into trailing-underscore attributes and returns
``self``, and ``transform`` refuses to run before ``fit``.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from .fusion import FusionConfig, rrf_fuse, rrf_sweep
from .metrics import DEFAULT_MEASURES, MeasureId, ScoreTable, evaluate, parse_measure
from .trec_io import Qrels, Run, read_qrels, read_run

__all__ = ["check_run", "check_runs", "check_qrels", "check_measures", "RunEvaluator", "ReciprocalRankFusion"]


def check_run(run) -> Run:
    """Accept a :class:`Run` or a path to a run file."""
    if isinstance(run, Run):
        return run
    if isinstance(run, (str, os.PathLike)):
        return read_run(Path(run))
    raise TypeError(f"expected a Run or a path, got {type(run).__name__}")


def check_runs(runs, min_runs: int = 1) -> list[Run]:
    if isinstance(runs, (Run, str, os.PathLike)):
        runs = [runs]
    checked = [check_run(r) for r in runs]
    if len(checked) < min_runs:
        raise ValueError(f"expected at least {min_runs} runs, got {len(checked)}")
    return checked


def check_qrels(qrels, allow_empty: bool = False) -> Qrels:
    if isinstance(qrels, (str, os.PathLike)):
        qrels = read_qrels(Path(qrels))
    elif isinstance(qrels, dict):
        qrels = Qrels({str(t): {str(d): int(g) for d, g in j.items()} for t, j in sorted(qrels.items())})
    if not isinstance(qrels, Qrels):
        raise TypeError(f"expected Qrels, a mapping or a path, got {type(qrels).__name__}")
    if not allow_empty and not qrels:
        raise ValueError("qrels are empty")
    return qrels


def check_measures(measures: Iterable[MeasureId | str] | MeasureId | str) -> tuple[MeasureId, ...]:
    if isinstance(measures, (str, MeasureId)):
        measures = [measures]
    out = tuple(dict.fromkeys(m if isinstance(m, MeasureId) else parse_measure(m) for m in measures))
    if not out:
        raise ValueError("no measures given")
    return out


class RunEvaluator(TransformerMixin, BaseEstimator):
    """Fit on qrels, then transform runs into per-topic :class:`ScoreTable` objects.

    Parameters
    ----------
    measures : sequence of str or MeasureId
        Measures to compute, e.g. ``("MAP", "P@20", "nDCG@20")``.
    ee_label : str
        Label of the evaluation environment stored in produced tables.
    """

    def __init__(self, measures: Sequence[str | MeasureId] = tuple(str(m) for m in DEFAULT_MEASURES), ee_label: str = ""):
        self.measures = measures
        self.ee_label = ee_label

    def fit(self, qrels, y=None):
        self.qrels_ = check_qrels(qrels)
        self.measures_ = check_measures(self.measures)
        self.topics_ = tuple(self.qrels_.topics())
        return self

    def transform(self, run) -> ScoreTable:
        check_is_fitted(self, "qrels_")
        return evaluate(check_run(run), self.qrels_, self.measures_, ee_label=self.ee_label)

    def fit_transform(self, qrels, run=None, **fit_params):
        if run is None:
            raise ValueError("fit_transform needs the qrels and a run")
        return self.fit(qrels).transform(run)

    def score(self, run, y=None) -> float:
        """ARP of the first configured measure."""
        table = self.transform(run)
        return table.arp(self.measures_[0])


class ReciprocalRankFusion(TransformerMixin, BaseEstimator):
    """Reciprocal Rank Fusion as a transformer over lists of runs.

    With ``k_values`` set, ``fit`` sweeps them against the qrels and keeps the
    ``k`` with the best ARP on ``measure``; otherwise ``k`` is used as given.
    """

    def __init__(self, k: float = 60.0, depth: int = 1000, tag: str = "rrf", k_values=None, measure: str = "nDCG"):
        self.k = k
        self.depth = depth
        self.tag = tag
        self.k_values = k_values
        self.measure = measure

    def fit(self, runs, qrels=None):
        runs = check_runs(runs, min_runs=2)
        if self.k_values is not None:
            if qrels is None:
                raise ValueError("a k sweep needs qrels")
            (measure,) = check_measures(self.measure)
            self.k_, self.sweep_table_ = rrf_sweep(
                runs, check_qrels(qrels), measure, list(self.k_values), depth=self.depth, tag=self.tag
            )
        else:
            FusionConfig(self.k, self.depth, self.tag)
            self.k_ = float(self.k)
        self.n_runs_ = len(runs)
        return self

    def transform(self, runs) -> Run:
        if not hasattr(self, "k_"):
            raise NotFittedError("ReciprocalRankFusion is not fitted yet; call fit first")
        return rrf_fuse(check_runs(runs, min_runs=2), FusionConfig(self.k_, self.depth, self.tag))

    def fit_transform(self, runs, qrels=None, **fit_params) -> Run:
        return self.fit(runs, qrels).transform(runs)
