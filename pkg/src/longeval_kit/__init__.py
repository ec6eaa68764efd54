"""Longitudinal evaluation of retrieval systems.

Effectiveness measures over TREC runs and qrels, result deltas and
replicability measures (ER, ΔRI) between evaluation environments, reciprocal
rank fusion, significance tests, topic harmonization and corpus evolution.
"""

__version__ = "0.1.0"

from .corpus import collection_stats, diff_corpora, qrels_distribution
from .errors import EmptyResultError, ParseError, ValidationError
from .estimators import ReciprocalRankFusion, RunEvaluator
from .fusion import FusionConfig, rrf_fuse, rrf_sweep
from .metrics import DEFAULT_MEASURES, MeasureId, MeasureKind, ScoreTable, arp, evaluate, parse_measure, parse_measures
from .replicability import (
    EEPair,
    ReplicabilityReport,
    core_topics,
    delta_ri,
    effect_ratio,
    per_topic_deltas,
    relative_improvement,
    replicability_report,
    result_delta,
    topic_drift,
)
from .significance import paired_ttest, paired_ttest_bonferroni, unpaired_ttest
from .trec_io import (
    CorpusManifest,
    Qrels,
    QuerySet,
    Run,
    parse_manifest,
    parse_qrels,
    parse_queries,
    parse_run,
    read_manifest,
    read_qrels,
    read_queries,
    read_run,
    write_run,
)
