import random

from longeval_kit.metrics import MeasureId, MeasureKind, ScoreTable
from longeval_kit.trec_io import Qrels, Run

NDCG = MeasureId(MeasureKind.NDCG)
P20 = MeasureId(MeasureKind.P, 20)


def make_table(tag, scores, measure=NDCG, ee_label=""):
    """ScoreTable for a single measure from ``{topic: score}``."""
    topics = tuple(scores)
    return ScoreTable(
        run_tag=tag,
        ee_label=ee_label,
        scores={(measure, t): float(s) for t, s in scores.items()},
        evaluated_topics=topics,
        measures=(measure,),
    )


def random_scores(rng: random.Random, topics, low=0.0, high=1.0):
    return {t: rng.uniform(low, high) for t in topics}


def random_run(rng: random.Random, tag, n_topics=5, pool=30, depth=15):
    topics = {}
    for i in range(n_topics):
        docs = rng.sample([f"doc{j}" for j in range(pool)], rng.randint(0, depth))
        topics[f"q{i}"] = [(d, round(rng.uniform(0, 10), rng.choice((0, 1, 3)))) for d in docs]
    return Run.from_scores(tag, topics)


def random_qrels(rng: random.Random, n_topics=5, pool=30, judged=12):
    return Qrels(
        {
            f"q{i}": {d: rng.choice((0, 0, 1, 2)) for d in rng.sample([f"doc{j}" for j in range(pool)], judged)}
            for i in range(n_topics)
        }
    )
