"""TREC-style evaluation: rank metrics, paired significance testing,
five-fold cross-validation, and interpolation grid search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .lexical import RankedList

METRICS = ("P@20", "NDCG@20", "MAP@100", "MAP@1000")

GRID_VALUES = tuple(round(0.1 * i, 1) for i in range(1, 10))
N_FOLDS = 5


# -- relevance judgments -----------------------------------------------------


class Qrels:
    """(query_id, doc_id) -> integer relevance grade >= 0."""

    def __init__(self, judgments: Mapping[Tuple[str, str], int]) -> None:
        self._judgments: Dict[Tuple[str, str], int] = {}
        self._by_query: Dict[str, Dict[str, int]] = {}
        for (qid, did), grade in judgments.items():
            if grade < 0:
                raise ValueError(f"negative grade for ({qid}, {did})")
            if (qid, did) in self._judgments:
                raise ValueError(f"duplicate judgment for ({qid}, {did})")
            self._judgments[(qid, did)] = grade
            self._by_query.setdefault(qid, {})[did] = grade

    @property
    def query_ids(self) -> List[str]:
        return sorted(self._by_query)

    def has_query(self, qid: str) -> bool:
        return qid in self._by_query

    def grade(self, qid: str, did: str) -> int:
        return self._by_query.get(qid, {}).get(did, 0)

    def grades_for(self, qid: str) -> Dict[str, int]:
        return dict(self._by_query.get(qid, {}))

    def num_relevant(self, qid: str) -> int:
        return sum(1 for g in self._by_query.get(qid, {}).values() if g > 0)


# -- per-query metrics -------------------------------------------------------


def precision_at_k(run: RankedList, qrels: Qrels, k: int = 20) -> float:
    """Fraction of the top-k slots filled with relevant documents."""
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(1 for e in run.entries[:k] if qrels.grade(run.query_id, e.doc_id) > 0)
    return hits / k


def ndcg_at_k(run: RankedList, qrels: Qrels, k: int = 20) -> float:
    """Linear-gain NDCG: grade / log2(rank + 1), normalized by the ideal."""
    if k < 1:
        raise ValueError("k must be >= 1")
    dcg = 0.0
    for i, entry in enumerate(run.entries[:k], start=1):
        dcg += qrels.grade(run.query_id, entry.doc_id) / math.log2(i + 1)
    ideal_grades = sorted(qrels.grades_for(run.query_id).values(), reverse=True)[:k]
    idcg = sum(g / math.log2(i + 1) for i, g in enumerate(ideal_grades, start=1))
    return dcg / idcg if idcg > 0 else 0.0


def map_at_k(run: RankedList, qrels: Qrels, k: int) -> float:
    """Average precision truncated at k, over the full relevant count."""
    if k < 1:
        raise ValueError("k must be >= 1")
    total_relevant = qrels.num_relevant(run.query_id)
    if total_relevant == 0:
        return 0.0
    hits = 0
    precision_sum = 0.0
    for i, entry in enumerate(run.entries[:k], start=1):
        if qrels.grade(run.query_id, entry.doc_id) > 0:
            hits += 1
            precision_sum += hits / i
    return precision_sum / total_relevant


_METRIC_FNS = {
    "P@20": lambda run, qrels: precision_at_k(run, qrels, 20),
    "NDCG@20": lambda run, qrels: ndcg_at_k(run, qrels, 20),
    "MAP@100": lambda run, qrels: map_at_k(run, qrels, 100),
    "MAP@1000": lambda run, qrels: map_at_k(run, qrels, 1000),
}


def compute_metric(run: RankedList, qrels: Qrels, metric: str) -> float:
    if metric not in _METRIC_FNS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    return _METRIC_FNS[metric](run, qrels)


@dataclass
class MetricReport:
    """Per-query metric values plus arithmetic means over evaluated queries."""

    per_query: Dict[str, Dict[str, float]]
    means: Dict[str, float]
    skipped: List[str] = field(default_factory=list)


def evaluate_runs(
    runs: Mapping[str, RankedList],
    qrels: Qrels,
    metrics: Sequence[str] = METRICS,
) -> MetricReport:
    """Evaluate one run per query; queries absent from the qrels are
    excluded from the means and recorded as skipped."""
    per_query: Dict[str, Dict[str, float]] = {}
    skipped = []
    for qid in sorted(runs):
        if not qrels.has_query(qid):
            skipped.append(qid)
            continue
        per_query[qid] = {m: compute_metric(runs[qid], qrels, m) for m in metrics}
    means = {
        m: (sum(v[m] for v in per_query.values()) / len(per_query)) if per_query else 0.0
        for m in metrics
    }
    return MetricReport(per_query=per_query, means=means, skipped=skipped)


# -- paired t-test -----------------------------------------------------------


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    stars: str
    degenerate: bool = False


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the regularized incomplete beta (Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b), absolute error < 1e-10."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = math.exp(
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log(1.0 - x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf(t: float, dof: int) -> float:
    """One-sided upper tail P(T > t) for the t distribution."""
    x = dof / (dof + t * t)
    tail = 0.5 * betainc_regularized(dof / 2.0, 0.5, x)
    return tail if t >= 0 else 1.0 - tail


def significance_stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    return "*" if p < 0.1 else ""


def paired_ttest(per_query_a: Sequence[float], per_query_b: Sequence[float]) -> TTestResult:
    """Paired two-tailed t-test over aligned per-query metric vectors."""
    if len(per_query_a) != len(per_query_b):
        raise ValueError("per-query vectors must be aligned and equal length")
    n = len(per_query_a)
    if n < 2:
        raise ValueError("paired t-test needs at least two observations")
    diffs = [a - b for a, b in zip(per_query_a, per_query_b)]
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    if var == 0.0:
        if mean == 0.0:
            return TTestResult(t=0.0, p=1.0, stars="")
        # constant nonzero differences: infinite t in the limit
        t = math.inf if mean > 0 else -math.inf
        return TTestResult(t=t, p=0.0, stars="***", degenerate=True)
    t = mean / math.sqrt(var / n)
    p = 2.0 * student_t_sf(abs(t), n - 1)
    p = min(p, 1.0)
    return TTestResult(t=t, p=p, stars=significance_stars(p))


# -- cross-validation --------------------------------------------------------


@dataclass(frozen=True)
class FoldPlan:
    """Disjoint query partitions; fold i tests partition i and validates
    on partition (i + 1) mod n, training on the rest."""

    folds: Tuple[Tuple[str, ...], ...]

    def __post_init__(self) -> None:
        seen = set()
        for fold in self.folds:
            for qid in fold:
                if qid in seen:
                    raise ValueError(f"query {qid!r} appears in more than one fold")
                seen.add(qid)

    @property
    def num_folds(self) -> int:
        return len(self.folds)

    @property
    def query_ids(self) -> List[str]:
        return sorted(q for fold in self.folds for q in fold)

    def test_queries(self, fold: int) -> Tuple[str, ...]:
        return self.folds[fold]

    def validation_queries(self, fold: int) -> Tuple[str, ...]:
        return self.folds[(fold + 1) % self.num_folds]

    def train_queries(self, fold: int) -> Tuple[str, ...]:
        excluded = {fold, (fold + 1) % self.num_folds}
        return tuple(
            q for i, part in enumerate(self.folds) if i not in excluded for q in part
        )


def _sort_key(qid: str):
    return (0, int(qid), qid) if qid.isdigit() else (1, 0, qid)


def make_folds(
    query_ids: Iterable[str],
    strategy: str = "round_robin",
    external: Optional[Mapping[str, int]] = None,
    n_folds: int = N_FOLDS,
) -> FoldPlan:
    """Partition queries into folds.

    ``round_robin`` sorts ids ascending (numerically where possible) and
    assigns index i to fold i mod n_folds. ``external_file`` takes a
    qid -> fold mapping and verifies it partitions the id set.
    """
    ids = list(query_ids)
    if len(set(ids)) != len(ids):
        dupes = sorted({q for q in ids if ids.count(q) > 1})
        raise ValueError(f"duplicate query ids: {dupes}")
    if strategy == "round_robin":
        if len(ids) < n_folds:
            raise ValueError(f"round_robin needs at least {n_folds} queries")
        ordered = sorted(ids, key=_sort_key)
        folds: List[List[str]] = [[] for _ in range(n_folds)]
        for i, qid in enumerate(ordered):
            folds[i % n_folds].append(qid)
        return FoldPlan(folds=tuple(tuple(f) for f in folds))
    if strategy == "external_file":
        if external is None:
            raise ValueError("external_file strategy needs a qid -> fold mapping")
        missing = sorted(set(ids) - set(external))
        extra = sorted(set(external) - set(ids))
        if missing or extra:
            raise ValueError(
                f"external folds do not partition the query set; "
                f"missing={missing} extra={extra}"
            )
        folds = [[] for _ in range(n_folds)]
        for qid in sorted(external, key=_sort_key):
            fold = external[qid]
            if not 0 <= fold < n_folds:
                raise ValueError(f"fold index {fold} out of range for query {qid!r}")
            folds[fold].append(qid)
        return FoldPlan(folds=tuple(tuple(f) for f in folds))
    raise ValueError(f"unknown strategy {strategy!r}")


def grid_search_interpolation(
    validation_qids: Sequence[str],
    runs_by_cell: Mapping[Tuple[float, float], Mapping[str, RankedList]],
    qrels: Qrels,
    metric: str = "NDCG@20",
) -> Tuple[float, float]:
    """Pick the (alpha, beta) cell maximizing the mean validation metric.

    Ties break toward smaller alpha, then smaller beta.
    """
    if not validation_qids:
        raise ValueError("empty validation set")
    best: Optional[Tuple[float, float]] = None
    best_value = -math.inf
    for alpha, beta in sorted(runs_by_cell):
        runs = runs_by_cell[(alpha, beta)]
        values = [
            compute_metric(runs[qid], qrels, metric)
            for qid in validation_qids
            if qid in runs and qrels.has_query(qid)
        ]
        if not values:
            continue
        value = sum(values) / len(values)
        if value > best_value:
            best_value = value
            best = (alpha, beta)
    if best is None:
        raise ValueError("no evaluable validation queries in any grid cell")
    return best


@dataclass
class FoldReport:
    fold: int
    alpha: float
    beta: float
    test_queries: Tuple[str, ...]
    means: Dict[str, float]


@dataclass
class CrossValidationReport:
    folds: List[FoldReport]
    pooled_per_query: Dict[str, Dict[str, float]]
    pooled_means: Dict[str, float]


def cross_validate(
    fold_plan: FoldPlan,
    runs_by_cell: Mapping[Tuple[float, float], Mapping[str, RankedList]],
    qrels: Qrels,
    metrics: Sequence[str] = METRICS,
    tuning_metric: str = "NDCG@20",
) -> CrossValidationReport:
    """Tune (alpha, beta) per fold on validation queries, evaluate on test
    queries, and pool per-query values across folds."""
    fold_reports: List[FoldReport] = []
    pooled: Dict[str, Dict[str, float]] = {}
    for f in range(fold_plan.num_folds):
        alpha, beta = grid_search_interpolation(
            fold_plan.validation_queries(f), runs_by_cell, qrels, tuning_metric
        )
        cell_runs = runs_by_cell[(alpha, beta)]
        test_qids = fold_plan.test_queries(f)
        fold_values: Dict[str, Dict[str, float]] = {}
        for qid in test_qids:
            if qid not in cell_runs or not qrels.has_query(qid):
                continue
            fold_values[qid] = {m: compute_metric(cell_runs[qid], qrels, m) for m in metrics}
        means = {
            m: (sum(v[m] for v in fold_values.values()) / len(fold_values)) if fold_values else 0.0
            for m in metrics
        }
        fold_reports.append(
            FoldReport(fold=f, alpha=alpha, beta=beta, test_queries=test_qids, means=means)
        )
        pooled.update(fold_values)
    pooled_means = {
        m: (sum(v[m] for v in pooled.values()) / len(pooled)) if pooled else 0.0
        for m in metrics
    }
    return CrossValidationReport(
        folds=fold_reports, pooled_per_query=pooled, pooled_means=pooled_means
    )
