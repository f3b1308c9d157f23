"""Coreference metrics: MUC, B-cubed, CEAF (phi4), and LEA.

Conventions (matching the common reference-scorer behavior):
  * exact-span matching only;
  * any 0/0 ratio is 0, and F1 = 0 whenever P + R = 0;
  * corpus-level scores pool numerators and denominators across documents
    before dividing (micro average);
  * mentions present on one side only count as their own partition parts
    (MUC) / as absent clusters (B-cubed);
  * LEA gives singleton entities a self-link, but a size-1 intersection of
    a larger entity scores zero links.

Evaluation schemes: ``with_singletons`` scores the cluster sets as given,
``without_singletons`` drops size-1 clusters from both sides first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from .corpus.types import ClusterSet, Corpus
from .errors import InputError, ValidationError

METRICS = ("muc", "b3", "ceaf_phi4", "lea")
SCHEMES = ("with_singletons", "without_singletons")

Clusters = list[frozenset]


def _as_clusters(cs: ClusterSet) -> Clusters:
    return [frozenset(c) for c in cs.clusters]


def apply_scheme(gold: ClusterSet, sys: ClusterSet, scheme: str) -> tuple[ClusterSet, ClusterSet]:
    """Project both cluster sets into the evaluation scheme (idempotent)."""
    if scheme == "with_singletons":
        return gold, sys
    if scheme == "without_singletons":
        return _drop_singletons(gold), _drop_singletons(sys)
    raise InputError(f"unknown scheme {scheme!r}")


def _drop_singletons(cs: ClusterSet) -> ClusterSet:
    kept = frozenset(c for c in cs.clusters if len(c) > 1)
    return ClusterSet(cs.doc_id, kept)


def _mention_map(clusters: Clusters) -> dict:
    return {m: i for i, c in enumerate(clusters) for m in c}


def _muc_counts(key: Clusters, response: Clusters) -> tuple[float, float]:
    """Numerator/denominator of the MUC score of `response` against `key`."""
    resp_map = _mention_map(response)
    num = 0.0
    den = 0.0
    for k in key:
        parts = {resp_map[m] for m in k if m in resp_map}
        uncovered = sum(1 for m in k if m not in resp_map)
        num += len(k) - (len(parts) + uncovered)
        den += len(k) - 1
    return num, den


def _b3_counts(key: Clusters, response: Clusters) -> tuple[float, float]:
    resp_map = _mention_map(response)
    num = 0.0
    den = 0.0
    for k in key:
        for m in k:
            den += 1
            if m in resp_map:
                num += len(k & response[resp_map[m]]) / len(k)
    return num, den


def _phi4(a: frozenset, b: frozenset) -> float:
    return 2.0 * len(a & b) / (len(a) + len(b))


def _ceaf_similarity(gold: Clusters, sys: Clusters) -> float:
    """Total phi4 similarity of the optimal one-to-one cluster alignment."""
    if not gold or not sys:
        return 0.0
    scores = np.zeros((len(gold), len(sys)))
    for i, g in enumerate(gold):
        for j, s in enumerate(sys):
            scores[i, j] = _phi4(g, s)
    rows, cols = linear_sum_assignment(scores, maximize=True)
    return float(scores[rows, cols].sum())


def _lea_link(size: int) -> float:
    return size * (size - 1) / 2.0 if size >= 2 else 1.0


def _lea_counts(key: Clusters, response: Clusters) -> tuple[float, float]:
    num = 0.0
    den = 0.0
    for k in key:
        den += len(k)
        resolution = 0.0
        for r in response:
            common = len(k & r)
            if common >= 2:
                resolution += common * (common - 1) / 2.0
            elif common == 1 and len(k) == 1:
                resolution += 1.0
        num += len(k) * resolution / _lea_link(len(k))
    return num, den


def pair_counts(gold: ClusterSet, sys: ClusterSet, scheme: str) -> dict[str, np.ndarray]:
    """Per-document (p_num, p_den, r_num, r_den) for every metric."""
    g, s = apply_scheme(gold, sys, scheme)
    gc, sc = _as_clusters(g), _as_clusters(s)
    out: dict[str, np.ndarray] = {}
    for name, fn in (("muc", _muc_counts), ("b3", _b3_counts), ("lea", _lea_counts)):
        rn, rd = fn(gc, sc)
        pn, pd = fn(sc, gc)
        out[name] = np.array([pn, pd, rn, rd], dtype=float)
    sim = _ceaf_similarity(gc, sc)
    out["ceaf_phi4"] = np.array([sim, len(sc), sim, len(gc)], dtype=float)
    return out


def _prf(counts: np.ndarray) -> tuple[float, float, float]:
    pn, pd, rn, rd = counts
    p = pn / pd if pd > 0 else 0.0
    r = rn / rd if rd > 0 else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f1


def _single(gold: ClusterSet, sys: ClusterSet, metric: str, scheme: str):
    return _prf(pair_counts(gold, sys, scheme)[metric])


def muc(gold: ClusterSet, sys: ClusterSet, scheme: str = "with_singletons"):
    """Link-based MUC precision/recall/F1 (scheme already applied if 'with')."""
    return _single(gold, sys, "muc", scheme)


def b_cubed(gold: ClusterSet, sys: ClusterSet, scheme: str = "with_singletons"):
    """Mention-based B-cubed precision/recall/F1."""
    return _single(gold, sys, "b3", scheme)


def ceaf_phi4(gold: ClusterSet, sys: ClusterSet, scheme: str = "with_singletons"):
    """Entity-alignment CEAF with the phi4 similarity."""
    return _single(gold, sys, "ceaf_phi4", scheme)


def lea(gold: ClusterSet, sys: ClusterSet, scheme: str = "with_singletons"):
    """Link-based entity-aware LEA precision/recall/F1."""
    return _single(gold, sys, "lea", scheme)


@dataclass(frozen=True)
class MetricReport:
    scheme: str
    metric_set: tuple[str, ...]
    precision: Mapping[str, float]
    recall: Mapping[str, float]
    f1: Mapping[str, float]

    @property
    def avg_f1(self) -> float:
        return float(np.mean([self.f1[m] for m in self.metric_set]))

    def records(self) -> list[dict]:
        """Line-delimited record view: one record per metric plus the average."""
        rows = [
            {
                "metric": m,
                "scheme": self.scheme,
                "P": self.precision[m],
                "R": self.recall[m],
                "F1": self.f1[m],
                "avg_f1": self.avg_f1,
            }
            for m in self.metric_set
        ]
        return rows


def _gold_map(gold: Union[Corpus, Mapping[str, ClusterSet]]) -> dict[str, ClusterSet]:
    if isinstance(gold, Corpus):
        return {
            doc.doc_id: gold.coref_annotations.get(doc.doc_id, ClusterSet(doc.doc_id, frozenset()))
            for doc in gold.documents
        }
    return dict(gold)


def corpus_counts(
    gold: Union[Corpus, Mapping[str, ClusterSet]],
    sys_outputs: Mapping[str, ClusterSet],
    scheme: str,
) -> tuple[list[str], np.ndarray]:
    """Stacked per-document counts, shape (n_docs, n_metrics, 4)."""
    gold_map = _gold_map(gold)
    missing = sorted(set(gold_map) - set(sys_outputs))
    if missing:
        raise ValidationError(f"system output missing documents: {missing}")
    doc_ids = sorted(gold_map)
    counts = np.zeros((len(doc_ids), len(METRICS), 4))
    for d, doc_id in enumerate(doc_ids):
        per = pair_counts(gold_map[doc_id], sys_outputs[doc_id], scheme)
        for m, metric in enumerate(METRICS):
            counts[d, m] = per[metric]
    return doc_ids, counts


def report_from_counts(
    counts: np.ndarray, scheme: str, metric_set: Sequence[str] = METRICS
) -> MetricReport:
    pooled = counts.sum(axis=0)
    precision, recall, f1 = {}, {}, {}
    for m, metric in enumerate(METRICS):
        precision[metric], recall[metric], f1[metric] = _prf(pooled[m])
    return MetricReport(scheme, tuple(metric_set), precision, recall, f1)


def report(
    gold: Union[Corpus, Mapping[str, ClusterSet]],
    sys_outputs: Mapping[str, ClusterSet],
    scheme: str = "with_singletons",
    metric_set: Sequence[str] = METRICS,
) -> MetricReport:
    """Corpus-level pooled scores over the gold corpus' documents."""
    for m in metric_set:
        if m not in METRICS:
            raise InputError(f"unknown metric {m!r}")
    _, counts = corpus_counts(gold, sys_outputs, scheme)
    return report_from_counts(counts, scheme, metric_set)


def _f1_vector(pooled: np.ndarray, metric_set: Sequence[str]) -> dict[str, float]:
    f1s = {}
    for m, metric in enumerate(METRICS):
        if metric in metric_set:
            f1s[metric] = _prf(pooled[m])[2]
    f1s["avg"] = float(np.mean([f1s[m] for m in metric_set]))
    return f1s


def bootstrap_from_counts(
    counts_a: np.ndarray,
    counts_b: np.ndarray,
    iterations: int = 10000,
    seed: int = 0,
    metric_set: Sequence[str] = METRICS,
) -> dict[str, float]:
    """Two-sided paired bootstrap over documents from stacked count arrays.

    p is the (doubled, capped at 1) fraction of resamples whose pooled-F1
    difference loses the sign of the full-set difference; a zero full-set
    difference yields p = 1.
    """
    n = counts_a.shape[0]
    if n < 2 or counts_b.shape[0] != n:
        raise InputError("paired bootstrap needs the same >= 2 documents on both sides")
    full_a = _f1_vector(counts_a.sum(axis=0), metric_set)
    full_b = _f1_vector(counts_b.sum(axis=0), metric_set)
    rng = np.random.Generator(np.random.PCG64(seed))
    idx = rng.integers(0, n, size=(iterations, n))
    flips = {m: 0 for m in full_a}
    for it in range(iterations):
        sel = idx[it]
        fa = _f1_vector(counts_a[sel].sum(axis=0), metric_set)
        fb = _f1_vector(counts_b[sel].sum(axis=0), metric_set)
        for m in flips:
            if (fa[m] - fb[m]) * (full_a[m] - full_b[m]) <= 0:
                flips[m] += 1
    out = {}
    for m in flips:
        delta = full_a[m] - full_b[m]
        out[m] = 1.0 if delta == 0 else min(1.0, 2.0 * flips[m] / iterations)
    return out


def paired_bootstrap(
    gold: Union[Corpus, Mapping[str, ClusterSet]],
    sys_a: Mapping[str, ClusterSet],
    sys_b: Mapping[str, ClusterSet],
    iterations: int = 10000,
    seed: int = 0,
    scheme: str = "with_singletons",
    metric_set: Sequence[str] = METRICS,
) -> dict[str, float]:
    """p-value per metric (plus 'avg') for system A vs system B."""
    _, counts_a = corpus_counts(gold, sys_a, scheme)
    _, counts_b = corpus_counts(gold, sys_b, scheme)
    return bootstrap_from_counts(counts_a, counts_b, iterations, seed, metric_set)
