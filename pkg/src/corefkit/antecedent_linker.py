"""Coarse-to-fine antecedent scoring, the marginal likelihood loss, and decoding.

For each anaphor i the candidate antecedents are the kept spans strictly
preceding it in document order, truncated to the top K by the coarse score
(mention logits plus a bilinear term), plus the dummy antecedent with fixed
score 0. The fine score is a feed-forward function of the two span vectors,
their elementwise product, and a bucketed span-distance embedding; the
combined pairwise score adds both mention logits.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import torch
from torch import nn

from .corpus.types import ClusterSet, Span
from .errors import InputError

# logarithmic distance buckets with lower edges 1, 2, 3, 4, 8, 16, 32, 64+
DISTANCE_EDGES = (1, 2, 3, 4, 8, 16, 32, 64)
NUM_DISTANCE_BUCKETS = len(DISTANCE_EDGES)
DISTANCE_EMB_DIM = 16


def distance_bucket(distance: int) -> int:
    """Bucket index for an ordinal anaphor-antecedent distance >= 1."""
    if distance < 1:
        raise InputError("antecedent distance must be >= 1")
    return int(bisect_right(DISTANCE_EDGES, distance)) - 1


class AntecedentLinker(nn.Module):
    """Bilinear coarse scorer plus feed-forward fine scorer."""

    def __init__(self, span_dim: int, hidden_dim: int = 64):
        super().__init__()
        self.coarse = nn.Linear(span_dim, span_dim, bias=False)
        self.distance_embedding = nn.Embedding(NUM_DISTANCE_BUCKETS, DISTANCE_EMB_DIM)
        self.fine = nn.Sequential(
            nn.Linear(3 * span_dim + DISTANCE_EMB_DIM, hidden_dim),
            nn.ReLU(),
            nn.Linear(hidden_dim, 1),
        )


def coarse_scores(span_matrix: torch.Tensor, linker: AntecedentLinker) -> torch.Tensor:
    """Bilinear coarse score matrix over all kept-span pairs, shape (n, n)."""
    return span_matrix @ linker.coarse(span_matrix).T


def fine_scores(
    anaphor_vecs: torch.Tensor,
    antecedent_vecs: torch.Tensor,
    distances: torch.Tensor,
    linker: AntecedentLinker,
) -> torch.Tensor:
    """Fine antecedent scores for aligned (anaphor, antecedent) pairs."""
    dist_emb = linker.distance_embedding(distances)
    features = torch.cat(
        [anaphor_vecs, antecedent_vecs, anaphor_vecs * antecedent_vecs, dist_emb], dim=1
    )
    return linker.fine(features).squeeze(-1)


@dataclass(frozen=True)
class AntecedentScores:
    """Per-anaphor candidate lists and scores; index 0 of each score row is the dummy.

    candidates[i] holds kept-span indices in document order; combined[i] has
    length 1 + len(candidates[i]) with the fixed dummy score 0 first.
    """

    spans: tuple[Span, ...]
    candidates: tuple[tuple[int, ...], ...]
    coarse: tuple[torch.Tensor, ...] = field(repr=False)
    fine: tuple[torch.Tensor, ...] = field(repr=False)
    combined: tuple[torch.Tensor, ...] = field(repr=False)

    def log_probs(self, i: int) -> torch.Tensor:
        return torch.log_softmax(self.combined[i], dim=0)

    def distributions(self) -> "AntecedentDistribution":
        probs = tuple(
            torch.softmax(self.combined[i], dim=0).detach().numpy()
            for i in range(len(self.spans))
        )
        return AntecedentDistribution(self.spans, self.candidates, probs)


@dataclass(frozen=True)
class AntecedentDistribution:
    """Normalized antecedent probabilities; entry 0 is the dummy antecedent."""

    spans: tuple[Span, ...]
    candidates: tuple[tuple[int, ...], ...]
    probabilities: tuple[np.ndarray, ...] = field(repr=False)


def score_antecedents(
    kept: Sequence[Span],
    span_matrix: torch.Tensor,
    mention_logits: torch.Tensor,
    linker: AntecedentLinker,
    top_k: int = 50,
) -> AntecedentScores:
    """Coarse-truncate each anaphor's antecedent list, then fine-score it."""
    n = len(kept)
    if span_matrix.shape[0] != n or mention_logits.shape[0] != n:
        raise InputError("one representation and logit per kept span required")
    if top_k < 1:
        raise InputError("top_k must be >= 1")
    coarse_full = coarse_scores(span_matrix, linker) if n else span_matrix.new_zeros((0, 0))

    candidates: list[tuple[int, ...]] = []
    pairs_i: list[int] = []
    pairs_j: list[int] = []
    for i in range(n):
        if i == 0:
            candidates.append(())
            continue
        rank = (
            (mention_logits[i] + mention_logits[:i] + coarse_full[i, :i]).detach().numpy()
        )
        order = np.argsort(-rank, kind="stable")[:top_k]
        chosen = tuple(sorted(int(j) for j in order))
        candidates.append(chosen)
        pairs_i.extend([i] * len(chosen))
        pairs_j.extend(chosen)

    if pairs_i:
        ai = torch.tensor(pairs_i, dtype=torch.long)
        aj = torch.tensor(pairs_j, dtype=torch.long)
        distances = torch.tensor(
            [distance_bucket(i - j) for i, j in zip(pairs_i, pairs_j)], dtype=torch.long
        )
        fine_flat = fine_scores(span_matrix[ai], span_matrix[aj], distances, linker)
        combined_flat = mention_logits[ai] + mention_logits[aj] + fine_flat
    else:
        fine_flat = span_matrix.new_zeros((0,))
        combined_flat = fine_flat

    coarse_rows, fine_rows, combined_rows = [], [], []
    cursor = 0
    dummy = span_matrix.new_zeros((1,))
    for i in range(n):
        k = len(candidates[i])
        idx = torch.tensor(candidates[i], dtype=torch.long)
        coarse_rows.append(coarse_full[i, idx] if k else span_matrix.new_zeros((0,)))
        fine_rows.append(fine_flat[cursor : cursor + k])
        combined_rows.append(torch.cat([dummy, combined_flat[cursor : cursor + k]]))
        cursor += k
    return AntecedentScores(
        tuple(kept),
        tuple(candidates),
        tuple(coarse_rows),
        tuple(fine_rows),
        tuple(combined_rows),
    )


def coref_loss(scores: AntecedentScores, gold: ClusterSet) -> torch.Tensor:
    """Negative marginal log-likelihood of gold antecedents over kept spans.

    A span whose candidate list contains no member of its gold cluster
    (first mentions, pruned-away clusters, non-gold spans) is trained
    toward the dummy antecedent.
    """
    cluster_of: dict[Span, int] = {}
    for c, cluster in enumerate(scores_clusters(gold)):
        for span in cluster:
            cluster_of[span] = c
    total = None
    for i, span in enumerate(scores.spans):
        log_probs = scores.log_probs(i)
        cid = cluster_of.get(span)
        correct = [0]
        if cid is not None:
            gold_positions = [
                pos + 1
                for pos, j in enumerate(scores.candidates[i])
                if cluster_of.get(scores.spans[j]) == cid
            ]
            if gold_positions:
                correct = gold_positions
        contrib = -torch.logsumexp(log_probs[torch.tensor(correct, dtype=torch.long)], dim=0)
        total = contrib if total is None else total + contrib
    if total is None:
        return torch.zeros(())
    return total


def scores_clusters(gold: ClusterSet) -> list[list[Span]]:
    return [sorted(c) for c in gold.sorted_clusters()]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def decode(
    distribution: AntecedentDistribution, emit_singletons: bool, doc_id: str = ""
) -> ClusterSet:
    """Greedy argmax linking closed under union.

    Ties break toward the dummy antecedent, then toward the nearer
    antecedent. Unlinked spans become singleton clusters only when
    emit_singletons is set.
    """
    n = len(distribution.spans)
    uf = _UnionFind(n)
    linked = [False] * n
    for i in range(n):
        probs = distribution.probabilities[i]
        best = probs.max() if probs.size else 1.0
        if probs.size == 0 or probs[0] >= best:
            continue  # dummy antecedent wins ties
        # nearest antecedent among tied maxima: candidates are sorted by
        # document order, so take the last argmax
        pos = int(np.flatnonzero(probs == best)[-1])
        j = distribution.candidates[i][pos - 1]
        uf.union(i, j)
        linked[i] = linked[j] = True

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(uf.find(i), []).append(i)
    clusters = []
    for members in groups.values():
        if len(members) > 1:
            clusters.append(frozenset(distribution.spans[i] for i in members))
        elif emit_singletons:
            clusters.append(frozenset({distribution.spans[members[0]]}))
    return ClusterSet(doc_id, frozenset(clusters))
