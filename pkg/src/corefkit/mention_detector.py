"""Candidate span scoring, coarse-to-fine and high-precision pruning.

The scorer produces one raw logit per candidate span; the additive pairwise
score consumes the raw logit while the detection loss and the precision
threshold q operate on its logistic transform. Pruning keeps the top
ceil(lambda_keep * T) spans by logit (document-order tie-break) and, when
q > 0, only spans whose probability strictly exceeds q.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import torch
from torch import nn

from .corpus.types import ClusterSet, Corpus, Document, MentionAnnotation, Span
from .errors import ConfigError, InputError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CandidateSet:
    spans: tuple[Span, ...]
    max_width: int


def enumerate_candidates(doc: Document, max_width: int) -> CandidateSet:
    """All contiguous spans of width <= max_width, in document order."""
    if max_width < 1:
        raise InputError("max_width must be >= 1")
    n = len(doc)
    spans = tuple(
        Span(start, end)
        for start in range(n)
        for end in range(start, min(start + max_width, n))
    )
    return CandidateSet(spans, max_width)


class MentionDetector(nn.Module):
    """Feed-forward mention scorer over span representations."""

    def __init__(self, span_dim: int, hidden_dim: int = 64):
        super().__init__()
        self.ffn = nn.Sequential(
            nn.Linear(span_dim, hidden_dim),
            nn.ReLU(),
            nn.Linear(hidden_dim, 1),
        )

    def forward(self, span_matrix: torch.Tensor) -> torch.Tensor:
        return self.ffn(span_matrix).squeeze(-1)


@dataclass(frozen=True)
class MentionScores:
    spans: tuple[Span, ...]
    logits: torch.Tensor = field(repr=False)

    def __post_init__(self):
        if self.logits.shape != (len(self.spans),):
            raise InputError("one logit per candidate span required")

    @property
    def probabilities(self) -> torch.Tensor:
        return torch.sigmoid(self.logits)

    def logit(self, span: Span) -> float:
        return float(self.logits[self.spans.index(span)])

    def probability(self, span: Span) -> float:
        return float(torch.sigmoid(self.logits[self.spans.index(span)]))


def mention_scores(
    candidates: CandidateSet, span_matrix: torch.Tensor, detector: MentionDetector
) -> MentionScores:
    if span_matrix.shape[0] != len(candidates.spans):
        raise InputError(
            f"{len(candidates.spans)} candidates but {span_matrix.shape[0]} representations"
        )
    return MentionScores(candidates.spans, detector(span_matrix))


@dataclass(frozen=True)
class PrunedCandidates:
    """Spans surviving pruning, in document order; q == 0 means no threshold."""

    kept: tuple[Span, ...]
    M: int
    q: float = 0.0


def c2f_prune(
    candidates: CandidateSet, scores: MentionScores, lambda_keep: float, doc_length: int
) -> PrunedCandidates:
    """Keep the ceil(lambda_keep * T) highest-logit spans, earlier span wins ties."""
    if lambda_keep <= 0:
        raise InputError("lambda_keep must be positive")
    m = math.ceil(lambda_keep * doc_length)
    logits = scores.logits.detach().numpy()
    # stable sort on descending logit preserves document order among ties
    order = np.argsort(-logits, kind="stable")[:m]
    kept = tuple(candidates.spans[i] for i in sorted(order))
    return PrunedCandidates(kept, M=m, q=0.0)


def high_precision_prune(
    pruned: PrunedCandidates, scores: MentionScores, q: float
) -> PrunedCandidates:
    """Retain exactly the spans with probability strictly above q."""
    if not 0.0 <= q <= 1.0:
        raise InputError("q outside [0, 1]")
    if q == 0.0:
        return PrunedCandidates(pruned.kept, pruned.M, q=0.0)
    probs = {span: scores.probability(span) for span in pruned.kept}
    kept = tuple(s for s in pruned.kept if probs[s] > q)
    return PrunedCandidates(kept, pruned.M, q=q)


def prune(
    candidates: CandidateSet,
    scores: MentionScores,
    lambda_keep: float,
    doc_length: int,
    q: float,
) -> PrunedCandidates:
    """Coarse-to-fine pruning followed by the optional precision threshold."""
    return high_precision_prune(c2f_prune(candidates, scores, lambda_keep, doc_length), scores, q)


def wide_gold_spans(candidates: CandidateSet, gold: MentionAnnotation) -> list[Span]:
    """Gold mentions too wide to be candidates (excluded from the loss)."""
    return sorted(s for s in gold.mentions if s.width > candidates.max_width)


def md_loss(
    candidates: CandidateSet, scores: MentionScores, gold: MentionAnnotation
) -> torch.Tensor:
    """Summed binary cross-entropy between span probabilities and gold membership."""
    skipped = wide_gold_spans(candidates, gold)
    if skipped:
        log.warning(
            "%d gold mention(s) wider than max_width %d skipped in detection loss (%s)",
            len(skipped),
            candidates.max_width,
            gold.doc_id,
        )
    gold_set = gold.mentions
    targets = torch.tensor(
        [1.0 if s in gold_set else 0.0 for s in candidates.spans],
        dtype=scores.logits.dtype,
    )
    return nn.functional.binary_cross_entropy_with_logits(
        scores.logits, targets, reduction="sum"
    )


def tag_silver(corpus: Corpus, model, q: float) -> dict[str, MentionAnnotation]:
    """Machine-tag mentions on unlabeled documents with a trained detector.

    Silver mentions are the detector pipeline's surviving spans: top-M
    pruning followed by the precision threshold q.
    """
    out: dict[str, MentionAnnotation] = {}
    with torch.no_grad():
        for doc in corpus.documents:
            pruned = model.prune_document(doc, q=q)
            out[doc.doc_id] = MentionAnnotation(doc.doc_id, frozenset(pruned.kept))
    return out
