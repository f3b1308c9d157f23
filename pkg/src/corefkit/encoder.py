"""Token encoder, span representations, and the masked-token objective.

A desk-scale stand-in for a pretrained encoder: token embeddings feed a
small stack of bidirectional recurrent layers. Documents longer than the
maximum segment length are encoded in independent non-overlapping segments.
Tokenization is whitespace tokens against a closed vocabulary with a
reserved unknown id; masking replaces a token with the reserved mask id and
the model predicts the original id with cross-entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import torch
from torch import nn

from .corpus.types import Document, Span
from .errors import ConfigError, ValidationError

MASK_RATE = 0.15


@dataclass(frozen=True)
class EncoderConfig:
    vocab_size: int = 4000
    embedding_dim: int = 32
    context_layers: int = 1
    hidden_dim: int = 64
    max_segment_length: int = 512
    width_buckets: int = 10
    seed: int = 0

    def __post_init__(self):
        dims = (
            self.vocab_size,
            self.embedding_dim,
            self.context_layers,
            self.hidden_dim,
            self.width_buckets,
        )
        if any(d < 1 for d in dims):
            raise ConfigError("encoder dimensions must be positive")
        if self.max_segment_length < 1:
            raise ConfigError("max_segment_length must be >= 1")
        if self.hidden_dim % 2 != 0:
            raise ConfigError("hidden_dim must be even (bidirectional halves)")


class Vocabulary:
    """Closed token vocabulary with reserved unknown and mask ids."""

    UNK = 0
    MASK = 1
    RESERVED = ("<unk>", "<mask>")

    def __init__(self, types: Sequence[str]):
        self.types = tuple(types)
        self.index = {t: i + len(self.RESERVED) for i, t in enumerate(self.types)}

    def __len__(self) -> int:
        return len(self.types) + len(self.RESERVED)

    @classmethod
    def build(cls, token_sources: Iterable[Iterable[str]], max_size: int) -> "Vocabulary":
        """Frequency-capped vocabulary; ties broken lexicographically."""
        counts: dict[str, int] = {}
        for tokens in token_sources:
            for t in tokens:
                counts[t] = counts.get(t, 0) + 1
        ordered = sorted(counts, key=lambda t: (-counts[t], t))
        return cls(ordered[: max(0, max_size - len(cls.RESERVED))])

    def encode(self, tokens: Sequence[str]) -> torch.Tensor:
        return torch.tensor([self.index.get(t, self.UNK) for t in tokens], dtype=torch.long)


@dataclass(frozen=True)
class MaskingPlan:
    masked_positions: tuple[int, ...]
    original_tokens: Mapping[int, int]

    def __len__(self) -> int:
        return len(self.masked_positions)


def make_masking_plan(
    doc: Document, vocab: Vocabulary, rate: float = MASK_RATE, seed: int = 0
) -> MaskingPlan:
    """Sample round-half-up(rate * T) positions to mask; deterministic per seed."""
    n = len(doc)
    count = int(math.floor(rate * n + 0.5))
    rng = np.random.Generator(np.random.PCG64(seed))
    positions = tuple(sorted(int(p) for p in rng.choice(n, size=count, replace=False)))
    ids = vocab.encode(doc.tokens)
    return MaskingPlan(positions, {p: int(ids[p]) for p in positions})


@dataclass(frozen=True)
class SpanRepresentation:
    span: Span
    vector: np.ndarray = field(repr=False)


class Encoder(nn.Module):
    """Embedding + bidirectional recurrent context + span composition heads."""

    def __init__(self, config: EncoderConfig):
        super().__init__()
        self.config = config
        self.embedding = nn.Embedding(config.vocab_size, config.embedding_dim)
        self.context = nn.LSTM(
            config.embedding_dim,
            config.hidden_dim // 2,
            num_layers=config.context_layers,
            bidirectional=True,
            batch_first=True,
        )
        self.head_scorer = nn.Linear(config.hidden_dim, 1)
        self.width_embedding = nn.Embedding(config.width_buckets, config.embedding_dim)
        self.mlm_head = nn.Linear(config.hidden_dim, config.vocab_size)

    @property
    def span_dim(self) -> int:
        return 3 * self.config.hidden_dim + self.config.embedding_dim

    def encode_ids(self, ids: torch.Tensor) -> torch.Tensor:
        """One context vector per token; independent fixed-length segments."""
        if ids.numel() == 0:
            raise ValidationError("cannot encode an empty document")
        seg = self.config.max_segment_length
        outputs = []
        for start in range(0, ids.numel(), seg):
            chunk = ids[start : start + seg]
            emb = self.embedding(chunk).unsqueeze(0)
            out, _ = self.context(emb)
            outputs.append(out.squeeze(0))
        return torch.cat(outputs, dim=0)

    def width_bucket(self, width: int) -> int:
        return min(width, self.config.width_buckets) - 1

    def span_matrix(self, vectors: torch.Tensor, spans: Sequence[Span]) -> torch.Tensor:
        """Stacked span representations, shape (n_spans, span_dim).

        Each row is [start vector; end vector; attention-weighted token sum;
        width-bucket embedding].
        """
        if len(spans) == 0:
            return vectors.new_zeros((0, self.span_dim))
        starts = torch.tensor([s.start for s in spans])
        ends = torch.tensor([s.end for s in spans])
        max_w = int((ends - starts).max().item()) + 1
        offsets = torch.arange(max_w)
        token_idx = starts.unsqueeze(1) + offsets.unsqueeze(0)
        mask = token_idx <= ends.unsqueeze(1)
        token_idx = token_idx.clamp(max=vectors.shape[0] - 1)
        span_tokens = vectors[token_idx]  # (n, max_w, h)
        scores = self.head_scorer(span_tokens).squeeze(-1)
        scores = scores.masked_fill(~mask, float("-inf"))
        attn = torch.softmax(scores, dim=1)
        head = torch.einsum("nw,nwh->nh", attn, span_tokens)
        buckets = torch.tensor([self.width_bucket(s.width) for s in spans])
        width_emb = self.width_embedding(buckets)
        return torch.cat([vectors[starts], vectors[ends], head, width_emb], dim=1)

    def span_attention(self, vectors: torch.Tensor, span: Span) -> torch.Tensor:
        """Attention weights over one span's tokens (sums to 1)."""
        tokens = vectors[span.start : span.end + 1]
        return torch.softmax(self.head_scorer(tokens).squeeze(-1), dim=0)


def encode(doc: Document, encoder: Encoder, vocab: Vocabulary) -> torch.Tensor:
    """Contextual vectors for a document's tokens."""
    return encoder.encode_ids(vocab.encode(doc.tokens))


def span_representation(
    token_vectors: torch.Tensor, span: Span, encoder: Encoder
) -> SpanRepresentation:
    """Single-span convenience wrapper over Encoder.span_matrix."""
    if span.end >= token_vectors.shape[0]:
        raise ValidationError(f"span ({span.start}, {span.end}) out of bounds")
    row = encoder.span_matrix(token_vectors, [span])[0]
    return SpanRepresentation(span, row.detach().numpy())


def mlm_loss(
    doc: Document, plan: MaskingPlan, encoder: Encoder, vocab: Vocabulary
) -> torch.Tensor:
    """Mean cross-entropy of recovering original ids at masked positions."""
    if len(plan) == 0:
        return torch.zeros((), dtype=next(encoder.parameters()).dtype)
    ids = vocab.encode(doc.tokens)
    for p in plan.masked_positions:
        if p >= ids.numel():
            raise ValidationError(f"masked position {p} out of bounds")
        ids[p] = Vocabulary.MASK
    vectors = encoder.encode_ids(ids)
    positions = torch.tensor(plan.masked_positions, dtype=torch.long)
    logits = encoder.mlm_head(vectors[positions])
    targets = torch.tensor(
        [plan.original_tokens[p] for p in plan.masked_positions], dtype=torch.long
    )
    return nn.functional.cross_entropy(logits, targets, reduction="mean")
