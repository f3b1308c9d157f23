"""Synthetic two-domain corpora for desk-scale transfer experiments.

Each document mixes filler tokens with entity mentions. An entity is a
lexeme family (first, last) drawn from a name vocabulary disjoint from the
filler vocabulary; its mentions surface as ``[last]`` or ``[first, last]``,
so mentionhood is learnable from token identity plus context and coreference
is learnable from the shared family token. The target domain draws a
``lexicon_shift`` fraction of its filler tokens and lexeme families from a
reserved target-only vocabulary partition, which realizes the requested
out-of-vocabulary rate against the source domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
import yaml

from ..errors import SyntheticSpecError
from .types import AnnotationStyle, ClusterSet, Corpus, Document, Span, derive_mentions

DOMAINS = ("source", "target")

# surface-form constant, not a spec knob: P(mention is [first, last] vs [last])
_TWO_TOKEN_RATE = 0.4


@dataclass(frozen=True)
class SyntheticSpec:
    n_docs: int = 50
    doc_length_min: int = 60
    doc_length_max: int = 100
    entities_per_doc_min: int = 3
    entities_per_doc_max: int = 6
    mentions_per_entity_min: int = 2
    mentions_per_entity_max: int = 4
    singleton_rate: float = 0.25
    name_vocab_size: int = 150
    filler_vocab_size: int = 400
    lexicon_shift: float = 0.3

    def __post_init__(self):
        if min(self.n_docs, self.doc_length_min, self.entities_per_doc_min) < 1:
            raise SyntheticSpecError("counts and lengths must be positive")
        if self.doc_length_max < self.doc_length_min:
            raise SyntheticSpecError("doc_length_max < doc_length_min")
        if self.entities_per_doc_max < self.entities_per_doc_min:
            raise SyntheticSpecError("entities_per_doc_max < entities_per_doc_min")
        if self.mentions_per_entity_min < 2:
            raise SyntheticSpecError("mentions_per_entity_min must be >= 2 (non-singletons)")
        if self.mentions_per_entity_max < self.mentions_per_entity_min:
            raise SyntheticSpecError("mentions_per_entity_max < mentions_per_entity_min")
        if not 0.0 <= self.singleton_rate <= 1.0:
            raise SyntheticSpecError("singleton_rate outside [0, 1]")
        if not 0.0 <= self.lexicon_shift <= 1.0:
            raise SyntheticSpecError("lexicon_shift outside [0, 1]")
        # worst-case document must fit: every entity at max mentions, width 2
        worst = self.entities_per_doc_max * self.mentions_per_entity_max * 2
        if worst > self.doc_length_min:
            raise SyntheticSpecError(
                f"infeasible spec: up to {worst} mention tokens cannot fit in a "
                f"document of {self.doc_length_min} tokens"
            )
        if self.entities_per_doc_max * 2 + 2 > self.name_vocab_size:
            raise SyntheticSpecError("name vocabulary too small for entities_per_doc_max")


def load_synthetic_spec(path: Union[str, Path]) -> SyntheticSpec:
    """Load the flat key-value spec file (unknown keys rejected)."""
    raw = yaml.safe_load(Path(path).read_text()) or {}
    if not isinstance(raw, dict):
        raise SyntheticSpecError(f"{path}: spec file must be a flat mapping")
    known = set(SyntheticSpec.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise SyntheticSpecError(f"{path}: unknown spec keys {sorted(unknown)}")
    return SyntheticSpec(**raw)


def _pools(size: int, shift: float) -> tuple[np.ndarray, np.ndarray]:
    """Partition type indices into (shared, target_only) pools."""
    n_target = min(size - 1, max(1, round(shift * size))) if shift > 0 else 0
    shared = np.arange(0, size - n_target)
    target_only = np.arange(size - n_target, size)
    return shared, target_only


class _SingletonQuota:
    """Deterministic allocation keeping the realized singleton rate within 1/n."""

    def __init__(self, rate: float):
        self.rate = rate
        self.entities = 0
        self.singletons = 0

    def next_is_singleton(self) -> bool:
        self.entities += 1
        want = self.singletons + 1 <= self.rate * self.entities
        if want:
            self.singletons += 1
        return want


def generate_synthetic_corpus(
    spec: SyntheticSpec,
    seed: int,
    domain: str = "source",
    split: str = "train",
    n_docs: int | None = None,
) -> Corpus:
    """Generate one domain/split corpus; a pure function of its arguments."""
    if domain not in DOMAINS:
        raise SyntheticSpecError(f"unknown domain {domain!r}")
    splits = ("train", "dev", "test")
    if split not in splits:
        raise SyntheticSpecError(f"unknown split {split!r}")
    n_docs = spec.n_docs if n_docs is None else n_docs
    rng = np.random.Generator(
        np.random.PCG64(
            np.random.SeedSequence((seed, DOMAINS.index(domain), splits.index(split)))
        )
    )
    shift = spec.lexicon_shift if domain == "target" else 0.0
    name_shared, name_target = _pools(spec.name_vocab_size, spec.lexicon_shift)
    filler_shared, filler_target = _pools(spec.filler_vocab_size, spec.lexicon_shift)

    quota = _SingletonQuota(spec.singleton_rate)
    documents = []
    coref = {}
    mentions = {}
    for d in range(n_docs):
        doc_id = f"{domain}-{split}-{d:04d}"
        length = int(rng.integers(spec.doc_length_min, spec.doc_length_max + 1))
        n_entities = int(rng.integers(spec.entities_per_doc_min, spec.entities_per_doc_max + 1))

        families = []
        used: set[int] = set()
        for _ in range(n_entities):
            pool = name_target if (shift > 0 and rng.random() < shift) else name_shared
            fam = []
            while len(fam) < 2:
                t = int(rng.choice(pool))
                if t not in used:
                    used.add(t)
                    fam.append(t)
            families.append((fam[0], fam[1]))

        blocks: list[tuple[int, list[int]]] = []
        for e, (first, last) in enumerate(families):
            if quota.next_is_singleton():
                count = 1
            else:
                count = int(
                    rng.integers(spec.mentions_per_entity_min, spec.mentions_per_entity_max + 1)
                )
            for _ in range(count):
                if rng.random() < _TWO_TOKEN_RATE:
                    blocks.append((e, [first, last]))
                else:
                    blocks.append((e, [last]))

        mention_tokens = sum(len(toks) for _, toks in blocks)
        n_filler = length - mention_tokens
        items: list[tuple[int, list[int]]] = list(blocks)
        for _ in range(n_filler):
            pool = filler_target if (shift > 0 and rng.random() < shift) else filler_shared
            items.append((-1, [int(rng.choice(pool))]))
        order = rng.permutation(len(items))

        tokens: list[str] = []
        spans_by_entity: dict[int, list[Span]] = {}
        for idx in order:
            entity, toks = items[idx]
            start = len(tokens)
            for t in toks:
                prefix = "n" if entity >= 0 else "w"
                tokens.append(f"{prefix}{t:04d}")
            if entity >= 0:
                spans_by_entity.setdefault(entity, []).append(Span(start, len(tokens) - 1))

        doc = Document(doc_id, tuple(tokens), domain_tag=domain)
        clusters = frozenset(frozenset(s) for s in spans_by_entity.values())
        cluster_set = ClusterSet(doc_id, clusters)
        documents.append(doc)
        coref[doc_id] = cluster_set
        mentions[doc_id] = derive_mentions(cluster_set)

    style = AnnotationStyle(singletons_annotated=spec.singleton_rate > 0)
    return Corpus(tuple(documents), mentions, coref, style=style, split=split)


def generate_domain_pair(
    spec: SyntheticSpec,
    seed: int,
    split_sizes: dict[str, dict[str, int]] | None = None,
) -> dict[str, dict[str, Corpus]]:
    """Generate all six corpora: {source, target} x {train, dev, test}.

    `split_sizes` maps domain -> split -> document count; defaults to
    spec.n_docs for train and n_docs // 4 for dev/test.
    """
    out: dict[str, dict[str, Corpus]] = {}
    for domain in DOMAINS:
        out[domain] = {}
        for split in ("train", "dev", "test"):
            sizes = (split_sizes or {}).get(domain, {})
            n = sizes.get(split, spec.n_docs if split == "train" else max(2, spec.n_docs // 4))
            out[domain][split] = generate_synthetic_corpus(
                spec, seed, domain=domain, split=split, n_docs=n
            )
    return out
