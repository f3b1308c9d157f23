"""Core data model: documents, mention annotations, and coreference clusters.

All objects are immutable after construction and validate their invariants
eagerly, so downstream code can assume well-formed data. Spans are token
ranges, inclusive on both ends. Nested and overlapping mentions are legal;
the only rejected duplication is the same (start, end) span appearing twice
within one cluster set or one mention set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from ..errors import ValidationError

SPLITS = ("train", "dev", "test")


@dataclass(frozen=True, order=True)
class Span:
    """Contiguous token range [start, end], 0-based, inclusive."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start <= self.end):
            raise ValidationError(f"invalid span ({self.start}, {self.end})")

    @property
    def width(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class Document:
    doc_id: str
    tokens: tuple[str, ...]
    domain_tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValidationError(f"document {self.doc_id!r} has no tokens")

    def __len__(self) -> int:
        return len(self.tokens)


def _check_bounds(spans: Iterable[Span], doc: Document, what: str) -> None:
    for s in spans:
        if s.end >= len(doc):
            raise ValidationError(
                f"{what} span ({s.start}, {s.end}) out of bounds for "
                f"document {doc.doc_id!r} of length {len(doc)}"
            )


@dataclass(frozen=True)
class MentionAnnotation:
    """Mention-only annotation: the set of gold mention spans of a document."""

    doc_id: str
    mentions: frozenset[Span]

    def __post_init__(self):
        object.__setattr__(self, "mentions", frozenset(self.mentions))

    @staticmethod
    def from_pairs(doc_id: str, pairs: Sequence[Sequence[int]]) -> "MentionAnnotation":
        spans = [Span(int(a), int(b)) for a, b in pairs]
        if len(set(spans)) != len(spans):
            raise ValidationError(f"duplicate mention span in document {doc_id!r}")
        return MentionAnnotation(doc_id, frozenset(spans))

    def sorted_mentions(self) -> list[Span]:
        return sorted(self.mentions)


@dataclass(frozen=True)
class ClusterSet:
    """Disjoint mention clusters over one document; singletons permitted."""

    doc_id: str
    clusters: frozenset[frozenset[Span]]

    def __post_init__(self):
        clusters = frozenset(frozenset(c) for c in self.clusters)
        object.__setattr__(self, "clusters", clusters)
        seen: set[Span] = set()
        for cluster in clusters:
            if not cluster:
                raise ValidationError(f"empty cluster in document {self.doc_id!r}")
            for span in cluster:
                if span in seen:
                    raise ValidationError(
                        f"span ({span.start}, {span.end}) belongs to more than "
                        f"one cluster in document {self.doc_id!r}"
                    )
                seen.add(span)

    @staticmethod
    def from_lists(doc_id: str, lists: Sequence[Sequence[Sequence[int]]]) -> "ClusterSet":
        clusters = []
        for raw in lists:
            spans = [Span(int(a), int(b)) for a, b in raw]
            if len(set(spans)) != len(spans):
                raise ValidationError(f"duplicate span within a cluster in document {doc_id!r}")
            clusters.append(frozenset(spans))
        return ClusterSet(doc_id, frozenset(clusters))

    def mentions(self) -> frozenset[Span]:
        """Union of all clusters' spans."""
        out: set[Span] = set()
        for c in self.clusters:
            out |= c
        return frozenset(out)

    def sorted_clusters(self) -> list[list[Span]]:
        """Deterministic nested-list view (clusters by first span, spans sorted)."""
        return sorted((sorted(c) for c in self.clusters), key=lambda c: (c[0], len(c), c))

    def num_mentions(self) -> int:
        return sum(len(c) for c in self.clusters)


@dataclass(frozen=True)
class AnnotationStyle:
    """Declares whether singletons are annotated and which entity categories apply.

    Categories are carried as metadata only; they never restrict scoring.
    """

    singletons_annotated: bool = True
    entity_categories: Optional[frozenset[str]] = None

    def __post_init__(self):
        if self.entity_categories is not None:
            object.__setattr__(self, "entity_categories", frozenset(self.entity_categories))


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    mention_annotations: Mapping[str, MentionAnnotation] = field(default_factory=dict)
    coref_annotations: Mapping[str, ClusterSet] = field(default_factory=dict)
    style: AnnotationStyle = AnnotationStyle()
    split: str = "train"

    def __post_init__(self):
        object.__setattr__(self, "documents", tuple(self.documents))
        object.__setattr__(self, "mention_annotations", dict(self.mention_annotations))
        object.__setattr__(self, "coref_annotations", dict(self.coref_annotations))
        if self.split not in SPLITS:
            raise ValidationError(f"unknown split {self.split!r}")
        by_id: dict[str, Document] = {}
        for doc in self.documents:
            if doc.doc_id in by_id:
                raise ValidationError(f"duplicate doc_id {doc.doc_id!r}")
            by_id[doc.doc_id] = doc
        object.__setattr__(self, "_by_id", by_id)
        for name, annos in (
            ("mention", self.mention_annotations),
            ("coreference", self.coref_annotations),
        ):
            for doc_id, anno in annos.items():
                if doc_id not in by_id:
                    raise ValidationError(
                        f"{name} annotation refers to unknown document {doc_id!r}"
                    )
                if anno.doc_id != doc_id:
                    raise ValidationError(
                        f"{name} annotation keyed {doc_id!r} carries doc_id {anno.doc_id!r}"
                    )
        for doc_id, anno in self.mention_annotations.items():
            _check_bounds(anno.mentions, by_id[doc_id], "mention")
        for doc_id, cs in self.coref_annotations.items():
            _check_bounds(cs.mentions(), by_id[doc_id], "cluster")

    def __len__(self) -> int:
        return len(self.documents)

    def document(self, doc_id: str) -> Document:
        return self._by_id[doc_id]

    def doc_ids(self) -> list[str]:
        return [d.doc_id for d in self.documents]

    def total_mentions(self) -> int:
        """Annotated mention instances: cluster members, else mention spans."""
        total = 0
        for doc in self.documents:
            if doc.doc_id in self.coref_annotations:
                total += self.coref_annotations[doc.doc_id].num_mentions()
            elif doc.doc_id in self.mention_annotations:
                total += len(self.mention_annotations[doc.doc_id].mentions)
        return total


def derive_mentions(cluster_set: ClusterSet) -> MentionAnnotation:
    """Mention-only view of a cluster annotation: the union of its clusters."""
    return MentionAnnotation(cluster_set.doc_id, cluster_set.mentions())
