from .conll import parse_conll, serialize_conll
from .standoff import parse_standoff, serialize_standoff
from .synthetic import (
    SyntheticSpec,
    generate_domain_pair,
    generate_synthetic_corpus,
    load_synthetic_spec,
)
from .types import (
    AnnotationStyle,
    ClusterSet,
    Corpus,
    Document,
    MentionAnnotation,
    Span,
    derive_mentions,
)

__all__ = [
    "AnnotationStyle",
    "ClusterSet",
    "Corpus",
    "Document",
    "MentionAnnotation",
    "Span",
    "SyntheticSpec",
    "derive_mentions",
    "generate_domain_pair",
    "generate_synthetic_corpus",
    "load_synthetic_spec",
    "parse_conll",
    "parse_standoff",
    "serialize_conll",
    "serialize_standoff",
]
