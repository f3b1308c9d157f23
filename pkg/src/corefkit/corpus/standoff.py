"""Line-delimited standoff format: one JSON record per document.

Record fields: ``doc_id`` (string), ``tokens`` (array of strings),
``mentions`` (array of [start, end] pairs, optional), ``clusters`` (array of
arrays of [start, end] pairs, optional), ``domain`` (string, optional).
Unknown fields (e.g. ``provenance``) are tolerated. This is the only format
that can carry mention-only annotations.
"""

from __future__ import annotations

import io
import json
from typing import Iterable, TextIO, Union

from ..errors import FormatError, ValidationError
from .types import AnnotationStyle, ClusterSet, Corpus, Document, MentionAnnotation


def _as_lines(stream: Union[str, TextIO, Iterable[str]]) -> Iterable[str]:
    if isinstance(stream, str):
        return io.StringIO(stream)
    return stream


def parse_standoff(
    stream: Union[str, TextIO, Iterable[str]],
    style: AnnotationStyle = AnnotationStyle(),
    split: str = "train",
) -> Corpus:
    """Parse standoff records into a Corpus with whatever annotations are present."""
    documents = []
    mentions = {}
    coref = {}
    for line_no, raw in enumerate(_as_lines(stream), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise FormatError(f"invalid JSON: {e.msg}", line=line_no) from e
        if not isinstance(record, dict):
            raise FormatError("record is not an object", line=line_no)
        try:
            doc_id = record["doc_id"]
            tokens = record["tokens"]
        except KeyError as e:
            raise FormatError(f"record missing field {e.args[0]!r}", line=line_no) from e
        if not isinstance(doc_id, str) or not isinstance(tokens, list):
            raise FormatError("doc_id must be a string and tokens an array", line=line_no)
        doc = Document(doc_id, tuple(str(t) for t in tokens), domain_tag=record.get("domain", ""))
        documents.append(doc)
        try:
            if record.get("mentions") is not None:
                mentions[doc_id] = MentionAnnotation.from_pairs(doc_id, record["mentions"])
            if record.get("clusters") is not None:
                coref[doc_id] = ClusterSet.from_lists(doc_id, record["clusters"])
        except (ValidationError, TypeError, ValueError) as e:
            raise ValidationError(f"document {doc_id!r}: {e}") from e
    return Corpus(tuple(documents), mentions, coref, style=style, split=split)


def document_record(corpus: Corpus, doc: Document, extra: dict | None = None) -> dict:
    record: dict = {"doc_id": doc.doc_id}
    if doc.domain_tag:
        record["domain"] = doc.domain_tag
    record["tokens"] = list(doc.tokens)
    anno = corpus.mention_annotations.get(doc.doc_id)
    if anno is not None:
        record["mentions"] = [[s.start, s.end] for s in anno.sorted_mentions()]
    cs = corpus.coref_annotations.get(doc.doc_id)
    if cs is not None:
        record["clusters"] = [
            [[s.start, s.end] for s in cluster] for cluster in cs.sorted_clusters()
        ]
    if extra:
        record.update(extra)
    return record


def serialize_standoff(corpus: Corpus, extra: dict | None = None) -> str:
    """Render a corpus as line-delimited records with deterministic ordering."""
    out = io.StringIO()
    for doc in corpus.documents:
        out.write(json.dumps(document_record(corpus, doc, extra)))
        out.write("\n")
    return out.getvalue()
