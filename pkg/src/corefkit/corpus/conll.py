"""CoNLL-2012-style coreference column format.

Reads the word and coreference columns; all other columns are tolerated and
ignored. Rows with eight or more whitespace-separated columns follow the
CoNLL-2012 layout (word in column 3); shorter rows put the word in column 0.
The coreference column is always the last one. Output uses minimal
``word coref`` rows, one ``#begin document``/``#end document`` block per
document.
"""

from __future__ import annotations

import io
import re
from typing import Iterable, TextIO, Union

from ..errors import FormatError, ValidationError
from .types import AnnotationStyle, ClusterSet, Corpus, Document, Span, derive_mentions

_BEGIN_RE = re.compile(r"^#begin document \((?P<name>[^)]*)\)(?:;\s*part\s+(?P<part>\d+))?\s*$")
_COREF_ITEM_RE = re.compile(r"^(\((?P<open>\d+)\)?|(?P<close>\d+)\))$")


def _as_lines(stream: Union[str, TextIO, Iterable[str]]) -> Iterable[str]:
    if isinstance(stream, str):
        return io.StringIO(stream)
    return stream


class _DocBuilder:
    def __init__(self, doc_id: str, start_line: int):
        self.doc_id = doc_id
        self.start_line = start_line
        self.tokens: list[str] = []
        self.open: dict[int, list[int]] = {}
        self.spans: dict[int, list[Span]] = {}

    def add_token(self, word: str, coref: str, line_no: int) -> None:
        pos = len(self.tokens)
        self.tokens.append(word)
        if coref in ("-", "_", ""):
            return
        for item in coref.split("|"):
            m = _COREF_ITEM_RE.match(item)
            if not m:
                raise FormatError(f"cannot parse coreference item {item!r}", line=line_no)
            if item.startswith("("):
                cid = int(m.group("open"))
                self.open.setdefault(cid, []).append(pos)
            if item.endswith(")"):
                cid = int(m.group("open") or m.group("close"))
                stack = self.open.get(cid)
                if not stack:
                    raise FormatError(
                        f"closing bracket for cluster {cid} with no matching open",
                        line=line_no,
                    )
                start = stack.pop()
                self.spans.setdefault(cid, []).append(Span(start, pos))

    def finish(self, line_no: int) -> tuple[Document, ClusterSet | None]:
        dangling = [cid for cid, stack in self.open.items() if stack]
        if dangling:
            raise FormatError(
                f"unclosed bracket for cluster(s) {sorted(dangling)} at end of "
                f"document {self.doc_id!r}",
                line=line_no,
            )
        if not self.tokens:
            raise FormatError(f"document {self.doc_id!r} has no token rows", line=line_no)
        doc = Document(self.doc_id, tuple(self.tokens))
        if not self.spans:
            return doc, None
        clusters = []
        for cid in sorted(self.spans):
            spans = self.spans[cid]
            if len(set(spans)) != len(spans):
                raise ValidationError(
                    f"duplicate span within cluster {cid} in document {self.doc_id!r}"
                )
            clusters.append(frozenset(spans))
        return doc, ClusterSet(self.doc_id, frozenset(clusters))


def parse_conll(
    stream: Union[str, TextIO, Iterable[str]],
    style: AnnotationStyle = AnnotationStyle(),
    split: str = "train",
    domain_tag: str = "",
) -> Corpus:
    """Parse CoNLL coreference columns into a Corpus.

    Cluster annotations become ClusterSets; mention annotations are derived
    as cluster unions. An empty stream yields an empty corpus. Token rows
    outside an explicit ``#begin document`` header form an implicit document
    named ``doc0``.
    """
    documents: list[Document] = []
    coref: dict[str, ClusterSet] = {}
    mentions = {}
    builder: _DocBuilder | None = None
    implicit_counter = 0
    line_no = 0

    def close(b: _DocBuilder, at_line: int) -> None:
        doc, clusters = b.finish(at_line)
        documents.append(doc)
        if clusters is not None:
            coref[doc.doc_id] = clusters
            mentions[doc.doc_id] = derive_mentions(clusters)

    for line_no, raw in enumerate(_as_lines(stream), start=1):
        line = raw.rstrip("\n")
        stripped = line.strip()
        if stripped.startswith("#begin document"):
            m = _BEGIN_RE.match(stripped)
            if not m:
                raise FormatError(f"malformed begin line {stripped!r}", line=line_no)
            if builder is not None:
                close(builder, line_no)
            name = m.group("name")
            part = int(m.group("part")) if m.group("part") else 0
            doc_id = name if part == 0 else f"{name}_part{part:03d}"
            builder = _DocBuilder(doc_id, line_no)
            continue
        if stripped == "#end document":
            if builder is None:
                raise FormatError("#end document with no open document", line=line_no)
            close(builder, line_no)
            builder = None
            continue
        if not stripped or stripped.startswith("#"):
            continue
        cols = stripped.split()
        if len(cols) < 2:
            raise FormatError(
                f"token row needs at least word and coreference columns: {stripped!r}",
                line=line_no,
            )
        word = cols[3] if len(cols) >= 8 else cols[0]
        if builder is None:
            builder = _DocBuilder(f"doc{implicit_counter}", line_no)
            implicit_counter += 1
        builder.add_token(word, cols[-1], line_no)

    if builder is not None:
        close(builder, line_no + 1)
    return Corpus(tuple(documents), mentions, coref, style=style, split=split)


def serialize_conll(corpus: Corpus) -> str:
    """Render cluster annotations back to the column format.

    Documents without a ClusterSet get all ``-`` coreference cells;
    mention-only annotations are not expressible in this format.
    """
    out = io.StringIO()
    for doc in corpus.documents:
        out.write(f"#begin document ({doc.doc_id}); part 000\n")
        opens: dict[int, list[int]] = {i: [] for i in range(len(doc))}
        closes: dict[int, list[int]] = {i: [] for i in range(len(doc))}
        units: dict[int, list[int]] = {i: [] for i in range(len(doc))}
        cs = corpus.coref_annotations.get(doc.doc_id)
        if cs is not None:
            for cid, cluster in enumerate(cs.sorted_clusters()):
                for span in cluster:
                    if span.start == span.end:
                        units[span.start].append(cid)
                    else:
                        opens[span.start].append((span.end, cid))
                        closes[span.end].append((span.start, cid))
        for i, word in enumerate(doc.tokens):
            items = []
            # wider spans open first, narrower spans close first
            for _, cid in sorted(opens[i], key=lambda t: (-t[0], t[1])):
                items.append(f"({cid}")
            for cid in sorted(units[i]):
                items.append(f"({cid})")
            for _, cid in sorted(closes[i], key=lambda t: (-t[0], t[1])):
                items.append(f"{cid})")
            cell = "|".join(items) if items else "-"
            out.write(f"{word} {cell}\n")
        out.write("#end document\n")
    return out.getvalue()
