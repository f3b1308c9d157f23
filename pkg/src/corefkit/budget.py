"""Annotation-time model and budget planning.

Per-document annotation seconds come from a three-class timing table
(short/medium/long documents, mention vs full-coreference task). The
default constants are from timed annotation experiments on medical notes;
users with their own timing studies can override the table, including the
published overall speedup factor used for fraction conversion (e.g. 1.95
for a different domain).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .corpus.types import Corpus, Document
from .errors import InputError

TASKS = ("mention", "coreference")
LENGTH_CLASSES = ("short", "medium", "long")


@dataclass(frozen=True)
class TimingTable:
    """Per-length-class seconds for each task plus the published overall speedup.

    `boundaries` are the token-count cutoffs between short/medium and
    medium/long documents. `overall_speedup` is the coreference-to-mention
    time ratio used by fraction conversion; it is carried as published
    (rounded) rather than recomputed from the seconds.
    """

    coref_seconds: dict[str, float]
    mention_seconds: dict[str, float]
    boundaries: tuple[int, int] = (350, 650)
    overall_speedup: float = 1.85

    def __post_init__(self):
        for table in (self.coref_seconds, self.mention_seconds):
            if set(table) != set(LENGTH_CLASSES):
                raise InputError(f"timing table needs classes {LENGTH_CLASSES}")
            if any(v <= 0 for v in table.values()):
                raise InputError("annotation times must be positive")
        for cls in LENGTH_CLASSES:
            if self.mention_seconds[cls] > self.coref_seconds[cls]:
                raise InputError(f"mention time exceeds coreference time for {cls!r} class")
        if not self.boundaries[0] < self.boundaries[1]:
            raise InputError("length-class boundaries must be increasing")

    def length_class(self, n_tokens: int) -> str:
        if n_tokens < self.boundaries[0]:
            return "short"
        if n_tokens < self.boundaries[1]:
            return "medium"
        return "long"

    def speedup(self, cls: str) -> float:
        return self.coref_seconds[cls] / self.mention_seconds[cls]


def default_timing() -> TimingTable:
    """Timing constants measured on medical notes (~200/~500/~800-word docs)."""
    return TimingTable(
        coref_seconds={"short": 287.3, "medium": 582.5, "long": 1306.1},
        mention_seconds={"short": 186.1, "medium": 408.8, "long": 649.5},
        boundaries=(350, 650),
        overall_speedup=1.85,
    )


def estimate(doc: Document, task: str, table: TimingTable | None = None) -> float:
    """Estimated annotation seconds for one document and task."""
    if task not in TASKS:
        raise InputError(f"unknown task {task!r}")
    table = table or default_timing()
    cls = table.length_class(len(doc))
    return table.coref_seconds[cls] if task == "coreference" else table.mention_seconds[cls]


@dataclass(frozen=True)
class BudgetPlan:
    task: str
    total_seconds: float
    entries: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    @property
    def doc_ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.entries]

    @property
    def spent_seconds(self) -> float:
        return sum(seconds for _, seconds in self.entries)

    @property
    def residual_seconds(self) -> float:
        return self.total_seconds - self.spent_seconds


def plan(
    corpus: Corpus | Iterable[Document],
    task: str,
    budget_seconds: float,
    table: TimingTable | None = None,
) -> BudgetPlan:
    """Greedily select documents in corpus order until the budget is exhausted.

    Deterministic: randomized document sampling is realized by shuffling the
    corpus order under the caller's seed before planning.
    """
    if budget_seconds < 0:
        raise InputError("budget must be nonnegative")
    table = table or default_timing()
    docs = corpus.documents if isinstance(corpus, Corpus) else tuple(corpus)
    entries = []
    spent = 0.0
    for doc in docs:
        cost = estimate(doc, task, table)
        if spent + cost > budget_seconds:
            break
        entries.append((doc.doc_id, cost))
        spent += cost
    return BudgetPlan(task=task, total_seconds=budget_seconds, entries=tuple(entries))


def equivalent_fractions(coref_fraction: float, table: TimingTable | None = None) -> float:
    """Mention-annotation fraction matching a coreference fraction in time.

    Uses the table's published overall speedup (default 1.85), clipped to 1.
    """
    if not 0.0 <= coref_fraction <= 1.0:
        raise InputError("coref_fraction outside [0, 1]")
    table = table or default_timing()
    return min(1.0, coref_fraction * table.overall_speedup)
