"""Edge-level F1 and per-parent-category accuracy between tree sets.

The deterministic DCT attachment is excluded from the primary metrics
(every system gets it right by construction); ``f1_with_root_edge``
keeps it for comparability with edge counts that include it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .core import (
    DCT_ID,
    Document,
    DocumentMismatch,
    MentionKind,
    TemporalDependencyTree,
)

# Category keys partition scored children by their GOLD parent's kind.
CATEGORIES = ("dct", "timex", "event", "root")

_KIND_TO_CATEGORY = {
    MentionKind.DCT: "dct",
    MentionKind.TIMEX: "timex",
    MentionKind.EVENT: "event",
    MentionKind.ROOT: "root",
}


@dataclass(frozen=True)
class CategoryCounts:
    correct: int = 0
    total: int = 0

    @property
    def accuracy(self) -> float | None:
        if self.total == 0:
            return None
        return self.correct / self.total

    def __add__(self, other: "CategoryCounts") -> "CategoryCounts":
        return CategoryCounts(self.correct + other.correct, self.total + other.total)


@dataclass(frozen=True)
class EvalCounts:
    correct: int = 0
    unlabeled_correct: int = 0
    predicted: int = 0
    gold: int = 0

    def __add__(self, other: "EvalCounts") -> "EvalCounts":
        return EvalCounts(
            self.correct + other.correct,
            self.unlabeled_correct + other.unlabeled_correct,
            self.predicted + other.predicted,
            self.gold + other.gold,
        )


def _f1(correct: int, predicted: int, gold: int) -> float:
    denominator = predicted + gold
    if denominator == 0:
        return 0.0
    return 2 * correct / denominator


@dataclass(frozen=True)
class EvalReport:
    counts: EvalCounts
    counts_with_root_edge: EvalCounts
    category_counts: dict[str, CategoryCounts] = field(default_factory=dict)

    @property
    def f1(self) -> float:
        return _f1(self.counts.correct, self.counts.predicted, self.counts.gold)

    @property
    def unlabeled_f1(self) -> float:
        return _f1(self.counts.unlabeled_correct, self.counts.predicted, self.counts.gold)

    @property
    def accuracy(self) -> float:
        if self.counts.gold == 0:
            return 0.0
        return self.counts.correct / self.counts.gold

    @property
    def f1_with_root_edge(self) -> float:
        c = self.counts_with_root_edge
        return _f1(c.correct, c.predicted, c.gold)

    @property
    def category_accuracy(self) -> dict[str, float | None]:
        return {key: counts.accuracy for key, counts in self.category_counts.items()}

    def as_dict(self) -> dict:
        return {
            "f1": self.f1,
            "unlabeled_f1": self.unlabeled_f1,
            "accuracy": self.accuracy,
            "f1_with_root_edge": self.f1_with_root_edge,
            "counts": {
                "correct": self.counts.correct,
                "unlabeled_correct": self.counts.unlabeled_correct,
                "predicted": self.counts.predicted,
                "gold": self.counts.gold,
            },
            "category_accuracy": self.category_accuracy,
            "category_counts": {
                key: {"correct": c.correct, "total": c.total}
                for key, c in self.category_counts.items()
            },
        }


def _index_by_doc(trees: Sequence[TemporalDependencyTree], side: str) -> dict[str, TemporalDependencyTree]:
    indexed: dict[str, TemporalDependencyTree] = {}
    for tree in trees:
        if tree.doc_id in indexed:
            raise DocumentMismatch(f"duplicate {side} tree for {tree.doc_id}")
        indexed[tree.doc_id] = tree
    return indexed


def evaluate(
    predicted: Sequence[TemporalDependencyTree],
    gold: Sequence[TemporalDependencyTree],
    docs: Sequence[Document],
) -> EvalReport:
    """Score predicted against gold trees over the same document set.

    An edge is correct when (child, parent, label) all match; the
    unlabeled variant drops the label. Category accuracies partition
    children by their gold parent's kind.
    """
    predicted_by_doc = _index_by_doc(predicted, "predicted")
    gold_by_doc = _index_by_doc(gold, "gold")
    docs_by_id: Mapping[str, Document] = {doc.doc_id: doc for doc in docs}
    if set(predicted_by_doc) != set(gold_by_doc):
        only_predicted = sorted(set(predicted_by_doc) - set(gold_by_doc))
        only_gold = sorted(set(gold_by_doc) - set(predicted_by_doc))
        raise DocumentMismatch(
            f"document sets differ (only predicted: {only_predicted}, only gold: {only_gold})"
        )
    missing_docs = sorted(set(gold_by_doc) - set(docs_by_id))
    if missing_docs:
        raise DocumentMismatch(f"no document provided for {missing_docs}")

    counts = EvalCounts()
    counts_with_root = EvalCounts()
    categories = {key: CategoryCounts() for key in CATEGORIES}
    for doc_id, gold_tree in gold_by_doc.items():
        doc = docs_by_id[doc_id]
        predicted_tree = predicted_by_doc[doc_id]
        gold_edges = {e.child: e for e in gold_tree.edges if e.child != DCT_ID}
        predicted_edges = {e.child: e for e in predicted_tree.edges if e.child != DCT_ID}
        correct = sum(1 for c, e in predicted_edges.items() if gold_edges.get(c) == e)
        unlabeled = sum(
            1
            for c, e in predicted_edges.items()
            if c in gold_edges and gold_edges[c].parent == e.parent
        )
        counts = counts + EvalCounts(correct, unlabeled, len(predicted_edges), len(gold_edges))

        gold_root = {e.child: e for e in gold_tree.edges if e.child == DCT_ID}
        predicted_root = {e.child: e for e in predicted_tree.edges if e.child == DCT_ID}
        root_correct = sum(
            1 for c, e in predicted_root.items() if gold_root.get(c) == e
        )
        counts_with_root = counts_with_root + EvalCounts(
            correct + root_correct,
            unlabeled + sum(
                1
                for c, e in predicted_root.items()
                if c in gold_root and gold_root[c].parent == e.parent
            ),
            len(predicted_edges) + len(predicted_root),
            len(gold_edges) + len(gold_root),
        )

        for child, gold_edge in gold_edges.items():
            category = _KIND_TO_CATEGORY[doc.node(gold_edge.parent).kind]
            hit = int(predicted_edges.get(child) == gold_edge)
            categories[category] = categories[category] + CategoryCounts(hit, 1)

    return EvalReport(counts, counts_with_root, categories)


def category_breakdown_delta(
    report_a: EvalReport, report_b: EvalReport
) -> dict[str, float]:
    """Per-category accuracy differences, report_b minus report_a.

    Categories empty in either report are omitted (no accuracy defined).
    """
    deltas: dict[str, float] = {}
    for key in CATEGORIES:
        a = report_a.category_counts.get(key, CategoryCounts()).accuracy
        b = report_b.category_counts.get(key, CategoryCounts()).accuracy
        if a is not None and b is not None:
            deltas[key] = b - a
    return deltas
