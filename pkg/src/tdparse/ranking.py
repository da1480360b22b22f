"""Per-child scoring of (candidate parent, label) rows and the ranking loss.

For one child, every candidate pair representation goes through a single
hidden feed-forward layer and a linear head over the four labels; one
softmax across all (candidate, legal label) rows yields the probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import torch
from torch import nn

from .candidates import CandidateSet
from .core import Document, LABEL_ORDER, RelationLabel, legal_labels
from .encoders import PairEncoder, StateCache


@dataclass(frozen=True)
class ScoreRow:
    parent: str
    label: RelationLabel
    score: float
    probability: float


@dataclass(frozen=True)
class ScoreTable:
    child: str
    rows: tuple[ScoreRow, ...]

    def row_for(self, parent: str, label: RelationLabel) -> ScoreRow | None:
        for row in self.rows:
            if row.parent == parent and row.label is label:
                return row
        return None


def softmax(values: Sequence[float]) -> list[float]:
    """Numerically stable softmax over a plain list."""
    top = max(values)
    exps = [math.exp(v - top) for v in values]
    total = sum(exps)
    return [e / total for e in exps]


def table_from_scores(
    child: str, scored_rows: Sequence[tuple[str, RelationLabel, float]]
) -> ScoreTable:
    """Build a normalized ScoreTable from raw (parent, label, score) rows."""
    if not scored_rows:
        raise ValueError(f"no rows for child {child}")
    probabilities = softmax([score for _, _, score in scored_rows])
    return ScoreTable(
        child=child,
        rows=tuple(
            ScoreRow(parent, label, score, probability)
            for (parent, label, score), probability in zip(scored_rows, probabilities)
        ),
    )


def ranking_loss(table: ScoreTable, gold_parent: str, gold_label: RelationLabel) -> float:
    """Negative log probability of the gold row.

    Zero iff the gold row holds all the probability mass. A missing gold
    row means the instance was built without gold augmentation; that is
    a construction bug, so it raises.
    """
    row = table.row_for(gold_parent, gold_label)
    if row is None:
        raise ValueError(
            f"{table.child}: gold row ({gold_parent}, {gold_label.value}) missing from "
            "score table; training instances must be gold-augmented"
        )
    if row.probability <= 0.0:
        return math.inf
    return -math.log(row.probability)


class TdpRanker(nn.Module):
    """Full parsing model: pair encoder, one hidden layer, label scores."""

    def __init__(self, encoder: PairEncoder, ff_hidden_dim: int | None = None):
        super().__init__()
        hidden = ff_hidden_dim if ff_hidden_dim is not None else encoder.config.ff_hidden_dim
        self.encoder = encoder
        self.hidden = nn.Linear(encoder.output_dim, hidden)
        self.scores = nn.Linear(hidden, len(LABEL_ORDER))

    def feed_forward_parameters(self):
        """Parameters of the scoring head (excludes the encoder)."""
        yield from self.hidden.parameters()
        yield from self.scores.parameters()

    def rows_and_logits(
        self, doc: Document, candidate_set: CandidateSet, cache: StateCache | None = None
    ) -> tuple[list[tuple[str, RelationLabel]], torch.Tensor]:
        """All (candidate, legal label) rows for the child and their logits."""
        child = doc.node(candidate_set.child)
        labels = legal_labels(child.kind)
        pairs = [(candidate, candidate_set.child) for candidate in candidate_set.candidates]
        encoded = self.encoder.encode_pairs(doc, pairs, cache=cache)
        all_scores = self.scores(torch.relu(self.hidden(encoded)))
        columns = [LABEL_ORDER.index(label) for label in labels]
        logits = all_scores[:, columns].reshape(-1)
        rows = [
            (candidate, label)
            for candidate in candidate_set.candidates
            for label in labels
        ]
        return rows, logits

    def instance_loss(
        self,
        doc: Document,
        candidate_set: CandidateSet,
        gold_parent: str,
        gold_label: RelationLabel,
        cache: StateCache | None = None,
    ) -> torch.Tensor:
        """Differentiable negative log probability of the gold row."""
        rows, logits = self.rows_and_logits(doc, candidate_set, cache)
        try:
            gold_index = rows.index((gold_parent, gold_label))
        except ValueError:
            raise ValueError(
                f"{candidate_set.child}: gold row ({gold_parent}, {gold_label.value}) "
                "missing from candidates; training instances must be gold-augmented"
            ) from None
        return -torch.log_softmax(logits, dim=0)[gold_index]


def score_child(
    model: TdpRanker,
    doc: Document,
    candidate_set: CandidateSet,
    cache: StateCache | None = None,
) -> ScoreTable:
    """Score every (candidate, legal label) row for one child, eval mode."""
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            rows, logits = model.rows_and_logits(doc, candidate_set, cache)
            probabilities = torch.softmax(logits, dim=0)
        return ScoreTable(
            child=candidate_set.child,
            rows=tuple(
                ScoreRow(parent, label, float(score), float(probability))
                for (parent, label), score, probability in zip(rows, logits, probabilities)
            ),
        )
    finally:
        model.train(was_training)
