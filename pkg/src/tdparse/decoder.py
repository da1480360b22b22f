"""Greedy incremental tree assembly with cycle avoidance.

Children are processed in document order. For each child the score rows
are sorted by descending probability (ties: nearer-earlier candidate
first, then label order) and the first row whose parent does not create
a cycle is committed; every rejected row is recorded in the trace.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .candidates import WindowConfig, generate_candidates
from .core import (
    DCT_ID,
    Document,
    Edge,
    LABEL_ORDER,
    RelationLabel,
    ROOT_ID,
    TemporalDependencyTree,
    deduced_root_edges,
    would_create_cycle,
)
from .ranking import ScoreTable, TdpRanker, score_child

_LABEL_RANK = {label: i for i, label in enumerate(LABEL_ORDER)}


@dataclass(frozen=True)
class ChildDecision:
    child: str
    parent: str
    label: RelationLabel
    probability: float
    skipped: int  # rows rejected for cycle creation before this one


@dataclass(frozen=True)
class DecodeTrace:
    doc_id: str
    decisions: tuple[ChildDecision, ...]

    @property
    def cycle_skip_fraction(self) -> float:
        if not self.decisions:
            return 0.0
        return sum(1 for d in self.decisions if d.skipped) / len(self.decisions)


def decode(
    doc: Document, tables: Sequence[ScoreTable]
) -> tuple[TemporalDependencyTree, DecodeTrace]:
    """Assemble a full tree from one ScoreTable per mention (document order)."""
    if [t.child for t in tables] != [m.id for m in doc.mentions]:
        raise ValueError(f"{doc.doc_id}: need one score table per mention, in document order")
    parents: dict[str, str] = {DCT_ID: ROOT_ID}
    edges = [deduced_root_edges(doc)]
    decisions = []
    for mention, table in zip(doc.mentions, tables):
        if not table.rows:
            raise ValueError(f"{doc.doc_id}: empty score table for {mention.id}")
        try:
            rows = sorted(
                table.rows,
                key=lambda r: (
                    -r.probability,
                    doc.node(r.parent).document_order,
                    _LABEL_RANK[r.label],
                ),
            )
        except KeyError as err:
            raise ValueError(
                f"{doc.doc_id}: score table for {mention.id} references an unknown node: {err}"
            ) from None
        skipped = 0
        chosen = None
        for row in rows:
            if would_create_cycle(parents, mention.id, row.parent):
                skipped += 1
                continue
            chosen = row
            break
        if chosen is None:  # unreachable when ROOT or DCT is among the candidates
            raise ValueError(f"{doc.doc_id}: no acyclic parent available for {mention.id}")
        parents[mention.id] = chosen.parent
        edges.append(Edge(mention.id, chosen.parent, chosen.label))
        decisions.append(
            ChildDecision(mention.id, chosen.parent, chosen.label, chosen.probability, skipped)
        )
    tree = TemporalDependencyTree(doc.doc_id, frozenset(edges))
    return tree, DecodeTrace(doc.doc_id, tuple(decisions))


def cycle_skip_rate(traces: Iterable[DecodeTrace]) -> float:
    """Fraction of children whose top-ranked row was skipped for a cycle."""
    traces = list(traces)
    if not traces:
        raise ValueError("cycle_skip_rate needs at least one trace")
    children = sum(len(t.decisions) for t in traces)
    if children == 0:
        raise ValueError("cycle_skip_rate needs at least one decoded child")
    skipped = sum(1 for t in traces for d in t.decisions if d.skipped)
    return skipped / children


def parse_document(
    model: TdpRanker, doc: Document, window: WindowConfig = WindowConfig()
) -> tuple[TemporalDependencyTree, DecodeTrace]:
    """Score every mention of one document with the model and decode."""
    cache: dict = {}
    tables = [
        score_child(model, doc, generate_candidates(doc, mention.id, window), cache)
        for mention in doc.mentions
    ]
    return decode(doc, tables)


def parse_documents(
    model: TdpRanker,
    docs: Sequence[Document],
    window: WindowConfig = WindowConfig(),
    jobs: int = 1,
) -> list[tuple[TemporalDependencyTree, DecodeTrace]]:
    """Parse a batch of documents, optionally with a small thread pool.

    Model parameters are read-only here, so threads are safe; decoding
    within one document stays sequential.
    """
    if jobs <= 1 or len(docs) <= 1:
        return [parse_document(model, doc, window) for doc in docs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda doc: parse_document(model, doc, window), docs))
