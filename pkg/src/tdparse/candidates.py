"""Windowed parent-candidate generation and training-instance construction."""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    Document,
    MentionKind,
    RelationLabel,
    TemporalDependencyTree,
    legal_parent_kinds,
)


@dataclass(frozen=True)
class WindowConfig:
    """Candidate window: ``back`` preceding and ``forward`` following mentions."""

    back: int = 10
    forward: int = 3

    def __post_init__(self) -> None:
        if self.back < 0 or self.forward < 0:
            raise ValueError("window sizes must be non-negative")


@dataclass(frozen=True)
class CandidateSet:
    """Parent candidates for one child, in deterministic order.

    Synthetic candidates (ROOT and/or DCT, whichever the child's kind
    admits) come first, then window mentions by ascending document order.
    """

    child: str
    candidates: tuple[str, ...]


@dataclass(frozen=True)
class TrainingInstance:
    candidate_set: CandidateSet
    gold_parent: str
    gold_label: RelationLabel
    gold_out_of_window: bool


def generate_candidates(doc: Document, child_id: str, cfg: WindowConfig) -> CandidateSet:
    """Candidates for ``child_id``: ROOT/DCT as its kind admits, then the
    mentions within ``cfg.back`` before and ``cfg.forward`` after it,
    kind-filtered so every candidate admits at least one legal label."""
    child = doc.node(child_id)
    if child.is_synthetic:
        raise ValueError(f"{doc.doc_id}: cannot generate candidates for {child_id}")
    allowed = legal_parent_kinds(child.kind)
    out: list[str] = []
    if MentionKind.ROOT in allowed:
        out.append(doc.root.id)
    if MentionKind.DCT in allowed:
        out.append(doc.dct.id)
    low = max(child.document_order - cfg.back, 0)
    high = min(child.document_order + cfg.forward, len(doc.mentions) - 1)
    for mention in doc.mentions[low : high + 1]:
        if mention.id == child_id:
            continue
        if mention.kind in allowed:
            out.append(mention.id)
    return CandidateSet(child=child_id, candidates=tuple(out))


def build_training_instances(
    doc: Document, gold_tree: TemporalDependencyTree, cfg: WindowConfig
) -> list[TrainingInstance]:
    """One instance per mention in document order.

    A gold parent outside the candidate window is appended to the
    candidate list (training-only augmentation) and the instance is
    flagged, so the statistic stays measurable.
    """
    instances = []
    for mention in doc.mentions:
        candidate_set = generate_candidates(doc, mention.id, cfg)
        gold = gold_tree.parent_edge(mention.id)
        out_of_window = gold.parent not in candidate_set.candidates
        if out_of_window:
            candidate_set = CandidateSet(
                child=candidate_set.child,
                candidates=candidate_set.candidates + (gold.parent,),
            )
        instances.append(
            TrainingInstance(candidate_set, gold.parent, gold.label, out_of_window)
        )
    return instances
