"""Transitive closure of a tree's temporal relations, and tree equivalence.

Only BEFORE/AFTER/OVERLAP edges carry temporal information; DEPENDS_ON
contributes nothing, ROOT is excluded, and any pair the composition
rules cannot reach stays UNKNOWN. OVERLAP is treated as transitive
("same time" semantics), so the derivable compositions are:

    BEFORE  o BEFORE  -> BEFORE        OVERLAP o OVERLAP -> OVERLAP
    BEFORE  o OVERLAP -> BEFORE        OVERLAP o BEFORE  -> BEFORE
    (AFTER rules follow by symmetry; BEFORE o AFTER is underivable)
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence

from .core import (
    DocumentMismatch,
    RelationLabel,
    ROOT_ID,
    TdpError,
    TemporalDependencyTree,
)


class ClosureInconsistency(TdpError):
    """Composition derived a relation contradicting an established one."""


class PairRelation(Enum):
    BEFORE = "before"
    AFTER = "after"
    OVERLAP = "overlap"
    UNKNOWN = "unknown"


_INVERSE = {
    PairRelation.BEFORE: PairRelation.AFTER,
    PairRelation.AFTER: PairRelation.BEFORE,
    PairRelation.OVERLAP: PairRelation.OVERLAP,
    PairRelation.UNKNOWN: PairRelation.UNKNOWN,
}

_COMPOSE = {
    (PairRelation.BEFORE, PairRelation.BEFORE): PairRelation.BEFORE,
    (PairRelation.BEFORE, PairRelation.OVERLAP): PairRelation.BEFORE,
    (PairRelation.OVERLAP, PairRelation.BEFORE): PairRelation.BEFORE,
    (PairRelation.OVERLAP, PairRelation.OVERLAP): PairRelation.OVERLAP,
    (PairRelation.AFTER, PairRelation.AFTER): PairRelation.AFTER,
    (PairRelation.AFTER, PairRelation.OVERLAP): PairRelation.AFTER,
    (PairRelation.OVERLAP, PairRelation.AFTER): PairRelation.AFTER,
}

_EDGE_RELATION = {
    RelationLabel.BEFORE: PairRelation.BEFORE,
    RelationLabel.AFTER: PairRelation.AFTER,
    RelationLabel.OVERLAP: PairRelation.OVERLAP,
}


def compose(first: PairRelation, second: PairRelation) -> PairRelation | None:
    """rel(A,C) implied by rel(A,B) and rel(B,C); None when underivable."""
    return _COMPOSE.get((first, second))


class RelationMatrix:
    """Pairwise relations over a tree's non-ROOT nodes.

    Antisymmetric by construction: setting rel(A,B) also sets the
    inverse on (B,A). The diagonal is OVERLAP; unset pairs are UNKNOWN.
    """

    def __init__(self, node_ids: Iterable[str]):
        self._nodes = tuple(sorted(set(node_ids)))
        self._node_set = set(self._nodes)
        self._relations: dict[tuple[str, str], PairRelation] = {}

    @property
    def nodes(self) -> tuple[str, ...]:
        return self._nodes

    def _check(self, node: str) -> None:
        if node not in self._node_set:
            raise ValueError(f"unknown node {node!r}")

    def get(self, a: str, b: str) -> PairRelation:
        self._check(a)
        self._check(b)
        if a == b:
            return PairRelation.OVERLAP
        return self._relations.get((a, b), PairRelation.UNKNOWN)

    def set(self, a: str, b: str, relation: PairRelation) -> None:
        self._check(a)
        self._check(b)
        if a == b:
            raise ValueError("the diagonal is fixed to OVERLAP")
        if relation is PairRelation.UNKNOWN:
            raise ValueError("UNKNOWN cannot be asserted, only left unset")
        self._relations[(a, b)] = relation
        self._relations[(b, a)] = _INVERSE[relation]

    def known_pairs(self) -> Iterator[tuple[str, str, PairRelation]]:
        """Every unordered known pair once, in sorted order."""
        for a, b in itertools.combinations(self._nodes, 2):
            relation = self._relations.get((a, b))
            if relation is not None:
                yield a, b, relation

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RelationMatrix):
            return NotImplemented
        return self._nodes == other._nodes and self._relations == other._relations

    def as_dict(self) -> dict:
        return {
            "nodes": list(self._nodes),
            "relations": [
                {"a": a, "b": b, "relation": rel.value} for a, b, rel in self.known_pairs()
            ],
        }


def close(tree: TemporalDependencyTree) -> RelationMatrix:
    """Fixpoint of the composition rules over the tree's temporal edges."""
    nodes = tree.node_ids() - {ROOT_ID}
    matrix = RelationMatrix(nodes)
    for edge in tree.edges:
        relation = _EDGE_RELATION.get(edge.label)
        if relation is not None:
            matrix.set(edge.child, edge.parent, relation)

    ordered = matrix.nodes
    changed = True
    while changed:
        changed = False
        for a in ordered:
            for b in ordered:
                if a == b:
                    continue
                first = matrix.get(a, b)
                if first is PairRelation.UNKNOWN:
                    continue
                for c in ordered:
                    if c == a or c == b:
                        continue
                    second = matrix.get(b, c)
                    if second is PairRelation.UNKNOWN:
                        continue
                    derived = compose(first, second)
                    if derived is None:
                        continue
                    current = matrix.get(a, c)
                    if current is PairRelation.UNKNOWN:
                        matrix.set(a, c, derived)
                        changed = True
                    elif current is not derived:
                        raise ClosureInconsistency(
                            f"{tree.doc_id}: ({a}, {c}) derived {derived.value} "
                            f"but already {current.value}"
                        )
    return matrix


def trees_equivalent(
    tree_a: TemporalDependencyTree, tree_b: TemporalDependencyTree
) -> tuple[bool, tuple[str, str, PairRelation, PairRelation] | None]:
    """Whether two trees induce the same closure.

    Returns (True, None) or (False, witness) where the witness is the
    first differing node pair in sorted order, with both relations.
    """
    closure_a = close(tree_a)
    closure_b = close(tree_b)
    if closure_a.nodes != closure_b.nodes:
        raise DocumentMismatch(
            f"node sets differ: {closure_a.nodes} vs {closure_b.nodes}"
        )
    for a, b in itertools.combinations(closure_a.nodes, 2):
        relation_a = closure_a.get(a, b)
        relation_b = closure_b.get(a, b)
        if relation_a is not relation_b:
            return False, (a, b, relation_a, relation_b)
    return True, None


EXACT = "exactly_correct"
EQUIVALENT = "closure_equivalent"
DIFFERENT = "different"


@dataclass(frozen=True)
class EquivalenceReport:
    exactly_correct: int
    closure_equivalent: int
    different: int
    per_document: dict[str, str]

    def as_dict(self) -> dict:
        return {
            "exactly_correct": self.exactly_correct,
            "closure_equivalent": self.closure_equivalent,
            "different": self.different,
            "per_document": dict(self.per_document),
        }


def equivalence_aware_report(
    predicted: Sequence[TemporalDependencyTree],
    gold: Sequence[TemporalDependencyTree],
) -> EquivalenceReport:
    """Classify each document as exact, closure-equivalent, or different."""
    gold_by_doc = {tree.doc_id: tree for tree in gold}
    predicted_by_doc = {tree.doc_id: tree for tree in predicted}
    if set(gold_by_doc) != set(predicted_by_doc):
        raise DocumentMismatch("predicted and gold document sets differ")
    per_document: dict[str, str] = {}
    for doc_id in sorted(gold_by_doc):
        gold_tree = gold_by_doc[doc_id]
        predicted_tree = predicted_by_doc[doc_id]
        if predicted_tree.edges == gold_tree.edges:
            per_document[doc_id] = EXACT
            continue
        equivalent, _ = trees_equivalent(predicted_tree, gold_tree)
        per_document[doc_id] = EQUIVALENT if equivalent else DIFFERENT
    values = list(per_document.values())
    return EquivalenceReport(
        exactly_correct=values.count(EXACT),
        closure_equivalent=values.count(EQUIVALENT),
        different=values.count(DIFFERENT),
        per_document=per_document,
    )
