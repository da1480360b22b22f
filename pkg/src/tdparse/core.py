"""Core types for temporal dependency trees.

A document carries pre-annotated event and time-expression mentions.
Together with two synthetic nodes, an abstract root and the document
creation time (DCT), they form a single-rooted labeled tree: every
non-root node attaches to exactly one parent with a temporal relation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping


class TdpError(Exception):
    """Base class for all toolkit errors."""


class DocumentMismatch(TdpError):
    """Two artifacts that must describe the same document(s) do not."""


class RelationLabel(Enum):
    """The four relations an edge may carry."""

    BEFORE = "before"
    AFTER = "after"
    OVERLAP = "overlap"
    DEPENDS_ON = "depends_on"


# Fixed label order, used for score-table layout and decoder tie-breaking.
LABEL_ORDER = (
    RelationLabel.BEFORE,
    RelationLabel.AFTER,
    RelationLabel.OVERLAP,
    RelationLabel.DEPENDS_ON,
)

TEMPORAL_LABELS = (RelationLabel.BEFORE, RelationLabel.AFTER, RelationLabel.OVERLAP)


class MentionKind(Enum):
    EVENT = "event"
    TIMEX = "timex"
    ROOT = "root"
    DCT = "dct"


_SYNTHETIC_KINDS = (MentionKind.ROOT, MentionKind.DCT)

ROOT_ID = "ROOT"
DCT_ID = "DCT"
ROOT_ORDER = -2
DCT_ORDER = -1


@dataclass(frozen=True)
class Mention:
    """One node of a temporal dependency tree.

    EVENT and TIMEX mentions are real text spans. ROOT and DCT are
    synthetic: they carry no sentence position, and their document_order
    is pinned to -2 and -1 so they sort before every real mention.
    """

    id: str
    kind: MentionKind
    text: str
    document_order: int
    sentence_index: int | None = None
    token_span: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("mention id must be non-empty")
        if self.token_span is not None:
            object.__setattr__(self, "token_span", tuple(self.token_span))
        if self.kind in _SYNTHETIC_KINDS:
            if self.sentence_index is not None or self.token_span is not None:
                raise ValueError(f"{self.id}: synthetic nodes carry no text span")
            expected = ROOT_ORDER if self.kind is MentionKind.ROOT else DCT_ORDER
            if self.document_order != expected:
                raise ValueError(f"{self.id}: document_order must be {expected}")
        else:
            if self.sentence_index is None or self.token_span is None:
                raise ValueError(f"{self.id}: {self.kind.value} mention needs a text span")
            start, end = self.token_span
            if not 0 <= start < end:
                raise ValueError(f"{self.id}: bad token span {self.token_span}")
            if self.sentence_index < 0:
                raise ValueError(f"{self.id}: negative sentence index")
            if self.document_order < 0:
                raise ValueError(f"{self.id}: negative document order")

    @property
    def is_synthetic(self) -> bool:
        return self.kind in _SYNTHETIC_KINDS


def root_mention() -> Mention:
    return Mention(ROOT_ID, MentionKind.ROOT, "", ROOT_ORDER)


def dct_mention(dct_text: str) -> Mention:
    return Mention(DCT_ID, MentionKind.DCT, dct_text, DCT_ORDER)


@dataclass(frozen=True)
class Document:
    """A tokenized document plus its annotated mentions.

    ``mentions`` holds only the real EVENT/TIMEX spans, in document
    order, with each mention's document_order equal to its list index.
    The synthetic nodes are exposed as ``root`` and ``dct``.
    """

    doc_id: str
    sentences: tuple[tuple[str, ...], ...]
    mentions: tuple[Mention, ...]
    dct_text: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "sentences", tuple(tuple(s) for s in self.sentences))
        object.__setattr__(self, "mentions", tuple(self.mentions))
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        seen: set[str] = set()
        previous_key: tuple[int, int] | None = None
        for position, mention in enumerate(self.mentions):
            if mention.is_synthetic or mention.id in (ROOT_ID, DCT_ID):
                raise ValueError(f"{self.doc_id}: reserved node {mention.id} in mention list")
            if mention.id in seen:
                raise ValueError(f"{self.doc_id}: duplicate mention id {mention.id}")
            seen.add(mention.id)
            if mention.document_order != position:
                raise ValueError(
                    f"{self.doc_id}: mention {mention.id} has document_order "
                    f"{mention.document_order}, expected {position}"
                )
            if mention.sentence_index >= len(self.sentences):
                raise ValueError(f"{self.doc_id}: mention {mention.id} outside sentences")
            start, end = mention.token_span
            if end > len(self.sentences[mention.sentence_index]):
                raise ValueError(f"{self.doc_id}: mention {mention.id} span exceeds sentence")
            key = (mention.sentence_index, start)
            if previous_key is not None and key < previous_key:
                raise ValueError(f"{self.doc_id}: mentions not sorted at {mention.id}")
            previous_key = key

    @classmethod
    def from_unordered(
        cls,
        doc_id: str,
        sentences: Iterable[Iterable[str]],
        mentions: Iterable[tuple[str, MentionKind, int, tuple[int, int], str]],
        dct_text: str,
    ) -> "Document":
        """Build a Document from (id, kind, sentence_index, span, text) tuples.

        Sorts by (sentence_index, span start) and assigns document_order;
        ties on identical spans keep the input order.
        """
        indexed = list(enumerate(mentions))
        indexed.sort(key=lambda item: (item[1][2], item[1][3][0], item[0]))
        ordered = tuple(
            Mention(mid, kind, text, order, sentence_index, tuple(span))
            for order, (_, (mid, kind, sentence_index, span, text)) in enumerate(indexed)
        )
        return cls(doc_id, tuple(tuple(s) for s in sentences), ordered, dct_text)

    @cached_property
    def root(self) -> Mention:
        return root_mention()

    @cached_property
    def dct(self) -> Mention:
        return dct_mention(self.dct_text)

    @cached_property
    def _nodes_by_id(self) -> dict[str, Mention]:
        nodes = {ROOT_ID: self.root, DCT_ID: self.dct}
        nodes.update((m.id, m) for m in self.mentions)
        return nodes

    def node(self, node_id: str) -> Mention:
        try:
            return self._nodes_by_id[node_id]
        except KeyError:
            raise KeyError(f"{self.doc_id}: unknown node id {node_id!r}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes_by_id

    @property
    def parented_nodes(self) -> tuple[Mention, ...]:
        """Every node that takes a parent: DCT first, then real mentions."""
        return (self.dct, *self.mentions)

    @cached_property
    def flat_tokens(self) -> tuple[str, ...]:
        return tuple(token for sentence in self.sentences for token in sentence)

    @cached_property
    def _sentence_offsets(self) -> tuple[int, ...]:
        offsets = []
        total = 0
        for sentence in self.sentences:
            offsets.append(total)
            total += len(sentence)
        return tuple(offsets)

    def flat_token_index(self, mention: Mention) -> int:
        """Offset of the mention's first token in the flattened document."""
        if mention.is_synthetic:
            raise ValueError(f"{mention.id} has no token position")
        return self._sentence_offsets[mention.sentence_index] + mention.token_span[0]

    def mention_tokens(self, mention: Mention) -> tuple[str, ...]:
        if mention.is_synthetic:
            return ()
        start, end = mention.token_span
        return self.sentences[mention.sentence_index][start:end]

    def sentence_tokens(self, mention: Mention) -> tuple[str, ...]:
        if mention.is_synthetic:
            return ()
        return self.sentences[mention.sentence_index]


@dataclass(frozen=True)
class Edge:
    """A labeled child-to-parent attachment.

    Purely structural; legality against a document (kinds, labels,
    tree shape) is what validate_tree checks.
    """

    child: str
    parent: str
    label: RelationLabel


@dataclass(frozen=True)
class TemporalDependencyTree:
    doc_id: str
    edges: frozenset[Edge]

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", frozenset(self.edges))

    @cached_property
    def edges_by_child(self) -> dict[str, tuple[Edge, ...]]:
        grouped: dict[str, list[Edge]] = {}
        for edge in self.edges:
            grouped.setdefault(edge.child, []).append(edge)
        return {child: tuple(edges) for child, edges in grouped.items()}

    def parent_edge(self, child_id: str) -> Edge:
        """The unique edge attaching ``child_id``; raises unless exactly one."""
        edges = self.edges_by_child.get(child_id, ())
        if len(edges) != 1:
            raise ValueError(f"{self.doc_id}: {child_id} has {len(edges)} parent edges")
        return edges[0]

    def node_ids(self) -> set[str]:
        """All node ids that appear in the edge set."""
        ids: set[str] = set()
        for edge in self.edges:
            ids.add(edge.child)
            ids.add(edge.parent)
        return ids


def legal_labels(child_kind: MentionKind) -> tuple[RelationLabel, ...]:
    """Labels an edge from a child of this kind may carry."""
    if child_kind is MentionKind.EVENT:
        return TEMPORAL_LABELS
    if child_kind in (MentionKind.TIMEX, MentionKind.DCT):
        return (RelationLabel.DEPENDS_ON,)
    return ()


def legal_parent_kinds(child_kind: MentionKind) -> tuple[MentionKind, ...]:
    """Parent kinds a child of this kind may attach to.

    Events anchor to DCT, time expressions, or other events; time
    expressions anchor to ROOT or another time expression; DCT's own
    parent is always ROOT.
    """
    if child_kind is MentionKind.EVENT:
        return (MentionKind.DCT, MentionKind.TIMEX, MentionKind.EVENT)
    if child_kind is MentionKind.TIMEX:
        return (MentionKind.ROOT, MentionKind.TIMEX)
    if child_kind is MentionKind.DCT:
        return (MentionKind.ROOT,)
    return ()


def deduced_root_edges(doc: Document) -> Edge:
    """The deterministic DCT attachment, inserted before decoding mentions."""
    return Edge(child=DCT_ID, parent=ROOT_ID, label=RelationLabel.DEPENDS_ON)


def would_create_cycle(parents: Mapping[str, str], child: str, parent: str) -> bool:
    """True iff attaching ``child`` under ``parent`` would close a cycle.

    ``parents`` maps already-attached child ids to their parent ids.
    Walks parent links upward from ``parent``; a cycle arises exactly
    when that walk reaches ``child``. Unknown ids end the walk.
    """
    node: str | None = parent
    seen: set[str] = set()
    while node is not None and node not in seen:
        if node == child:
            return True
        seen.add(node)
        node = parents.get(node)
    return False


def validate_tree(tree: TemporalDependencyTree, doc: Document) -> list[str]:
    """Check every tree invariant against the document.

    Returns one human-readable violation per problem; an empty report
    means the tree is valid. Raises DocumentMismatch when tree and
    document disagree on doc_id.
    """
    if tree.doc_id != doc.doc_id:
        raise DocumentMismatch(
            f"tree is for {tree.doc_id!r} but document is {doc.doc_id!r}"
        )

    report: list[str] = []
    for edge in sorted(tree.edges, key=lambda e: (e.child, e.parent, e.label.value)):
        tag = f"edge {edge.child}->{edge.parent}"
        if not doc.has_node(edge.child):
            report.append(f"{tag}: unknown child id")
            continue
        if not doc.has_node(edge.parent):
            report.append(f"{tag}: unknown parent id")
            continue
        if edge.child == edge.parent:
            report.append(f"{tag}: self-loop")
            continue
        child = doc.node(edge.child)
        parent = doc.node(edge.parent)
        if child.kind is MentionKind.ROOT:
            report.append("ROOT must not have a parent")
            continue
        if edge.label not in legal_labels(child.kind):
            report.append(
                f"{tag}: label {edge.label.value} illegal for {child.kind.value} child"
            )
        if parent.kind not in legal_parent_kinds(child.kind):
            report.append(
                f"{tag}: parent kind {parent.kind.value} illegal for {child.kind.value} child"
            )

    by_child: dict[str, list[Edge]] = {}
    for edge in tree.edges:
        if doc.has_node(edge.child):
            by_child.setdefault(edge.child, []).append(edge)
    for node in doc.parented_nodes:
        count = len(by_child.get(node.id, ()))
        if count == 0:
            report.append(f"{node.id} has no parent")
        elif count > 1:
            report.append(f"{node.id} has {count} parents")

    expected = len(doc.mentions) + 1
    if len(tree.edges) != expected:
        report.append(f"expected {expected} edges, found {len(tree.edges)}")

    # Reachability: follow unique parent links; any walk that neither
    # reaches ROOT nor dead-ends on an already-reported problem is a cycle.
    parents = {
        child: edges[0].parent
        for child, edges in by_child.items()
        if len(edges) == 1 and doc.has_node(edges[0].parent)
    }
    reaches_root: set[str] = {ROOT_ID}
    reported_cycles: set[frozenset[str]] = set()
    for node in doc.parented_nodes:
        if node.id not in parents:
            continue
        path: list[str] = []
        position: dict[str, int] = {}
        current: str | None = node.id
        while current is not None and current not in reaches_root:
            if current in position:
                cycle = frozenset(path[position[current]:])
                if cycle not in reported_cycles:
                    reported_cycles.add(cycle)
                    report.append("cycle involving " + ", ".join(sorted(cycle)))
                break
            position[current] = len(path)
            path.append(current)
            current = parents.get(current)
        else:
            if current is not None:
                reaches_root.update(path)

    return report
