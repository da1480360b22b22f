"""Canonical corpus format: UTF-8 JSON lines, one document record per line.

A record holds doc_id, dct_text, sentences (token lists), mentions
(id, kind, sentence_index, token_span, text) and gold_edges (child,
parent, label). Only real-mention edges are stored; the deterministic
DCT attachment is synthesized on load (and accepted, if explicitly
present and identical).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .candidates import WindowConfig, generate_candidates
from .core import (
    DCT_ID,
    Document,
    Edge,
    MentionKind,
    RelationLabel,
    ROOT_ID,
    TdpError,
    TemporalDependencyTree,
    deduced_root_edges,
    validate_tree,
)

log = logging.getLogger(__name__)

_REQUIRED_FIELDS = ("doc_id", "dct_text", "sentences", "mentions", "gold_edges")
_MENTION_FIELDS = ("id", "kind", "sentence_index", "token_span", "text")
_EDGE_FIELDS = ("child", "parent", "label")
_LABEL_VALUES = {label.value: label for label in RelationLabel}
_MENTION_KINDS = {"event": MentionKind.EVENT, "timex": MentionKind.TIMEX}


class CorpusFormatError(TdpError):
    """A corpus file or record does not follow the canonical format."""


def _parse_mentions(raw_mentions: list, sentences: Sequence[Sequence[str]]) -> list:
    mentions = []
    for raw in raw_mentions:
        if not isinstance(raw, dict):
            raise CorpusFormatError("mention entries must be objects")
        missing = [key for key in _MENTION_FIELDS if key not in raw]
        if missing:
            raise CorpusFormatError(f"mention missing fields {missing}")
        kind = _MENTION_KINDS.get(raw["kind"])
        if kind is None:
            raise CorpusFormatError(f"mention {raw['id']}: unknown kind {raw['kind']!r}")
        sentence_index = raw["sentence_index"]
        span = raw["token_span"]
        if not (isinstance(span, (list, tuple)) and len(span) == 2):
            raise CorpusFormatError(f"mention {raw['id']}: token_span must be [start, end)")
        if not (isinstance(sentence_index, int) and 0 <= sentence_index < len(sentences)):
            raise CorpusFormatError(f"mention {raw['id']}: sentence_index out of range")
        start, end = span
        sentence = sentences[sentence_index]
        if not (isinstance(start, int) and isinstance(end, int) and 0 <= start < end <= len(sentence)):
            raise CorpusFormatError(f"mention {raw['id']}: token span out of range")
        expected_text = " ".join(sentence[start:end])
        if raw["text"] != expected_text:
            raise CorpusFormatError(
                f"mention {raw['id']}: text {raw['text']!r} does not match its "
                f"span tokens {expected_text!r}"
            )
        mentions.append((raw["id"], kind, sentence_index, (start, end), raw["text"]))
    return mentions


def _parse_document_part(raw: dict, where: str) -> Document:
    required = tuple(f for f in _REQUIRED_FIELDS if f != "gold_edges")
    missing = [key for key in required if key not in raw]
    if missing:
        raise CorpusFormatError(f"{where}: missing fields {missing}")
    sentences = raw["sentences"]
    if not isinstance(sentences, list) or not all(
        isinstance(s, list) and all(isinstance(t, str) for t in s) for s in sentences
    ):
        raise CorpusFormatError(f"{where}: sentences must be lists of token strings")
    try:
        mentions = _parse_mentions(raw["mentions"], sentences)
    except CorpusFormatError as err:
        raise CorpusFormatError(f"{where}: {err}") from None
    try:
        return Document.from_unordered(raw["doc_id"], sentences, mentions, raw["dct_text"])
    except (ValueError, TypeError) as err:
        raise CorpusFormatError(f"{where}: {err}") from None


def _parse_tree_part(raw: dict, doc: Document, where: str) -> TemporalDependencyTree:
    if "gold_edges" not in raw:
        raise CorpusFormatError(f"{where}: missing fields ['gold_edges']")
    edges = []
    root_edge = deduced_root_edges(doc)
    for raw_edge in raw["gold_edges"]:
        if not isinstance(raw_edge, dict):
            raise CorpusFormatError(f"{where}: edge entries must be objects")
        missing = [key for key in _EDGE_FIELDS if key not in raw_edge]
        if missing:
            raise CorpusFormatError(f"{where}: edge missing fields {missing}")
        label = _LABEL_VALUES.get(raw_edge["label"])
        if label is None:
            raise CorpusFormatError(f"{where}: unknown label {raw_edge['label']!r}")
        edge = Edge(raw_edge["child"], raw_edge["parent"], label)
        if edge.child == DCT_ID:
            # The deterministic DCT edge may appear explicitly, but only
            # in its one legal form; it is re-synthesized either way.
            if edge != root_edge:
                raise CorpusFormatError(
                    f"{where}: the DCT edge must be {DCT_ID}->{ROOT_ID} depends_on"
                )
            continue
        edges.append(edge)
    edges.append(root_edge)

    tree = TemporalDependencyTree(doc.doc_id, frozenset(edges))
    violations = validate_tree(tree, doc)
    if violations:
        raise CorpusFormatError(
            f"{where}: invalid tree for {doc.doc_id}: " + "; ".join(violations)
        )
    return tree


def _parse_line(line: str, where: str) -> dict:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as err:
        raise CorpusFormatError(f"{where}: not valid JSON: {err}") from None
    if not isinstance(raw, dict):
        raise CorpusFormatError(f"{where}: record must be a JSON object")
    return raw


def _iter_lines(path):
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            if line.strip():
                yield line, f"{path}:{lineno}"


def load_corpus(
    path, *, strict: bool = True
) -> list[tuple[Document, TemporalDependencyTree]]:
    """Read canonical records from ``path``.

    Strict mode raises CorpusFormatError with the offending line number;
    lenient mode logs a warning and skips the record.
    """
    records = []
    for line, where in _iter_lines(path):
        try:
            raw = _parse_line(line, where)
            doc = _parse_document_part(raw, where)
            records.append((doc, _parse_tree_part(raw, doc, where)))
        except CorpusFormatError as err:
            if strict:
                raise
            log.warning("skipping record: %s", err)
    return records


def load_documents(path, *, strict: bool = True) -> list[Document]:
    """Like load_corpus but tolerates records without gold_edges.

    Meant for parse-time input, where only the annotated mentions
    matter; when gold_edges are present they are still validated.
    """
    documents = []
    for line, where in _iter_lines(path):
        try:
            raw = _parse_line(line, where)
            doc = _parse_document_part(raw, where)
            if "gold_edges" in raw:
                _parse_tree_part(raw, doc, where)
            documents.append(doc)
        except CorpusFormatError as err:
            if strict:
                raise
            log.warning("skipping record: %s", err)
    return documents


def _record_dict(doc: Document, tree: TemporalDependencyTree) -> dict:
    mention_edges = sorted(
        (edge for edge in tree.edges if edge.child != DCT_ID),
        key=lambda edge: doc.node(edge.child).document_order,
    )
    return {
        "doc_id": doc.doc_id,
        "dct_text": doc.dct_text,
        "sentences": [list(sentence) for sentence in doc.sentences],
        "mentions": [
            {
                "id": mention.id,
                "kind": mention.kind.value,
                "sentence_index": mention.sentence_index,
                "token_span": list(mention.token_span),
                "text": mention.text,
            }
            for mention in doc.mentions
        ],
        "gold_edges": [
            {"child": edge.child, "parent": edge.parent, "label": edge.label.value}
            for edge in mention_edges
        ],
    }


def save_corpus(
    records: Sequence[tuple[Document, TemporalDependencyTree]], path
) -> None:
    """Write records in the canonical format; refuses invalid trees."""
    lines = []
    for doc, tree in records:
        violations = validate_tree(tree, doc)
        if violations:
            raise ValueError(
                f"{doc.doc_id}: refusing to save invalid tree: " + "; ".join(violations)
            )
        lines.append(json.dumps(_record_dict(doc, tree), ensure_ascii=False))
    try:
        with open(path, "w", encoding="utf-8") as handle:
            for line in lines:
                handle.write(line + "\n")
    except OSError as err:
        raise CorpusFormatError(f"cannot write {path}: {err}") from err


@dataclass(frozen=True)
class CorpusStats:
    documents: int = 0
    sentences: int = 0
    mentions_by_kind: dict[str, int] = field(default_factory=dict)
    labels: dict[str, int] = field(default_factory=dict)
    parent_categories: dict[str, int] = field(default_factory=dict)
    children_total: int = 0
    gold_out_of_window: int = 0

    @property
    def gold_out_of_window_fraction(self) -> float:
        if self.children_total == 0:
            return 0.0
        return self.gold_out_of_window / self.children_total

    def __add__(self, other: "CorpusStats") -> "CorpusStats":
        return CorpusStats(
            documents=self.documents + other.documents,
            sentences=self.sentences + other.sentences,
            mentions_by_kind=_merge(self.mentions_by_kind, other.mentions_by_kind),
            labels=_merge(self.labels, other.labels),
            parent_categories=_merge(self.parent_categories, other.parent_categories),
            children_total=self.children_total + other.children_total,
            gold_out_of_window=self.gold_out_of_window + other.gold_out_of_window,
        )

    def as_dict(self) -> dict:
        return {
            "documents": self.documents,
            "sentences": self.sentences,
            "mentions_by_kind": dict(self.mentions_by_kind),
            "labels": dict(self.labels),
            "parent_categories": dict(self.parent_categories),
            "children_total": self.children_total,
            "gold_out_of_window": self.gold_out_of_window,
            "gold_out_of_window_fraction": self.gold_out_of_window_fraction,
        }


def _merge(a: dict[str, int], b: dict[str, int]) -> dict[str, int]:
    merged = dict(a)
    for key, value in b.items():
        merged[key] = merged.get(key, 0) + value
    return merged


def corpus_stats(
    records: Iterable[tuple[Document, TemporalDependencyTree]],
    window: WindowConfig = WindowConfig(),
) -> CorpusStats:
    """Counts over a corpus: documents, sentences, mentions by kind
    (every document contributes one DCT node), the edge-label histogram
    (DCT edge included), the gold-parent category histogram over real
    mentions, and how often gold parents fall outside the window."""
    stats = CorpusStats()
    for doc, tree in records:
        mentions_by_kind: dict[str, int] = {MentionKind.DCT.value: 1}
        for mention in doc.mentions:
            kind = mention.kind.value
            mentions_by_kind[kind] = mentions_by_kind.get(kind, 0) + 1
        labels: dict[str, int] = {}
        for edge in tree.edges:
            labels[edge.label.value] = labels.get(edge.label.value, 0) + 1
        parent_categories: dict[str, int] = {}
        out_of_window = 0
        for mention in doc.mentions:
            edge = tree.parent_edge(mention.id)
            parent_kind = doc.node(edge.parent).kind.value
            parent_categories[parent_kind] = parent_categories.get(parent_kind, 0) + 1
            candidates = generate_candidates(doc, mention.id, window)
            if edge.parent not in candidates.candidates:
                out_of_window += 1
        stats = stats + CorpusStats(
            documents=1,
            sentences=len(doc.sentences),
            mentions_by_kind=mentions_by_kind,
            labels=labels,
            parent_categories=parent_categories,
            children_total=len(doc.mentions),
            gold_out_of_window=out_of_window,
        )
    return stats


def convert_native_release(source_path, output_path) -> None:
    """Convert a third-party corpus release into the canonical format.

    The release's file format is not publicly documented, so this entry
    point stays unimplemented until it can be written against the actual
    files.
    """
    raise NotImplementedError(
        f"no converter for the native release format yet ({source_path} -> {output_path})"
    )
