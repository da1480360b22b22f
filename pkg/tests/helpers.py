"""Shared fixtures, random generators, and independent oracles for tests.

The oracles deliberately avoid the package's own composition table and
cycle bookkeeping: the closure oracle is a brute-force fixpoint over a
string-keyed rule dict, and the reference decoder re-derives
reachability from scratch with networkx at every step.
"""

from __future__ import annotations

import random

import networkx as nx

from tdparse.candidates import WindowConfig, generate_candidates
from tdparse.core import (
    DCT_ID,
    Document,
    Edge,
    LABEL_ORDER,
    MentionKind,
    RelationLabel,
    ROOT_ID,
    TEMPORAL_LABELS,
    TemporalDependencyTree,
    deduced_root_edges,
    legal_labels,
)
from tdparse.ranking import ScoreTable, table_from_scores

WORDS = ("alpha", "bravo", "cedar", "delta", "ember", "field", "grove", "haven")

_LABEL_RANK = {label: i for i, label in enumerate(LABEL_ORDER)}


def treaty_document() -> Document:
    """Two-country treaty story: three sentences, one timex, six events."""
    sentences = [
        ["Kuchma", "and", "Yeltsin", "signed", "a", "cooperation", "plan", "on",
         "February", "27,", "1998", "."],
        ["Russia", "and", "Ukraine", "share", "similar", "cultures", ",", "and",
         "Ukraine", "was", "ruled", "from", "Moscow", "for", "centuries", "."],
        ["Yeltsin", "and", "Kuchma", "called", "for", "the", "ratification", "of",
         "the", "treaty", ",", "saying", "it", "would", "create", "a", "\"",
         "strong", "legal", "foundation", "\"", "."],
    ]
    mentions = [
        ("signed", MentionKind.EVENT, 0, (3, 4), "signed"),
        ("feb-27-1998", MentionKind.TIMEX, 0, (8, 11), "February 27, 1998"),
        ("share", MentionKind.EVENT, 1, (3, 4), "share"),
        ("ruled", MentionKind.EVENT, 1, (10, 11), "ruled"),
        ("called", MentionKind.EVENT, 2, (3, 4), "called"),
        ("saying", MentionKind.EVENT, 2, (11, 12), "saying"),
        ("create", MentionKind.EVENT, 2, (14, 15), "create"),
    ]
    return Document.from_unordered("treaty-1998", sentences, mentions, "March 1, 1998")


def treaty_gold_tree() -> TemporalDependencyTree:
    edges = [
        Edge("feb-27-1998", ROOT_ID, RelationLabel.DEPENDS_ON),
        Edge("signed", "feb-27-1998", RelationLabel.OVERLAP),
        Edge("share", DCT_ID, RelationLabel.OVERLAP),
        Edge("ruled", DCT_ID, RelationLabel.BEFORE),
        Edge("called", DCT_ID, RelationLabel.BEFORE),
        Edge("saying", "called", RelationLabel.OVERLAP),
        Edge("create", "saying", RelationLabel.AFTER),
        Edge(DCT_ID, ROOT_ID, RelationLabel.DEPENDS_ON),
    ]
    return TemporalDependencyTree("treaty-1998", frozenset(edges))


def table_layout_document() -> Document:
    """Variant of the treaty story where the date sentence drops the comma.

    The timex's text keeps the comma, so this document exists only in
    memory (the corpus format would reject the text/span mismatch); it
    pins the pair-rendering layout exactly.
    """
    sentences = [
        ["Kuchma", "and", "Yeltsin", "signed", "a", "cooperation", "plan", "on",
         "February", "27", "1998", "."],
        ["Yeltsin", "and", "Kuchma", "called", "for", "the", "ratification", "of",
         "the", "treaty", ",", "saying", "it", "would", "create", "a", "\"",
         "strong", "legal", "foundation", "\"", "."],
    ]
    mentions = [
        ("feb-27-1998", MentionKind.TIMEX, 0, (8, 11), "February 27, 1998"),
        ("called", MentionKind.EVENT, 1, (3, 4), "called"),
    ]
    return Document.from_unordered(
        "treaty-pair-layout", sentences, mentions, "March 1, 1998"
    )


def oracle_score_tables(
    doc: Document,
    gold_tree: TemporalDependencyTree,
    window: WindowConfig = WindowConfig(),
) -> list[ScoreTable]:
    """Tables that put nearly all probability on each child's gold row."""
    tables = []
    for mention in doc.mentions:
        gold = gold_tree.parent_edge(mention.id)
        candidate_set = generate_candidates(doc, mention.id, window)
        rows = [
            (parent, label, 8.0 if (parent, label) == (gold.parent, gold.label) else 0.0)
            for parent in candidate_set.candidates
            for label in legal_labels(mention.kind)
        ]
        tables.append(table_from_scores(mention.id, rows))
    return tables


def random_document(
    rng: random.Random, doc_id: str, min_mentions: int = 1, max_mentions: int = 20
) -> Document:
    """A structurally valid random document with whitespace-token mentions."""
    n = rng.randint(min_mentions, max_mentions)
    sentences: list[list[str]] = [[rng.choice(WORDS)]]
    entries = []
    for index in range(n):
        if rng.random() < 0.35:
            sentences.append([])
        sentence = sentences[-1]
        for _ in range(rng.randint(0, 2)):
            sentence.append(rng.choice(WORDS))
        start = len(sentence)
        width = rng.randint(1, 2)
        for _ in range(width):
            sentence.append(rng.choice(WORDS))
        kind = MentionKind.TIMEX if rng.random() < 0.3 else MentionKind.EVENT
        entries.append(
            (f"m{index}", kind, len(sentences) - 1, (start, start + width),
             " ".join(sentence[start : start + width]))
        )
    for sentence in sentences:
        if not sentence:
            sentence.append(rng.choice(WORDS))
        if rng.random() < 0.5:
            sentence.append(".")
    return Document.from_unordered(doc_id, sentences, entries, "June 5 2001")


def random_tree(rng: random.Random, doc: Document) -> TemporalDependencyTree:
    """A random valid gold tree; parents always precede their children."""
    edges = [deduced_root_edges(doc)]
    earlier_timexes: list[str] = []
    earlier_events: list[str] = []
    for mention in doc.mentions:
        if mention.kind is MentionKind.TIMEX:
            parent = rng.choice([ROOT_ID] + earlier_timexes)
            label = RelationLabel.DEPENDS_ON
            earlier_timexes.append(mention.id)
        else:
            parent = rng.choice([DCT_ID] + earlier_timexes + earlier_events)
            label = rng.choice(TEMPORAL_LABELS)
            earlier_events.append(mention.id)
        edges.append(Edge(mention.id, parent, label))
    return TemporalDependencyTree(doc.doc_id, frozenset(edges))


def random_score_tables(
    rng: random.Random,
    doc: Document,
    window: WindowConfig = WindowConfig(),
    quantized: bool = False,
) -> list[ScoreTable]:
    """Random tables over the legal candidate rows for every mention.

    ``quantized`` draws scores from a small grid so probability ties are
    common, exercising the deterministic tie-breaking rules.
    """
    levels = (-1.0, -0.5, 0.0, 0.5, 1.0)
    tables = []
    for mention in doc.mentions:
        candidate_set = generate_candidates(doc, mention.id, window)
        rows = [
            (parent, label, rng.choice(levels) if quantized else rng.uniform(-2.0, 2.0))
            for parent in candidate_set.candidates
            for label in legal_labels(mention.kind)
        ]
        tables.append(table_from_scores(mention.id, rows))
    return tables


def reference_decode(
    doc: Document, tables: list[ScoreTable]
) -> tuple[TemporalDependencyTree, list[int]]:
    """Straightforward decoder that re-derives reachability every step.

    Builds the committed edge graph from scratch with networkx for each
    candidate row and asks for a path parent -> child. Returns the tree
    and the per-child count of rows rejected before the committed one.
    """
    committed: list[tuple[str, str]] = [(DCT_ID, ROOT_ID)]
    edges = [deduced_root_edges(doc)]
    skip_counts = []
    for mention, table in zip(doc.mentions, tables):
        rows = sorted(
            table.rows,
            key=lambda r: (
                -r.probability,
                doc.node(r.parent).document_order,
                _LABEL_RANK[r.label],
            ),
        )
        skips = 0
        for row in rows:
            graph = nx.DiGraph()
            graph.add_edges_from(committed)
            graph.add_node(mention.id)
            graph.add_node(row.parent)
            if nx.has_path(graph, row.parent, mention.id):
                skips += 1
                continue
            committed.append((mention.id, row.parent))
            edges.append(Edge(mention.id, row.parent, row.label))
            break
        skip_counts.append(skips)
    return TemporalDependencyTree(doc.doc_id, frozenset(edges)), skip_counts


_ORACLE_COMPOSE = {
    ("before", "before"): "before",
    ("before", "overlap"): "before",
    ("overlap", "before"): "before",
    ("overlap", "overlap"): "overlap",
    ("after", "after"): "after",
    ("after", "overlap"): "after",
    ("overlap", "after"): "after",
}

_ORACLE_INVERSE = {"before": "after", "after": "before", "overlap": "overlap"}


def closure_oracle(tree: TemporalDependencyTree) -> dict[tuple[str, str], str]:
    """Brute-force closure fixpoint; keys are sorted (a, b) pairs."""
    nodes = sorted(
        ({e.child for e in tree.edges} | {e.parent for e in tree.edges}) - {ROOT_ID}
    )
    known: dict[tuple[str, str], str] = {}

    def put(a: str, b: str, relation: str) -> None:
        known[(a, b)] = relation
        known[(b, a)] = _ORACLE_INVERSE[relation]

    for edge in tree.edges:
        if edge.label.value in _ORACLE_INVERSE and edge.parent != ROOT_ID:
            put(edge.child, edge.parent, edge.label.value)

    changed = True
    while changed:
        changed = False
        for a in nodes:
            for b in nodes:
                for c in nodes:
                    if a == b or b == c or a == c:
                        continue
                    first = known.get((a, b))
                    second = known.get((b, c))
                    if first is None or second is None:
                        continue
                    derived = _ORACLE_COMPOSE.get((first, second))
                    if derived is not None and (a, c) not in known:
                        put(a, c, derived)
                        changed = True
    return {(a, b): rel for (a, b), rel in known.items() if a < b}
