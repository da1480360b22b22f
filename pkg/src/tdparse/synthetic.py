"""Small synthetic corpora with unambiguous temporal cues.

Each generated document opens with a dated report sentence (its TIMEX
attaches to ROOT) and continues with single-event sentences whose cue
word determines the gold parent and label:

    "previously"  -> BEFORE the DCT
    "currently"   -> OVERLAP with the DCT
    "will soon"   -> AFTER the DCT
    "beforehand"  -> BEFORE the previous event
    "meanwhile"   -> OVERLAP with the previous event
    "afterwards"  -> AFTER the previous event

The mapping is deterministic given the seed, so a model that learns the
cue vocabulary can fit the corpus essentially perfectly.
"""

from __future__ import annotations

import random

from .core import (
    DCT_ID,
    ROOT_ID,
    Document,
    Edge,
    MentionKind,
    RelationLabel,
    TemporalDependencyTree,
    deduced_root_edges,
)

MONTHS = ("January", "March", "April", "June", "August", "October")
DAYS = ("3", "7", "12", "19", "24", "28")
NOUNS = ("committee", "board", "panel", "council", "ministry", "delegation")
PAST_VERBS = ("met", "voted", "adjourned", "agreed", "objected", "resigned")
PRESENT_VERBS = ("meets", "votes", "deliberates", "agrees", "objects", "presides")
BASE_VERBS = ("meet", "vote", "adjourn", "agree", "object", "resign")

DCT_CUES = ("previously", "currently", "will soon")
PREVIOUS_EVENT_CUES = ("beforehand", "meanwhile", "afterwards")

_CUE_LABELS = {
    "previously": RelationLabel.BEFORE,
    "currently": RelationLabel.OVERLAP,
    "will soon": RelationLabel.AFTER,
    "beforehand": RelationLabel.BEFORE,
    "meanwhile": RelationLabel.OVERLAP,
    "afterwards": RelationLabel.AFTER,
}


def _event_sentence(cue: str, noun: str, verb_index: int) -> tuple[list[str], int]:
    """Build one single-event sentence; returns (tokens, verb position)."""
    if cue == "will soon":
        tokens = ["the", noun, "will", "soon", BASE_VERBS[verb_index], "."]
        return tokens, 4
    if cue == "currently":
        tokens = ["currently", ",", "the", noun, PRESENT_VERBS[verb_index], "."]
        return tokens, 4
    if cue == "beforehand":
        tokens = ["beforehand", ",", "the", noun, "had", PAST_VERBS[verb_index], "."]
        return tokens, 5
    tokens = [cue, ",", "the", noun, PAST_VERBS[verb_index], "."]
    return tokens, 4


def synthetic_document(
    doc_id: str, rng: random.Random, *, n_events: int | None = None
) -> tuple[Document, TemporalDependencyTree]:
    """Generate one cue-template document and its gold tree."""
    if n_events is None:
        n_events = rng.randint(2, 5)
    if n_events < 1:
        raise ValueError("a synthetic document needs at least one event")

    month = rng.choice(MONTHS)
    day = rng.choice(DAYS)
    sentences = [["the", "report", "was", "dated", month, day, "."]]
    mentions = [("t0", MentionKind.TIMEX, 0, (4, 6), f"{month} {day}")]
    edges = [Edge("t0", ROOT_ID, RelationLabel.DEPENDS_ON)]

    previous_event: str | None = None
    for index in range(n_events):
        if previous_event is None:
            cue = rng.choice(DCT_CUES)
        else:
            cue = rng.choice(DCT_CUES + PREVIOUS_EVENT_CUES)
        tokens, verb_position = _event_sentence(
            cue, rng.choice(NOUNS), rng.randrange(len(PAST_VERBS))
        )
        sentence_index = len(sentences)
        sentences.append(tokens)

        event_id = f"e{index + 1}"
        span = (verb_position, verb_position + 1)
        mentions.append(
            (event_id, MentionKind.EVENT, sentence_index, span, tokens[verb_position])
        )
        parent = DCT_ID if cue in DCT_CUES else previous_event
        edges.append(Edge(event_id, parent, _CUE_LABELS[cue]))
        previous_event = event_id

    dct_day = rng.choice(DAYS)
    doc = Document.from_unordered(
        doc_id, sentences, mentions, f"{rng.choice(MONTHS)} {dct_day}"
    )
    edges.append(deduced_root_edges(doc))
    return doc, TemporalDependencyTree(doc_id, frozenset(edges))


def synthetic_corpus(
    n_docs: int = 20, seed: int = 0
) -> list[tuple[Document, TemporalDependencyTree]]:
    """Generate a deterministic corpus of cue-template documents."""
    if n_docs < 1:
        raise ValueError("n_docs must be at least 1")
    rng = random.Random(seed)
    return [
        synthetic_document(f"synthetic-{index:03d}", rng) for index in range(n_docs)
    ]
