"""Pseudo-sentence rendering of a (parent, child) pair for transformer input.

Each side reads: the node's words, its label (TIMEX or EVENT), a ':'
separator, then the node's containing sentence. The assembled sequence
is [CLS] parent_side [SEP] child_side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .core import Document, MentionKind

CLS_TOKEN = "[CLS]"
SEP_TOKEN = "[SEP]"
NODE_LABEL_TIMEX = "TIMEX"
NODE_LABEL_EVENT = "EVENT"
SIDE_SEPARATOR = ":"
ROOT_WORD = "root"


@dataclass(frozen=True)
class PseudoSentencePair:
    """Token rendering of one candidate pair.

    ``parent_head`` / ``child_head`` give the length of each side's
    protected prefix (node words, label, ':'); truncation only ever
    removes sentence tokens after the prefix.
    """

    parent_side: tuple[str, ...]
    child_side: tuple[str, ...]
    parent_head: int
    child_head: int

    def assembled(self, cls_token: str = CLS_TOKEN, sep_token: str = SEP_TOKEN) -> tuple[str, ...]:
        return (cls_token, *self.parent_side, sep_token, *self.child_side)


def _render_side(doc: Document, node_id: str) -> tuple[tuple[str, ...], int]:
    node = doc.node(node_id)
    if node.kind is MentionKind.ROOT:
        words: tuple[str, ...] = (ROOT_WORD,)
        label = NODE_LABEL_TIMEX
        sentence: tuple[str, ...] = ()
    elif node.kind is MentionKind.DCT:
        words = tuple(doc.dct_text.split())
        label = NODE_LABEL_TIMEX
        sentence = ()
    else:
        words = tuple(node.text.split())
        label = NODE_LABEL_TIMEX if node.kind is MentionKind.TIMEX else NODE_LABEL_EVENT
        sentence = doc.sentences[node.sentence_index]
    head = (*words, label, SIDE_SEPARATOR)
    return (*head, *sentence), len(head)


def build_pseudo_sentence_pair(doc: Document, parent_id: str, child_id: str) -> PseudoSentencePair:
    if parent_id == child_id:
        raise ValueError(f"{doc.doc_id}: parent and child must differ ({parent_id})")
    parent_side, parent_head = _render_side(doc, parent_id)
    child_side, child_head = _render_side(doc, child_id)
    return PseudoSentencePair(parent_side, child_side, parent_head, child_head)


def truncate_pair(
    pair: PseudoSentencePair,
    max_tokens: int,
    token_cost: Callable[[str], int] | None = None,
) -> PseudoSentencePair:
    """Trim sentence tails until the assembled pair costs at most max_tokens.

    ``token_cost`` maps one whitespace token to its subword count
    (default 1, i.e. plain token counting). The side with the longer
    remaining sentence loses its last token first, so both sentences
    shrink evenly; node words and labels are never cut.
    """
    cost = token_cost if token_cost is not None else (lambda token: 1)
    parent = list(pair.parent_side)
    child = list(pair.child_side)
    total = 2 + sum(map(cost, parent)) + sum(map(cost, child))
    while total > max_tokens:
        parent_tail = len(parent) - pair.parent_head
        child_tail = len(child) - pair.child_head
        if parent_tail <= 0 and child_tail <= 0:
            raise ValueError(
                f"pair does not fit in {max_tokens} tokens even with both sentences empty"
            )
        if parent_tail >= child_tail:
            total -= cost(parent.pop())
        else:
            total -= cost(child.pop())
    return PseudoSentencePair(tuple(parent), tuple(child), pair.parent_head, pair.child_head)
