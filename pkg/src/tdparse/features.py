"""Binary linguistic features concatenated onto every pair representation.

Layout, for a window of ``back`` preceding and ``forward`` following
mentions:

    [0 .. back-1]                signed distance bucket -back .. -1
    [back .. back+forward-1]     signed distance bucket +1 .. +forward
    [back+forward]               distance out of range (synthetic parents too)
    [back+forward+1]             parent and child share a sentence
    [.. +8]                      child kind x parent kind one-hot
    [-2]                         parent is DCT
    [-1]                         parent is ROOT
"""

from __future__ import annotations

import numpy as np

from .candidates import WindowConfig
from .core import Document, MentionKind

# A feature vector is a fixed-width float32 0/1 array.
LinguisticFeatureVector = np.ndarray

_CHILD_KINDS = (MentionKind.EVENT, MentionKind.TIMEX)
_PARENT_KINDS = (MentionKind.ROOT, MentionKind.DCT, MentionKind.TIMEX, MentionKind.EVENT)


def feature_dim(cfg: WindowConfig) -> int:
    return cfg.back + cfg.forward + 1 + 1 + len(_CHILD_KINDS) * len(_PARENT_KINDS) + 2


def extract_features(
    doc: Document, parent_id: str, child_id: str, cfg: WindowConfig
) -> LinguisticFeatureVector:
    parent = doc.node(parent_id)
    child = doc.node(child_id)
    if child.is_synthetic:
        raise ValueError(f"{child_id} cannot be a child")
    vector = np.zeros(feature_dim(cfg), dtype=np.float32)

    out_of_range = cfg.back + cfg.forward
    if parent.is_synthetic:
        vector[out_of_range] = 1.0
    else:
        distance = parent.document_order - child.document_order
        if -cfg.back <= distance <= -1:
            vector[distance + cfg.back] = 1.0
        elif 1 <= distance <= cfg.forward:
            vector[cfg.back + distance - 1] = 1.0
        else:
            vector[out_of_range] = 1.0

    base = out_of_range + 1
    if not parent.is_synthetic and parent.sentence_index == child.sentence_index:
        vector[base] = 1.0

    pair_index = _CHILD_KINDS.index(child.kind) * len(_PARENT_KINDS) + _PARENT_KINDS.index(
        parent.kind
    )
    vector[base + 1 + pair_index] = 1.0

    if parent.kind is MentionKind.DCT:
        vector[-2] = 1.0
    if parent.kind is MentionKind.ROOT:
        vector[-1] = 1.0
    return vector
