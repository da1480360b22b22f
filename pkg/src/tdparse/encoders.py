"""Pair encoders: three recurrent variants and a transformer variant.

Every encoder maps (parent, child) node pairs within a document to
fixed-size vectors, with the binary linguistic features concatenated at
the end. Recurrent variants run one bidirectional LSTM over the
document tokens and read its output at each node's head token (first
token of the span; ROOT and DCT use learned sentinel vectors). The
transformer variant encodes the assembled pseudo-sentence pair and
reads the classification-start position.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Iterable, MutableMapping, Sequence

import numpy as np
import torch
from torch import nn

from .candidates import WindowConfig
from .core import Document, MentionKind, TdpError
from .features import extract_features, feature_dim
from .pseudo import (
    CLS_TOKEN,
    NODE_LABEL_EVENT,
    NODE_LABEL_TIMEX,
    ROOT_WORD,
    SEP_TOKEN,
    SIDE_SEPARATOR,
    build_pseudo_sentence_pair,
    truncate_pair,
)


class ConfigurationError(TdpError):
    """A model cannot be assembled from the given configuration."""


class EncoderVariant(Enum):
    RANDOM_INIT_RECURRENT = "random_init_recurrent"
    STATIC_PRETRAINED_RECURRENT = "static_pretrained_recurrent"
    FROZEN_CONTEXTUAL_RECURRENT = "frozen_contextual_recurrent"
    FINETUNED_TRANSFORMER = "finetuned_transformer"


RECURRENT_VARIANTS = (
    EncoderVariant.RANDOM_INIT_RECURRENT,
    EncoderVariant.STATIC_PRETRAINED_RECURRENT,
    EncoderVariant.FROZEN_CONTEXTUAL_RECURRENT,
)

# contextual_model_name values with this prefix resolve to the built-in
# deterministic randomly-initialized embedder instead of a downloaded
# checkpoint ("tiny-random" or "tiny-random-<dim>").
TINY_RANDOM_PREFIX = "tiny-random"


@dataclass
class EncoderConfig:
    variant: EncoderVariant
    embedding_dim: int = 64
    recurrent_hidden_dim: int = 64
    contextual_model_name: str | None = None
    max_sequence_length: int = 128
    freeze_contextual: bool | None = None
    static_vectors_path: str | None = None
    ff_hidden_dim: int = 64
    transformer_layers: int = 2
    transformer_heads: int = 4

    def __post_init__(self) -> None:
        if isinstance(self.variant, str):
            self.variant = EncoderVariant(self.variant)
        if self.freeze_contextual is None:
            self.freeze_contextual = self.variant is EncoderVariant.FROZEN_CONTEXTUAL_RECURRENT
        if self.variant is EncoderVariant.FROZEN_CONTEXTUAL_RECURRENT and not self.freeze_contextual:
            raise ConfigurationError("the frozen contextual variant requires freeze_contextual")
        if self.variant is EncoderVariant.FINETUNED_TRANSFORMER and self.freeze_contextual:
            raise ConfigurationError("the finetuned transformer variant cannot freeze its encoder")
        for name in ("embedding_dim", "recurrent_hidden_dim", "max_sequence_length",
                     "ff_hidden_dim", "transformer_layers", "transformer_heads"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be positive")

    def to_dict(self) -> dict:
        payload = asdict(self)
        payload["variant"] = self.variant.value
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "EncoderConfig":
        return cls(**payload)


class Vocabulary:
    """Deterministic whitespace-token vocabulary.

    Index 0 is padding and index 1 the unknown token; the pseudo-sentence
    special tokens are always present so the transformer variant can use
    the same vocabulary.
    """

    pad_token = "<pad>"
    unk_token = "<unk>"

    _SPECIALS = (
        pad_token,
        unk_token,
        CLS_TOKEN,
        SEP_TOKEN,
        SIDE_SEPARATOR,
        ROOT_WORD,
        NODE_LABEL_TIMEX,
        NODE_LABEL_EVENT,
    )

    def __init__(self, tokens: Iterable[str]):
        extra = sorted(set(tokens) - set(self._SPECIALS))
        self._tokens = (*self._SPECIALS, *extra)
        self._index = {token: i for i, token in enumerate(self._tokens)}

    @classmethod
    def from_documents(cls, docs: Iterable[Document]) -> "Vocabulary":
        tokens: list[str] = []
        for doc in docs:
            tokens.extend(doc.flat_tokens)
            tokens.extend(doc.dct_text.split())
            for mention in doc.mentions:
                tokens.extend(mention.text.split())
        return cls(tokens)

    @classmethod
    def from_ordered_tokens(cls, tokens: Sequence[str]) -> "Vocabulary":
        """Rebuild a vocabulary with an exact, already-final token order."""
        if tuple(tokens[: len(cls._SPECIALS)]) != cls._SPECIALS:
            raise ValueError("token list does not start with the reserved specials")
        vocab = cls.__new__(cls)
        vocab._tokens = tuple(tokens)
        vocab._index = {token: i for i, token in enumerate(vocab._tokens)}
        if len(vocab._index) != len(vocab._tokens):
            raise ValueError("duplicate tokens in ordered vocabulary")
        return vocab

    @property
    def tokens(self) -> tuple[str, ...]:
        return self._tokens

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def index(self, token: str) -> int:
        return self._index.get(token, 1)

    def indexes(self, tokens: Iterable[str]) -> list[int]:
        return [self._index.get(token, 1) for token in tokens]


def _sinusoidal_positions(length: int, dim: int) -> torch.Tensor:
    position = torch.arange(length, dtype=torch.float32).unsqueeze(1)
    step = torch.exp(torch.arange(0, dim, 2, dtype=torch.float32) * (-math.log(10000.0) / dim))
    table = torch.zeros(length, dim)
    table[:, 0::2] = torch.sin(position * step)
    table[:, 1::2] = torch.cos(position * step)
    return table


class HashedContextualEmbedder(nn.Module):
    """Deterministic stand-in for a pretrained contextual encoder.

    Token ids come from a stable hash, so no vocabulary or checkpoint
    file is needed; one randomly initialized (but seed-fixed) transformer
    layer per sentence makes the embeddings context dependent. Intended
    for tests and fully offline runs.
    """

    def __init__(self, dim: int = 32, buckets: int = 4096, layers: int = 1, seed: int = 1234):
        super().__init__()
        if dim % 2:
            raise ConfigurationError("embedder dim must be even")
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            self.token_embedding = nn.Embedding(buckets, dim)
            layer = nn.TransformerEncoderLayer(
                d_model=dim, nhead=2, dim_feedforward=2 * dim, dropout=0.0, batch_first=True
            )
            self.encoder = nn.TransformerEncoder(layer, num_layers=layers)
        self.buckets = buckets
        self.dim = dim

    def _bucket(self, token: str) -> int:
        return zlib.crc32(token.encode("utf-8")) % self.buckets

    def embed_sentence(self, tokens: Sequence[str]) -> torch.Tensor:
        if not tokens:
            return torch.zeros(0, self.dim)
        ids = torch.tensor([[self._bucket(token) for token in tokens]])
        states = self.token_embedding(ids) + _sinusoidal_positions(len(tokens), self.dim)
        return self.encoder(states)[0]

    def embed_document(self, doc: Document) -> torch.Tensor:
        parts = [self.embed_sentence(sentence) for sentence in doc.sentences]
        if not parts:
            return torch.zeros(0, self.dim)
        return torch.cat(parts, dim=0)


class PretrainedContextualEmbedder(nn.Module):
    """Word-level embeddings from a pretrained checkpoint, mean-pooling
    subwords back onto the corpus whitespace tokens."""

    def __init__(self, name: str, tokenizer, model):
        super().__init__()
        self.name = name
        self.tokenizer = tokenizer
        self.model = model
        self.dim = model.config.hidden_size

    def embed_sentence(self, tokens: Sequence[str]) -> torch.Tensor:
        if not tokens:
            return torch.zeros(0, self.dim)
        encoded = self.tokenizer(
            list(tokens), is_split_into_words=True, return_tensors="pt", truncation=True
        )
        states = self.model(**encoded).last_hidden_state[0]
        pooled = torch.zeros(len(tokens), self.dim)
        counts = torch.zeros(len(tokens), 1)
        for position, word in enumerate(encoded.word_ids(0)):
            if word is not None and word < len(tokens):
                pooled[word] += states[position]
                counts[word] += 1
        return pooled / counts.clamp(min=1)

    def embed_document(self, doc: Document) -> torch.Tensor:
        parts = [self.embed_sentence(sentence) for sentence in doc.sentences]
        if not parts:
            return torch.zeros(0, self.dim)
        return torch.cat(parts, dim=0)


def _load_pretrained(name: str):
    try:
        from transformers import AutoModel, AutoTokenizer
    except Exception as err:
        raise ConfigurationError(
            f"checkpoint {name!r} needs the optional transformers dependency: {err}"
        ) from err
    try:
        tokenizer = AutoTokenizer.from_pretrained(name)
        model = AutoModel.from_pretrained(name)
    except Exception as err:
        raise ConfigurationError(f"cannot load contextual checkpoint {name!r}: {err}") from err
    return tokenizer, model


def resolve_contextual_embedder(name: str | None) -> nn.Module:
    """Turn a checkpoint identifier into an embedder module.

    "tiny-random" (optionally "tiny-random-<dim>") builds the offline
    hashed embedder; anything else goes through the optional pretrained
    bridge and raises ConfigurationError when it cannot be loaded.
    """
    if name is None:
        raise ConfigurationError("contextual variants require contextual_model_name")
    if name == TINY_RANDOM_PREFIX or name.startswith(TINY_RANDOM_PREFIX + "-"):
        suffix = name[len(TINY_RANDOM_PREFIX) :].lstrip("-")
        if not suffix:
            return HashedContextualEmbedder()
        try:
            return HashedContextualEmbedder(dim=int(suffix))
        except ValueError:
            raise ConfigurationError(f"bad embedder size in {name!r}") from None
    tokenizer, model = _load_pretrained(name)
    return PretrainedContextualEmbedder(name, tokenizer, model)


def load_word_vectors(path: str) -> tuple[dict[str, np.ndarray], int]:
    """Parse a text word-vector file (one word and its numbers per line).

    A leading word2vec-style count/dim header line is skipped. Returns
    the vectors and their common dimensionality.
    """
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, 1):
                parts = line.rstrip("\n").split(" ")
                if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                    continue
                if len(parts) < 2:
                    continue
                word, values = parts[0], parts[1:]
                try:
                    vector = np.asarray([float(v) for v in values], dtype=np.float32)
                except ValueError as err:
                    raise ConfigurationError(f"{path}:{lineno}: bad vector value: {err}") from None
                if dim is None:
                    dim = len(vector)
                elif len(vector) != dim:
                    raise ConfigurationError(
                        f"{path}:{lineno}: vector of length {len(vector)}, expected {dim}"
                    )
                vectors[word] = vector
    except OSError as err:
        raise ConfigurationError(f"cannot read word vectors {path}: {err}") from err
    if dim is None:
        raise ConfigurationError(f"{path}: no vectors found")
    return vectors, dim


# A cache maps doc_id to encoder-internal document state. It must not
# outlive a parameter update: callers create one per batch or per
# evaluation pass.
StateCache = MutableMapping[str, torch.Tensor]


class PairEncoder(nn.Module):
    """Base class; concrete encoders set ``output_dim`` at construction."""

    output_dim: int

    def encode_pairs(
        self, doc: Document, pairs: Sequence[tuple[str, str]], cache: StateCache | None = None
    ) -> torch.Tensor:
        raise NotImplementedError

    def encode_pair(self, doc: Document, parent_id: str, child_id: str) -> torch.Tensor:
        return self.encode_pairs(doc, [(parent_id, child_id)])[0]

    def _feature_block(self, doc: Document, pairs: Sequence[tuple[str, str]], window: WindowConfig) -> torch.Tensor:
        rows = np.stack([extract_features(doc, p, c, window) for p, c in pairs])
        return torch.from_numpy(rows)


class RecurrentPairEncoder(PairEncoder):
    """Bidirectional LSTM over the whole document.

    A pair is the concatenation of the LSTM outputs at the parent's and
    child's head tokens (learned sentinels for ROOT/DCT) plus features.
    """

    def __init__(
        self,
        config: EncoderConfig,
        window: WindowConfig,
        vocab: Vocabulary,
        static_vectors: dict[str, np.ndarray] | None = None,
        contextual: nn.Module | None = None,
    ):
        super().__init__()
        self.config = config
        self.window = window
        self.vocab = vocab
        hidden = config.recurrent_hidden_dim
        if config.variant is EncoderVariant.FROZEN_CONTEXTUAL_RECURRENT:
            if contextual is None:
                contextual = resolve_contextual_embedder(config.contextual_model_name)
            self.contextual = contextual
            for parameter in self.contextual.parameters():
                parameter.requires_grad_(False)
            self.embedding = None
            input_dim = contextual.dim
        else:
            self.contextual = None
            self.embedding = nn.Embedding(len(vocab), config.embedding_dim, padding_idx=0)
            if static_vectors is not None:
                self._init_embedding(static_vectors)
            input_dim = config.embedding_dim
        self.rnn = nn.LSTM(input_dim, hidden, bidirectional=True, batch_first=True)
        self.root_vector = nn.Parameter(torch.randn(2 * hidden) * 0.1)
        self.dct_vector = nn.Parameter(torch.randn(2 * hidden) * 0.1)
        self.output_dim = 4 * hidden + feature_dim(window)

    def _init_embedding(self, vectors: dict[str, np.ndarray]) -> None:
        with torch.no_grad():
            for token, index in ((t, self.vocab.index(t)) for t in self.vocab.tokens):
                if token in vectors:
                    self.embedding.weight[index] = torch.from_numpy(vectors[token])

    def document_states(self, doc: Document) -> torch.Tensor:
        """LSTM outputs for every token of the flattened document, [T, 2H]."""
        if self.contextual is not None:
            with torch.no_grad():
                embedded = self.contextual.embed_document(doc)
        else:
            ids = torch.tensor([self.vocab.indexes(doc.flat_tokens)], dtype=torch.long)
            if ids.shape[1] == 0:
                embedded = torch.zeros(0, self.config.embedding_dim)
            else:
                embedded = self.embedding(ids)[0]
        if embedded.shape[0] == 0:
            return torch.zeros(0, 2 * self.config.recurrent_hidden_dim)
        outputs, _ = self.rnn(embedded.unsqueeze(0))
        return outputs[0]

    def _node_vector(self, doc: Document, states: torch.Tensor, node_id: str) -> torch.Tensor:
        node = doc.node(node_id)
        if node.kind is MentionKind.ROOT:
            return self.root_vector
        if node.kind is MentionKind.DCT:
            return self.dct_vector
        return states[doc.flat_token_index(node)]

    def encode_pairs(
        self, doc: Document, pairs: Sequence[tuple[str, str]], cache: StateCache | None = None
    ) -> torch.Tensor:
        states = cache.get(doc.doc_id) if cache is not None else None
        if states is None:
            states = self.document_states(doc)
            if cache is not None:
                cache[doc.doc_id] = states
        vectors = torch.stack(
            [
                torch.cat([self._node_vector(doc, states, p), self._node_vector(doc, states, c)])
                for p, c in pairs
            ]
        )
        return torch.cat([vectors, self._feature_block(doc, pairs, self.window)], dim=1)


class TransformerPairEncoder(PairEncoder):
    """Transformer over the assembled pseudo-sentence pair.

    The output at the classification-start position is the pair
    representation; the whole stack trains (nothing is frozen).
    """

    def __init__(self, config: EncoderConfig, window: WindowConfig, vocab: Vocabulary):
        super().__init__()
        if config.embedding_dim % config.transformer_heads:
            raise ConfigurationError("embedding_dim must be divisible by transformer_heads")
        self.config = config
        self.window = window
        self.vocab = vocab
        dim = config.embedding_dim
        self.token_embedding = nn.Embedding(len(vocab), dim, padding_idx=0)
        self.position_embedding = nn.Embedding(config.max_sequence_length, dim)
        layer = nn.TransformerEncoderLayer(
            d_model=dim,
            nhead=config.transformer_heads,
            dim_feedforward=4 * dim,
            dropout=0.1,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=config.transformer_layers)
        self.output_dim = dim + feature_dim(window)

    def encode_pairs(
        self, doc: Document, pairs: Sequence[tuple[str, str]], cache: StateCache | None = None
    ) -> torch.Tensor:
        sequences = []
        for parent_id, child_id in pairs:
            pair = build_pseudo_sentence_pair(doc, parent_id, child_id)
            pair = truncate_pair(pair, self.config.max_sequence_length)
            sequences.append(self.vocab.indexes(pair.assembled()))
        longest = max(len(s) for s in sequences)
        ids = torch.zeros(len(sequences), longest, dtype=torch.long)
        padding = torch.ones(len(sequences), longest, dtype=torch.bool)
        for row, sequence in enumerate(sequences):
            ids[row, : len(sequence)] = torch.tensor(sequence, dtype=torch.long)
            padding[row, : len(sequence)] = False
        states = self.token_embedding(ids) + self.position_embedding.weight[:longest]
        encoded = self.encoder(states, src_key_padding_mask=padding)
        return torch.cat([encoded[:, 0, :], self._feature_block(doc, pairs, self.window)], dim=1)


class PretrainedPairTransformer(PairEncoder):
    """Pseudo-sentence pair classification over a pretrained checkpoint.

    Optional bridge; requires the transformers package and a reachable
    checkpoint, so it is constructed lazily and never in offline tests.
    """

    def __init__(self, config: EncoderConfig, window: WindowConfig, vocab: Vocabulary):
        super().__init__()
        self.config = config
        self.window = window
        self.vocab = vocab
        tokenizer, model = _load_pretrained(config.contextual_model_name)
        self.tokenizer = tokenizer
        self.model = model
        self.output_dim = model.config.hidden_size + feature_dim(window)

    def encode_pairs(
        self, doc: Document, pairs: Sequence[tuple[str, str]], cache: StateCache | None = None
    ) -> torch.Tensor:
        def subword_cost(token: str) -> int:
            return max(len(self.tokenizer.tokenize(token)), 1)

        parents, children = [], []
        for parent_id, child_id in pairs:
            pair = build_pseudo_sentence_pair(doc, parent_id, child_id)
            pair = truncate_pair(pair, self.config.max_sequence_length - 1, subword_cost)
            parents.append(" ".join(pair.parent_side))
            children.append(" ".join(pair.child_side))
        encoded = self.tokenizer(
            parents,
            children,
            padding=True,
            truncation=True,
            max_length=self.config.max_sequence_length,
            return_tensors="pt",
        )
        states = self.model(**encoded).last_hidden_state[:, 0, :]
        return torch.cat([states, self._feature_block(doc, pairs, self.window)], dim=1)


def build_encoder(
    config: EncoderConfig,
    window: WindowConfig,
    vocab: Vocabulary,
    *,
    load_static_vectors: bool = True,
) -> PairEncoder:
    """Assemble the encoder a config describes.

    ``load_static_vectors=False`` skips reading the word-vector file for
    the static variant (checkpoint restore overwrites the weights anyway).
    """
    if config.variant in RECURRENT_VARIANTS:
        static = None
        if config.variant is EncoderVariant.STATIC_PRETRAINED_RECURRENT and load_static_vectors:
            if config.static_vectors_path is None:
                raise ConfigurationError("static variant requires static_vectors_path")
            static, dim = load_word_vectors(config.static_vectors_path)
            if dim != config.embedding_dim:
                raise ConfigurationError(
                    f"word vectors have dimension {dim}, config says {config.embedding_dim}"
                )
        return RecurrentPairEncoder(config, window, vocab, static_vectors=static)
    name = config.contextual_model_name
    if name is None:
        raise ConfigurationError(
            "finetuned transformer requires contextual_model_name "
            f"(use {TINY_RANDOM_PREFIX!r} for a local randomly initialized model)"
        )
    if name == TINY_RANDOM_PREFIX or name.startswith(TINY_RANDOM_PREFIX + "-"):
        return TransformerPairEncoder(config, window, vocab)
    return PretrainedPairTransformer(config, window, vocab)
