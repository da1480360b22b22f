"""Encoder configs, vocabulary, embedders, and the four pair-encoder variants."""

import numpy as np
import pytest
import torch

from helpers import treaty_document
from tdparse.candidates import WindowConfig
from tdparse.core import DCT_ID, ROOT_ID
from tdparse.encoders import (
    ConfigurationError,
    EncoderConfig,
    EncoderVariant,
    HashedContextualEmbedder,
    RecurrentPairEncoder,
    TransformerPairEncoder,
    Vocabulary,
    build_encoder,
    load_word_vectors,
    resolve_contextual_embedder,
)
from tdparse.features import extract_features


def _vocab():
    return Vocabulary.from_documents([treaty_document()])


def test_config_coerces_variant_strings():
    config = EncoderConfig("random_init_recurrent")
    assert config.variant is EncoderVariant.RANDOM_INIT_RECURRENT


def test_config_freeze_defaults_follow_the_variant():
    frozen = EncoderConfig(EncoderVariant.FROZEN_CONTEXTUAL_RECURRENT, contextual_model_name="tiny-random")
    assert frozen.freeze_contextual is True
    finetuned = EncoderConfig(EncoderVariant.FINETUNED_TRANSFORMER, contextual_model_name="tiny-random")
    assert finetuned.freeze_contextual is False


def test_config_rejects_contradictory_freezing():
    with pytest.raises(ConfigurationError, match="requires freeze_contextual"):
        EncoderConfig(EncoderVariant.FROZEN_CONTEXTUAL_RECURRENT, freeze_contextual=False)
    with pytest.raises(ConfigurationError, match="cannot freeze its encoder"):
        EncoderConfig(EncoderVariant.FINETUNED_TRANSFORMER, freeze_contextual=True)


def test_config_rejects_non_positive_dimensions():
    with pytest.raises(ConfigurationError, match="embedding_dim must be positive"):
        EncoderConfig(EncoderVariant.RANDOM_INIT_RECURRENT, embedding_dim=0)
    with pytest.raises(ConfigurationError, match="transformer_heads must be positive"):
        EncoderConfig(EncoderVariant.RANDOM_INIT_RECURRENT, transformer_heads=0)


def test_config_dict_round_trip():
    config = EncoderConfig(
        EncoderVariant.FROZEN_CONTEXTUAL_RECURRENT,
        recurrent_hidden_dim=16,
        contextual_model_name="tiny-random-16",
    )
    payload = config.to_dict()
    assert payload["variant"] == "frozen_contextual_recurrent"
    assert EncoderConfig.from_dict(payload) == config


def test_vocabulary_specials_come_first():
    vocab = _vocab()
    assert vocab.tokens[:8] == ("<pad>", "<unk>", "[CLS]", "[SEP]", ":", "root", "TIMEX", "EVENT")
    assert vocab.index("<pad>") == 0
    assert vocab.index("<unk>") == 1
    assert vocab.index("never-seen-token") == 1


def test_vocabulary_covers_document_text():
    vocab = _vocab()
    for token in ("Kuchma", "Yeltsin", "ratification", "March", "1,", "1998"):
        assert token in vocab
    assert vocab.indexes(["Kuchma", "never-seen-token"])[1] == 1


def test_vocabulary_extras_are_sorted_and_deduplicated():
    vocab = Vocabulary(["b", "a", "b", "root"])
    assert vocab.tokens[8:] == ("a", "b")


def test_vocabulary_ordered_round_trip():
    vocab = _vocab()
    rebuilt = Vocabulary.from_ordered_tokens(list(vocab.tokens))
    assert rebuilt.tokens == vocab.tokens
    assert rebuilt.index("Kuchma") == vocab.index("Kuchma")


def test_vocabulary_ordered_rejects_bad_prefixes_and_duplicates():
    with pytest.raises(ValueError, match="reserved specials"):
        Vocabulary.from_ordered_tokens(["a", "b", "c"])
    vocab = _vocab()
    with pytest.raises(ValueError, match="duplicate tokens"):
        Vocabulary.from_ordered_tokens(list(vocab.tokens) + ["Kuchma"])


def test_hashed_embedder_is_deterministic_across_instances():
    first = HashedContextualEmbedder(dim=16)
    second = HashedContextualEmbedder(dim=16)
    sentence = ("Kuchma", "and", "Yeltsin")
    torch.testing.assert_close(first.embed_sentence(sentence), second.embed_sentence(sentence))


def test_hashed_embedder_is_context_dependent():
    embedder = HashedContextualEmbedder(dim=16)
    in_one = embedder.embed_sentence(("signed", "a", "plan"))[0]
    in_other = embedder.embed_sentence(("signed", "the", "treaty"))[0]
    assert not torch.allclose(in_one, in_other)


def test_hashed_embedder_document_shape():
    embedder = HashedContextualEmbedder(dim=16)
    doc = treaty_document()
    states = embedder.embed_document(doc)
    assert states.shape == (len(doc.flat_tokens), 16)


def test_hashed_embedder_rejects_odd_dim():
    with pytest.raises(ConfigurationError, match="must be even"):
        HashedContextualEmbedder(dim=15)


def test_resolve_contextual_embedder_names():
    assert resolve_contextual_embedder("tiny-random").dim == 32
    assert resolve_contextual_embedder("tiny-random-16").dim == 16
    with pytest.raises(ConfigurationError, match="bad embedder size"):
        resolve_contextual_embedder("tiny-random-huge")
    with pytest.raises(ConfigurationError, match="require contextual_model_name"):
        resolve_contextual_embedder(None)


def test_load_word_vectors_plain_file(tmp_path):
    path = tmp_path / "vectors.txt"
    path.write_text("cat 1 2 3\ndog 4 5 6\n", encoding="utf-8")
    vectors, dim = load_word_vectors(path)
    assert dim == 3
    assert set(vectors) == {"cat", "dog"}
    np.testing.assert_array_equal(vectors["cat"], np.asarray([1.0, 2.0, 3.0], dtype=np.float32))


def test_load_word_vectors_skips_header(tmp_path):
    path = tmp_path / "vectors.txt"
    path.write_text("2 3\ncat 1 2 3\ndog 4 5 6\n", encoding="utf-8")
    vectors, dim = load_word_vectors(path)
    assert (len(vectors), dim) == (2, 3)


def test_load_word_vectors_diagnostics(tmp_path):
    ragged = tmp_path / "ragged.txt"
    ragged.write_text("cat 1 2 3\ndog 4 5\n", encoding="utf-8")
    with pytest.raises(ConfigurationError, match=r"ragged.txt:2: vector of length 2, expected 3"):
        load_word_vectors(ragged)

    corrupt = tmp_path / "corrupt.txt"
    corrupt.write_text("cat 1 two 3\n", encoding="utf-8")
    with pytest.raises(ConfigurationError, match=r"corrupt.txt:1: bad vector value"):
        load_word_vectors(corrupt)

    empty = tmp_path / "empty.txt"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(ConfigurationError, match="no vectors found"):
        load_word_vectors(empty)

    with pytest.raises(ConfigurationError, match="cannot read word vectors"):
        load_word_vectors(tmp_path / "absent.txt")


def _pairs():
    return [(DCT_ID, "share"), (ROOT_ID, "feb-27-1998"), ("called", "saying")]


def test_random_init_recurrent_shapes_and_dim():
    config = EncoderConfig(EncoderVariant.RANDOM_INIT_RECURRENT, embedding_dim=8, recurrent_hidden_dim=8)
    window = WindowConfig()
    encoder = build_encoder(config, window, _vocab())
    assert isinstance(encoder, RecurrentPairEncoder)
    assert encoder.output_dim == 4 * 8 + 25
    encoded = encoder.encode_pairs(treaty_document(), _pairs())
    assert encoded.shape == (3, encoder.output_dim)


def test_encode_pair_matches_batch_row():
    config = EncoderConfig(EncoderVariant.RANDOM_INIT_RECURRENT, embedding_dim=8, recurrent_hidden_dim=8)
    encoder = build_encoder(config, WindowConfig(), _vocab())
    doc = treaty_document()
    single = encoder.encode_pair(doc, "called", "saying")
    batch = encoder.encode_pairs(doc, _pairs())
    torch.testing.assert_close(single, batch[2])


def test_feature_block_rides_along_unchanged():
    config = EncoderConfig(EncoderVariant.RANDOM_INIT_RECURRENT, embedding_dim=8, recurrent_hidden_dim=8)
    window = WindowConfig()
    encoder = build_encoder(config, window, _vocab())
    doc = treaty_document()
    encoded = encoder.encode_pairs(doc, _pairs())
    for row, (parent_id, child_id) in enumerate(_pairs()):
        expected = extract_features(doc, parent_id, child_id, window)
        np.testing.assert_array_equal(encoded[row, -25:].detach().numpy(), expected)


def test_state_cache_reuses_document_states():
    config = EncoderConfig(EncoderVariant.RANDOM_INIT_RECURRENT, embedding_dim=8, recurrent_hidden_dim=8)
    encoder = build_encoder(config, WindowConfig(), _vocab())
    doc = treaty_document()
    cache = {}
    first = encoder.encode_pairs(doc, _pairs(), cache=cache)
    assert doc.doc_id in cache
    second = encoder.encode_pairs(doc, _pairs(), cache=cache)
    torch.testing.assert_close(first, second)
    uncached = encoder.encode_pairs(doc, _pairs())
    torch.testing.assert_close(first, uncached)


def test_static_variant_initializes_known_rows(tmp_path):
    vocab = _vocab()
    vector = " ".join(str(float(i)) for i in range(8))
    path = tmp_path / "vectors.txt"
    path.write_text(f"Yeltsin {vector}\n", encoding="utf-8")
    config = EncoderConfig(
        EncoderVariant.STATIC_PRETRAINED_RECURRENT,
        embedding_dim=8,
        recurrent_hidden_dim=8,
        static_vectors_path=str(path),
    )
    encoder = build_encoder(config, WindowConfig(), vocab)
    row = encoder.embedding.weight[vocab.index("Yeltsin")].detach().numpy()
    np.testing.assert_array_equal(row, np.arange(8, dtype=np.float32))


def test_static_variant_requires_matching_dimensions(tmp_path):
    path = tmp_path / "vectors.txt"
    path.write_text("cat 1 2 3\n", encoding="utf-8")
    config = EncoderConfig(
        EncoderVariant.STATIC_PRETRAINED_RECURRENT,
        embedding_dim=8,
        static_vectors_path=str(path),
    )
    with pytest.raises(ConfigurationError, match="word vectors have dimension 3, config says 8"):
        build_encoder(config, WindowConfig(), _vocab())


def test_static_variant_requires_a_path():
    config = EncoderConfig(EncoderVariant.STATIC_PRETRAINED_RECURRENT, embedding_dim=8)
    with pytest.raises(ConfigurationError, match="requires static_vectors_path"):
        build_encoder(config, WindowConfig(), _vocab())


def test_static_variant_can_skip_vector_loading():
    config = EncoderConfig(EncoderVariant.STATIC_PRETRAINED_RECURRENT, embedding_dim=8, recurrent_hidden_dim=8)
    encoder = build_encoder(config, WindowConfig(), _vocab(), load_static_vectors=False)
    assert isinstance(encoder, RecurrentPairEncoder)


def test_frozen_variant_freezes_only_the_contextual_stack():
    config = EncoderConfig(
        EncoderVariant.FROZEN_CONTEXTUAL_RECURRENT,
        recurrent_hidden_dim=8,
        contextual_model_name="tiny-random-16",
    )
    encoder = build_encoder(config, WindowConfig(), _vocab())
    assert all(not p.requires_grad for p in encoder.contextual.parameters())
    assert all(p.requires_grad for p in encoder.rnn.parameters())
    assert encoder.output_dim == 4 * 8 + 25
    encoded = encoder.encode_pairs(treaty_document(), _pairs())
    assert encoded.shape == (3, encoder.output_dim)


def test_finetuned_transformer_shapes():
    config = EncoderConfig(
        EncoderVariant.FINETUNED_TRANSFORMER,
        embedding_dim=16,
        transformer_heads=2,
        transformer_layers=1,
        contextual_model_name="tiny-random",
    )
    encoder = build_encoder(config, WindowConfig(), _vocab())
    assert isinstance(encoder, TransformerPairEncoder)
    assert encoder.output_dim == 16 + 25
    encoder.eval()
    encoded = encoder.encode_pairs(treaty_document(), _pairs())
    assert encoded.shape == (3, encoder.output_dim)
    assert all(p.requires_grad for p in encoder.parameters())


def test_finetuned_transformer_respects_sequence_budget():
    config = EncoderConfig(
        EncoderVariant.FINETUNED_TRANSFORMER,
        embedding_dim=16,
        transformer_heads=2,
        transformer_layers=1,
        max_sequence_length=16,
        contextual_model_name="tiny-random",
    )
    encoder = build_encoder(config, WindowConfig(), _vocab())
    encoder.eval()
    encoded = encoder.encode_pairs(treaty_document(), [("called", "saying")])
    assert encoded.shape == (1, encoder.output_dim)


def test_transformer_head_divisibility_checked():
    config = EncoderConfig(
        EncoderVariant.FINETUNED_TRANSFORMER,
        embedding_dim=10,
        transformer_heads=4,
        contextual_model_name="tiny-random",
    )
    with pytest.raises(ConfigurationError, match="divisible by transformer_heads"):
        build_encoder(config, WindowConfig(), _vocab())


def test_finetuned_transformer_requires_a_model_name():
    config = EncoderConfig(EncoderVariant.FINETUNED_TRANSFORMER, embedding_dim=16, transformer_heads=2)
    with pytest.raises(ConfigurationError, match="requires contextual_model_name"):
        build_encoder(config, WindowConfig(), _vocab())
