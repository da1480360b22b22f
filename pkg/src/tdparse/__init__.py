"""Temporal dependency parsing toolkit."""

__version__ = "0.1.0"

from .candidates import CandidateSet, TrainingInstance, WindowConfig, build_training_instances, generate_candidates
from .closure import (
    ClosureInconsistency,
    PairRelation,
    RelationMatrix,
    close,
    equivalence_aware_report,
    trees_equivalent,
)
from .core import (
    DCT_ID,
    ROOT_ID,
    Document,
    DocumentMismatch,
    Edge,
    Mention,
    MentionKind,
    RelationLabel,
    TdpError,
    TemporalDependencyTree,
    deduced_root_edges,
    legal_labels,
    legal_parent_kinds,
    validate_tree,
)
from .corpus import CorpusFormatError, corpus_stats, load_corpus, load_documents, save_corpus
from .decoder import DecodeTrace, cycle_skip_rate, decode, parse_document, parse_documents
from .encoders import ConfigurationError, EncoderConfig, EncoderVariant, Vocabulary, build_encoder
from .evaluation import EvalReport, category_breakdown_delta, evaluate
from .pseudo import PseudoSentencePair, build_pseudo_sentence_pair, truncate_pair
from .ranking import ScoreRow, ScoreTable, TdpRanker, ranking_loss, score_child, table_from_scores
from .synthetic import synthetic_corpus, synthetic_document
from .training import (
    CheckpointError,
    GridCell,
    GridResult,
    TrainConfig,
    TrainingDiverged,
    TrainResult,
    build_model,
    grid_search,
    load_checkpoint,
    save_checkpoint,
    train,
)

__all__ = [
    "CandidateSet",
    "CheckpointError",
    "ClosureInconsistency",
    "ConfigurationError",
    "CorpusFormatError",
    "DCT_ID",
    "DecodeTrace",
    "Document",
    "DocumentMismatch",
    "Edge",
    "EncoderConfig",
    "EncoderVariant",
    "EvalReport",
    "GridCell",
    "GridResult",
    "Mention",
    "MentionKind",
    "PairRelation",
    "PseudoSentencePair",
    "ROOT_ID",
    "RelationLabel",
    "RelationMatrix",
    "ScoreRow",
    "ScoreTable",
    "TdpError",
    "TdpRanker",
    "TemporalDependencyTree",
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "TrainingInstance",
    "Vocabulary",
    "WindowConfig",
    "build_encoder",
    "build_model",
    "build_pseudo_sentence_pair",
    "build_training_instances",
    "category_breakdown_delta",
    "close",
    "corpus_stats",
    "cycle_skip_rate",
    "decode",
    "deduced_root_edges",
    "equivalence_aware_report",
    "evaluate",
    "generate_candidates",
    "grid_search",
    "legal_labels",
    "legal_parent_kinds",
    "load_checkpoint",
    "load_corpus",
    "load_documents",
    "parse_document",
    "parse_documents",
    "ranking_loss",
    "save_checkpoint",
    "save_corpus",
    "score_child",
    "synthetic_corpus",
    "synthetic_document",
    "table_from_scores",
    "train",
    "trees_equivalent",
    "truncate_pair",
    "validate_tree",
]
