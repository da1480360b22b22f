"""Training loop, grid search, and checkpoint serialization."""

from __future__ import annotations

import copy
import math
import random
import statistics
from dataclasses import dataclass, field, replace

import torch

from .candidates import WindowConfig, build_training_instances
from .core import Document, TdpError, TemporalDependencyTree
from .decoder import parse_documents
from .encoders import EncoderConfig, Vocabulary, build_encoder
from .evaluation import evaluate
from .ranking import TdpRanker


class TrainingDiverged(TdpError):
    """Raised when the training loss becomes non-finite."""


class CheckpointError(TdpError):
    """Raised when a checkpoint cannot be saved, loaded, or understood."""


CHECKPOINT_FORMAT = "tdparse.checkpoint/1"

DEFAULT_LEARNING_RATES = (0.001, 0.0001, 0.0005, 0.00025)
DEFAULT_EPOCH_GRID = (50, 75, 100)
DEFAULT_GRID_RUNS = 5


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings for one training run."""

    learning_rate: float = 0.001
    epochs: int = 50
    runs: int = 1
    optimizer: str = "adam"
    batch_size: int = 16
    seed: int = 0
    select_best_dev: bool = False
    stop_at_dev_f1: float | None = None

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.optimizer != "adam":
            raise ValueError(f"unsupported optimizer {self.optimizer!r}")


@dataclass(frozen=True)
class EpochMetrics:
    """Loss and dev score recorded after one epoch."""

    epoch: int
    train_loss: float
    dev_f1: float

    def as_dict(self) -> dict:
        return {"epoch": self.epoch, "train_loss": self.train_loss, "dev_f1": self.dev_f1}


@dataclass(frozen=True)
class TrainResult:
    """A trained model together with its per-epoch metric trace."""

    model: TdpRanker = field(compare=False)
    trace: tuple[EpochMetrics, ...] = ()
    selected_epoch: int = 0

    @property
    def selected_metrics(self) -> EpochMetrics:
        for metrics in self.trace:
            if metrics.epoch == self.selected_epoch:
                return metrics
        raise ValueError(f"epoch {self.selected_epoch} not present in the trace")


def build_model(
    encoder_config: EncoderConfig,
    window: WindowConfig,
    vocab: Vocabulary,
    *,
    seed: int | None = None,
) -> TdpRanker:
    """Construct a freshly initialized ranker, optionally seeding torch first."""
    if seed is not None:
        torch.manual_seed(seed)
    return TdpRanker(build_encoder(encoder_config, window, vocab))


def _dev_f1(
    model: TdpRanker,
    dev_records: list[tuple[Document, TemporalDependencyTree]],
    window: WindowConfig,
) -> float:
    if not dev_records:
        return 0.0
    docs = [doc for doc, _ in dev_records]
    predicted = [tree for tree, _ in parse_documents(model, docs, window)]
    gold = [tree for _, tree in dev_records]
    return evaluate(predicted, gold, docs).f1


def train(
    model: TdpRanker,
    train_records: list[tuple[Document, TemporalDependencyTree]],
    dev_records: list[tuple[Document, TemporalDependencyTree]],
    config: TrainConfig,
    window: WindowConfig,
) -> TrainResult:
    """Run shuffled mini-batch training and record dev F1 per epoch.

    The returned model carries final-epoch parameters unless
    ``config.select_best_dev`` is set, in which case the best-dev epoch's
    parameters are restored. An empty dev set scores 0.0 every epoch.
    """
    instances = []
    documents = {}
    for doc, tree in train_records:
        documents[doc.doc_id] = doc
        for instance in build_training_instances(doc, tree, window):
            instances.append((doc.doc_id, instance))
    if not instances:
        raise ValueError("no training instances (corpus has no mentions)")

    torch.manual_seed(config.seed)
    rng = random.Random(config.seed)
    parameters = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.Adam(parameters, lr=config.learning_rate)

    trace: list[EpochMetrics] = []
    best_state: dict | None = None
    best_f1 = -1.0
    best_epoch = 0

    for epoch in range(1, config.epochs + 1):
        model.train()
        rng.shuffle(instances)
        epoch_loss = 0.0
        for start in range(0, len(instances), config.batch_size):
            batch = instances[start : start + config.batch_size]
            caches: dict[str, dict] = {}
            losses = []
            for doc_id, instance in batch:
                cache = caches.setdefault(doc_id, {})
                losses.append(
                    model.instance_loss(
                        documents[doc_id],
                        instance.candidate_set,
                        instance.gold_parent,
                        instance.gold_label,
                        cache,
                    )
                )
            loss = torch.stack(losses).mean()
            loss_value = float(loss.detach())
            if not math.isfinite(loss_value):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, instances "
                    f"{start}..{start + len(batch)}"
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += loss_value * len(batch)

        dev_f1 = _dev_f1(model, dev_records, window)
        trace.append(EpochMetrics(epoch, epoch_loss / len(instances), dev_f1))
        if dev_f1 > best_f1:
            best_f1 = dev_f1
            best_epoch = epoch
            if config.select_best_dev:
                best_state = copy.deepcopy(model.state_dict())
        if config.stop_at_dev_f1 is not None and dev_f1 >= config.stop_at_dev_f1:
            break

    selected = trace[-1].epoch
    if config.select_best_dev and best_state is not None:
        model.load_state_dict(best_state)
        selected = best_epoch
    return TrainResult(model=model, trace=tuple(trace), selected_epoch=selected)


@dataclass(frozen=True)
class GridCell:
    """Dev F1 samples for one (learning rate, epochs) configuration."""

    learning_rate: float
    epochs: int
    dev_f1_runs: tuple[float, ...]

    @property
    def mean_dev_f1(self) -> float:
        return statistics.fmean(self.dev_f1_runs)

    @property
    def dev_f1_variance(self) -> float:
        return statistics.pvariance(self.dev_f1_runs)

    def as_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "dev_f1_runs": list(self.dev_f1_runs),
            "mean_dev_f1": self.mean_dev_f1,
            "dev_f1_variance": self.dev_f1_variance,
        }


@dataclass(frozen=True)
class GridResult:
    """All grid cells, with the winning configuration."""

    cells: tuple[GridCell, ...]

    @property
    def best(self) -> GridCell:
        return max(
            self.cells,
            key=lambda c: (c.mean_dev_f1, -c.learning_rate, -c.epochs),
        )

    def as_dict(self) -> dict:
        return {"cells": [c.as_dict() for c in self.cells], "best": self.best.as_dict()}


def grid_search(
    train_records: list[tuple[Document, TemporalDependencyTree]],
    dev_records: list[tuple[Document, TemporalDependencyTree]],
    encoder_config: EncoderConfig,
    base_config: TrainConfig,
    learning_rates: tuple[float, ...] = DEFAULT_LEARNING_RATES,
    epoch_grid: tuple[int, ...] = DEFAULT_EPOCH_GRID,
    window: WindowConfig = WindowConfig(),
    *,
    runs: int | None = None,
) -> GridResult:
    """Train runs x |grid| models and summarize dev F1 per cell.

    Ties on mean dev F1 prefer the lower learning rate, then fewer
    epochs. Run r of any cell uses seed base_config.seed + r for both
    model initialization and shuffling.
    """
    if not learning_rates or not epoch_grid:
        raise ValueError("grid must contain at least one learning rate and one epoch count")
    if runs is None:
        runs = base_config.runs
    vocab = Vocabulary.from_documents([doc for doc, _ in train_records])

    cells = []
    for learning_rate in learning_rates:
        for epochs in epoch_grid:
            scores = []
            for run in range(runs):
                seed = base_config.seed + run
                config = replace(
                    base_config,
                    learning_rate=learning_rate,
                    epochs=epochs,
                    seed=seed,
                    runs=1,
                )
                model = build_model(encoder_config, window, vocab, seed=seed)
                result = train(model, train_records, dev_records, config, window)
                scores.append(result.selected_metrics.dev_f1)
            cells.append(GridCell(learning_rate, epochs, tuple(scores)))
    return GridResult(tuple(cells))


def save_checkpoint(path, model: TdpRanker) -> None:
    """Write the model, its configuration, and its vocabulary to path."""
    encoder = model.encoder
    payload = {
        "format": CHECKPOINT_FORMAT,
        "encoder": encoder.config.to_dict(),
        "window": {"back": encoder.window.back, "forward": encoder.window.forward},
        "vocab": list(encoder.vocab.tokens),
        "state": model.state_dict(),
    }
    try:
        torch.save(payload, path)
    except (OSError, RuntimeError) as err:
        raise CheckpointError(f"cannot write checkpoint {path}: {err}") from None


def load_checkpoint(path) -> tuple[TdpRanker, EncoderConfig, WindowConfig]:
    """Rebuild a TdpRanker from a checkpoint written by save_checkpoint."""
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as err:
        raise CheckpointError(f"cannot load checkpoint {path}: {err}") from None
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(
            f"checkpoint {path} is not in the {CHECKPOINT_FORMAT!r} format"
        )
    try:
        encoder_config = EncoderConfig.from_dict(payload["encoder"])
        window = WindowConfig(**payload["window"])
        vocab = Vocabulary.from_ordered_tokens(payload["vocab"])
        encoder = build_encoder(
            encoder_config, window, vocab, load_static_vectors=False
        )
        model = TdpRanker(encoder)
        model.load_state_dict(payload["state"])
    except (KeyError, TypeError, ValueError, RuntimeError) as err:
        raise CheckpointError(f"checkpoint {path} is malformed: {err}") from None
    model.eval()
    return model, encoder_config, window
