"""End-to-end training, metric computation, and the bench/ablate harnesses.

Training is full-batch and transductive: one graph, loss on the train
mask only, Adam with decoupled weight decay, early stopping on
validation F1 with the best-validation checkpoint restored at the end.
Everything is deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .autodiff import Tape
from .errors import ConfigError, TrainingError
from .graphdata import Graph, LabelSet, Split
from .models import (
    ModelConfig,
    ParamSet,
    forward,
    init_params,
    late_fusion_losses,
    predict,
)

BENCH_VARIANTS = ("gcn_only", "gat_only", "text_only", "late_fusion", "full")
ABLATION_VARIANTS = ("full", "no_text", "no_graph")


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    weight_decay: float = 5e-4
    max_epochs: int = 200
    patience: int = 20
    seed: int = 0
    threshold: float = 0.5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate}")
        if self.patience > self.max_epochs:
            raise ConfigError(
                f"patience {self.patience} exceeds max epochs {self.max_epochs}"
            )
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"threshold must be in (0,1), got {self.threshold}")


@dataclass
class SplitMetrics:
    precision: float
    recall: float
    f1: float
    accuracy: float
    positives: int

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "positives": self.positives,
        }


@dataclass
class History:
    loss: list[float] = field(default_factory=list)
    val_f1: list[float] = field(default_factory=list)
    train_f1: list[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"loss": self.loss, "val_f1": self.val_f1, "train_f1": self.train_f1}


@dataclass
class MetricsReport:
    variant: str
    train: SplitMetrics
    val: SplitMetrics
    test: SplitMetrics
    history: History
    best_epoch: int
    epochs_run: int

    def as_dict(self) -> dict:
        return {
            "variant": self.variant,
            "train": self.train.as_dict(),
            "val": self.val.as_dict(),
            "test": self.test.as_dict(),
            "best_epoch": self.best_epoch,
            "epochs_run": self.epochs_run,
            "history": self.history.as_dict(),
        }


def compute_metrics(
    probs: np.ndarray, labels: np.ndarray, node_set: np.ndarray, threshold: float
) -> SplitMetrics:
    """Confusion counts over node_set; zero denominators yield zero."""
    idx = np.asarray(node_set, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("compute_metrics: empty node set")
    y = labels[idx]
    pred = (probs[idx] >= threshold).astype(np.int64)
    tp = int(((pred == 1) & (y == 1)).sum())
    fp = int(((pred == 1) & (y == 0)).sum())
    fn = int(((pred == 0) & (y == 1)).sum())
    tn = int(((pred == 0) & (y == 0)).sum())
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    accuracy = (tp + tn) / idx.size
    return SplitMetrics(precision, recall, f1, accuracy, int((y == 1).sum()))


def evaluate(
    params: ParamSet,
    variant: str,
    graph: Graph,
    h_text: Optional[np.ndarray],
    labels: LabelSet,
    node_set: np.ndarray,
    threshold: float = 0.5,
) -> SplitMetrics:
    pred = predict(variant, graph, h_text, params, threshold)
    return compute_metrics(pred.probabilities, labels.values, node_set, threshold)


class AdamState:
    """First/second moment buffers plus the shared step counter."""

    def __init__(self, params: ParamSet):
        self.step = 0
        self.m = {name: np.zeros_like(t.data) for name, t in params.items()}
        self.v = {name: np.zeros_like(t.data) for name, t in params.items()}


def adam_step(params: ParamSet, state: AdamState, config: TrainConfig) -> None:
    """One Adam update with bias correction and decoupled weight decay.

    Weight decay shrinks parameters before the Adam delta. Parameter
    arrays are rebound, never mutated, so tape intermediates stay valid.
    """
    state.step += 1
    t = state.step
    lr, wd = config.learning_rate, config.weight_decay
    b1, b2, eps = config.beta1, config.beta2, config.eps
    for name, p in params.items():
        g = p.grad
        if g is None:
            raise TrainingError(f"adam_step: no gradient for {name}")
        if not np.isfinite(g).all():
            raise TrainingError(f"adam_step: non-finite gradient in {name}")
        data = p.data
        if wd:
            data = data - lr * wd * data
        m = state.m[name] = b1 * state.m[name] + (1 - b1) * g
        v = state.v[name] = b2 * state.v[name] + (1 - b2) * g * g
        m_hat = m / (1 - b1 ** t)
        v_hat = v / (1 - b2 ** t)
        p.data = data - lr * m_hat / (np.sqrt(v_hat) + eps)


def _check_trainable(labels: LabelSet, split: Split) -> None:
    y = labels.values[split.train]
    if (y == 1).sum() == 0 or (y == 0).sum() == 0:
        raise TrainingError(
            "training set must contain both classes "
            f"(positives={int((y == 1).sum())}, negatives={int((y == 0).sum())})"
        )


def train(
    variant: str,
    graph: Graph,
    h_text: Optional[np.ndarray],
    labels: LabelSet,
    split: Split,
    config: TrainConfig,
    model_config: Optional[ModelConfig] = None,
) -> tuple[ParamSet, MetricsReport]:
    """Full-batch training with early stopping on validation F1.

    The per-epoch loss is measured at the epoch's starting parameters;
    validation/train F1 are measured after the update. The returned
    parameters are the checkpoint of the best (earliest-at-tie)
    validation F1.
    """
    _check_trainable(labels, split)
    model_config = model_config or ModelConfig()
    d_text = h_text.shape[1] if h_text is not None else 0
    params = init_params(variant, graph.num_nodes, d_text, model_config, config.seed)
    state = AdamState(params)
    targets = np.where(labels.values == 1, 1.0, 0.0)
    history = History()
    best_f1 = -1.0
    best_epoch = -1
    best_snap = params.snapshot()
    epochs_run = 0
    for epoch in range(config.max_epochs):
        tape = Tape()
        if variant == "late_fusion":
            _, loss = late_fusion_losses(tape, graph, h_text, params, targets, split.train)
        else:
            probs = forward(tape, variant, graph, h_text, params)
            loss = tape.bce_loss(probs, targets, split.train)
        tape.backward(loss, params=params.values())
        adam_step(params, state, config)
        eval_probs = forward(Tape(), variant, graph, h_text, params).data
        val = compute_metrics(eval_probs, labels.values, split.val, config.threshold)
        tr = compute_metrics(eval_probs, labels.values, split.train, config.threshold)
        history.loss.append(float(loss.data))
        history.val_f1.append(val.f1)
        history.train_f1.append(tr.f1)
        epochs_run = epoch + 1
        if val.f1 > best_f1:
            best_f1 = val.f1
            best_epoch = epoch
            best_snap = params.snapshot()
        elif epoch - best_epoch >= config.patience:
            break
    params.restore(best_snap)
    final_probs = forward(Tape(), variant, graph, h_text, params).data
    report = MetricsReport(
        variant=variant,
        train=compute_metrics(final_probs, labels.values, split.train, config.threshold),
        val=compute_metrics(final_probs, labels.values, split.val, config.threshold),
        test=compute_metrics(final_probs, labels.values, split.test, config.threshold),
        history=history,
        best_epoch=best_epoch,
        epochs_run=epochs_run,
    )
    return params, report


def run_bench(
    graph: Graph,
    h_text: np.ndarray,
    labels: LabelSet,
    split: Split,
    config: TrainConfig,
    model_config: Optional[ModelConfig] = None,
    variants: tuple[str, ...] = BENCH_VARIANTS,
) -> dict[str, MetricsReport]:
    """Train every variant with the same seed and split."""
    reports = {}
    for variant in variants:
        _, report = train(variant, graph, h_text, labels, split, config, model_config)
        reports[variant] = report
    return reports


def run_ablation(
    graph: Graph,
    h_text: np.ndarray,
    labels: LabelSet,
    split: Split,
    config: TrainConfig,
    model_config: Optional[ModelConfig] = None,
) -> dict[str, MetricsReport]:
    return run_bench(
        graph, h_text, labels, split, config, model_config, variants=ABLATION_VARIANTS
    )


def format_table(reports: dict[str, MetricsReport], split: str = "test") -> str:
    """Aligned text table of per-variant metrics on one split."""
    headers = ("model", "precision", "recall", "f1", "accuracy")
    rows = []
    for name, report in reports.items():
        m: SplitMetrics = getattr(report, split)
        rows.append(
            (name, f"{m.precision:.4f}", f"{m.recall:.4f}", f"{m.f1:.4f}", f"{m.accuracy:.4f}")
        )
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    lines.extend("  ".join(r[i].ljust(widths[i]) for i in range(len(headers))) for r in rows)
    return "\n".join(lines)
