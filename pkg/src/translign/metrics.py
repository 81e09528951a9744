"""Classification metrics and no-gradient prediction helpers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .augment import ParallelTriplet
from .encoder import EncoderParams, Tensor, TokenizerSpec, encode_batch, pad_batch, tokenize
from .errors import ShapeError


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class MetricsReport:
    accuracy: float
    weighted_f1: float
    per_class: dict[int, ClassMetrics] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "weighted_f1": self.weighted_f1,
            "per_class": {
                str(c): {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for c, m in self.per_class.items()
            },
        }


def _check_pair(preds, labels) -> tuple[np.ndarray, np.ndarray]:
    preds = np.asarray(preds, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if preds.shape != labels.shape or preds.ndim != 1:
        raise ShapeError(f"prediction/label shape mismatch: {preds.shape} vs {labels.shape}")
    if preds.size == 0:
        raise ShapeError("metrics require at least one prediction")
    return preds, labels


def accuracy(preds, labels) -> float:
    preds, labels = _check_pair(preds, labels)
    return float(np.mean(preds == labels))


def weighted_f1(preds, labels) -> float:
    """Support-weighted mean of per-class F1; empty denominators count as 0."""
    return classification_report(preds, labels).weighted_f1


def classification_report(preds, labels) -> MetricsReport:
    preds, labels = _check_pair(preds, labels)
    n = labels.size
    per_class: dict[int, ClassMetrics] = {}
    wf1 = 0.0
    for c in (0, 1):
        tp = int(np.sum((preds == c) & (labels == c)))
        fp = int(np.sum((preds == c) & (labels != c)))
        fn = int(np.sum((preds != c) & (labels == c)))
        support = tp + fn
        prec = tp / (tp + fp) if tp + fp > 0 else 0.0
        rec = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0
        per_class[c] = ClassMetrics(prec, rec, f1, support)
        wf1 += (support / n) * f1
    return MetricsReport(accuracy=float(np.mean(preds == labels)), weighted_f1=wf1, per_class=per_class)


# -- prediction ---------------------------------------------------------------


def predict_labels(
    params: EncoderParams,
    spec: TokenizerSpec,
    texts: list[str],
    batch_size: int = 128,
) -> np.ndarray:
    """Argmax class per text, evaluated without building gradient graphs."""
    frozen = EncoderParams(
        params.config, params.vocab_size, {k: Tensor(t.data) for k, t in params.params.items()}
    )
    preds = []
    for start in range(0, len(texts), batch_size):
        chunk = texts[start : start + batch_size]
        ids, mask = pad_batch([tokenize(t, spec) for t in chunk])
        out = encode_batch(frozen, ids, mask)
        preds.append(np.argmax(out.logits.data, axis=1))
    return np.concatenate(preds)


def evaluate_variant(
    params: EncoderParams,
    spec: TokenizerSpec,
    triplets: list[ParallelTriplet],
    variant: str = "tl",
) -> MetricsReport:
    texts = [t.variant(variant) for t in triplets]
    labels = np.array([t.label for t in triplets], dtype=np.int64)
    return classification_report(predict_labels(params, spec, texts), labels)
