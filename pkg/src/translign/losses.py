"""Cosine-distance and binary cross-entropy losses, differentiable end to end."""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import DomainError, ShapeError

# BCE probability clamp; avoids infinite loss at saturated predictions.
PROB_EPS = 1e-7


def cosine_distance(a: Tensor, b: Tensor) -> Tensor:
    """1 - (a.b)/(|a||b|) for two vectors; in [0, 2]."""
    a, b = ad._ensure(a), ad._ensure(b)
    if a.data.ndim != 1 or b.data.ndim != 1:
        raise ShapeError("cosine_distance expects 1-d vectors")
    if a.shape != b.shape:
        raise ShapeError(f"vector length mismatch: {a.shape} vs {b.shape}")
    if np.linalg.norm(a.data) == 0.0 or np.linalg.norm(b.data) == 0.0:
        raise DomainError("cosine_distance is undefined for zero-norm vectors")
    dot = ad.tsum(a * b)
    na = ad.sqrt(ad.tsum(a * a))
    nb = ad.sqrt(ad.tsum(b * b))
    return 1.0 - dot / (na * nb)


def rowwise_cosine_distance(a: Tensor, b: Tensor) -> Tensor:
    """Per-row cosine distance for (N, d) batches -> (N,)."""
    a, b = ad._ensure(a), ad._ensure(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeError("rowwise_cosine_distance expects (N, d) batches")
    if a.shape != b.shape:
        raise ShapeError(f"batch shape mismatch: {a.shape} vs {b.shape}")
    if np.any(np.linalg.norm(a.data, axis=1) == 0.0) or np.any(
        np.linalg.norm(b.data, axis=1) == 0.0
    ):
        raise DomainError("cosine distance is undefined for zero-norm rows")
    dot = ad.tsum(a * b, axis=1)
    na = ad.sqrt(ad.tsum(a * a, axis=1))
    nb = ad.sqrt(ad.tsum(b * b, axis=1))
    return 1.0 - dot / (na * nb)


def bce_loss(p: Tensor, y) -> Tensor:
    """-(1/N) sum[y log p + (1-y) log(1-p)], with p clamped to [1e-7, 1-1e-7]."""
    p = ad._ensure(p)
    y = np.asarray(y, dtype=np.float64)
    if p.data.ndim != 1 or y.ndim != 1:
        raise ShapeError("bce_loss expects 1-d probability and label vectors")
    if p.shape != y.shape:
        raise ShapeError(f"length mismatch: {p.shape} probabilities vs {y.shape} labels")
    if p.data.size == 0:
        raise ShapeError("bce_loss requires at least one element")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise DomainError("labels must be 0 or 1")
    pc = ad.clip(p, PROB_EPS, 1.0 - PROB_EPS)
    n = y.size
    terms = y * ad.log(pc) + (1.0 - y) * ad.log(1.0 - pc)
    return ad.tsum(terms) * (-1.0 / n)
