"""Finite-difference verification of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ContractError

# Relative-error denominator floor.
_DENOM_FLOOR = 1e-12


@dataclass
class GradCheckReport:
    name: str
    max_rel_error: float
    tol: float
    passed: bool
    n_coords: int

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: max relative error {self.max_rel_error:.3e} (tol {self.tol:.1e}, {self.n_coords} coords)"


def finite_diff_check(
    op: Callable[..., Tensor],
    inputs: Sequence[np.ndarray],
    eps: float = 1e-5,
    tol: float = 1e-4,
    name: str = "op",
) -> GradCheckReport:
    """Compare analytic gradients of a scalar-valued op to central differences.

    Relative error per coordinate uses max(|analytic|, |numeric|, 1e-12) as
    the denominator; the report carries the max over all coordinates of all
    inputs. Never raises on mismatch: failures live in the report.
    """
    if not (1e-7 <= eps <= 1e-3):
        raise ContractError(f"eps must be in [1e-7, 1e-3], got {eps}")
    tensors = [Tensor(np.asarray(x, dtype=np.float64), requires_grad=True) for x in inputs]
    out = op(*tensors)
    if out.data.size != 1:
        raise ContractError(f"op must be scalar-valued, got output shape {out.shape}")
    ad.backward(out)
    analytic = [t.grad_or_zero().copy() for t in tensors]

    max_rel = 0.0
    n_coords = 0
    for i, t in enumerate(tensors):
        flat = t.data.reshape(-1)
        num = np.zeros_like(flat)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + eps
            f_plus = op(*[Tensor(u.data) for u in tensors]).item()
            flat[j] = orig - eps
            f_minus = op(*[Tensor(u.data) for u in tensors]).item()
            flat[j] = orig
            num[j] = (f_plus - f_minus) / (2.0 * eps)
        a = analytic[i].reshape(-1)
        denom = np.maximum(np.maximum(np.abs(a), np.abs(num)), _DENOM_FLOOR)
        rel = np.abs(a - num) / denom
        if rel.size:
            max_rel = max(max_rel, float(rel.max()))
        n_coords += flat.size
    return GradCheckReport(name, max_rel, tol, max_rel < tol, n_coords)


# -- standard battery ------------------------------------------------------


def _primitive_cases(rng: np.random.Generator):
    """(name, op, input factory) for every differentiable primitive."""
    u = lambda *s: rng.uniform(-2.0, 2.0, size=s)
    pos = lambda *s: rng.uniform(0.5, 2.0, size=s)

    return [
        ("add", lambda a, b: ad.tsum(a + b), lambda: [u(3, 4), u(3, 4)]),
        ("add_broadcast", lambda a, b: ad.tsum(a + b), lambda: [u(3, 4), u(4)]),
        ("mul", lambda a, b: ad.tsum(a * b), lambda: [u(3, 4), u(3, 4)]),
        ("div", lambda a, b: ad.tsum(a / b), lambda: [u(3, 4), pos(3, 4)]),
        ("matmul", lambda a, b: ad.tsum(a @ b), lambda: [u(3, 4), u(4, 2)]),
        ("matmul_batched", lambda a, b: ad.tsum(a @ b), lambda: [u(2, 3, 4), u(2, 4, 2)]),
        ("sum_axis", lambda a: ad.tsum(ad.tsum(a, axis=1) * ad.tsum(a, axis=0)[:1]), lambda: [u(3, 3)]),
        ("mean", lambda a: ad.tmean(a), lambda: [u(5, 2)]),
        ("log", lambda a: ad.tsum(ad.log(a)), lambda: [pos(6)]),
        ("exp", lambda a: ad.tsum(ad.exp(a)), lambda: [u(6)]),
        ("sqrt", lambda a: ad.tsum(ad.sqrt(a)), lambda: [pos(6)]),
        ("tanh", lambda a: ad.tsum(ad.tanh(a)), lambda: [u(6)]),
        # The linear term keeps the summed derivative away from gelu's zero
        # crossing (x ~ -0.75) without hiding any error in gelu's gradient.
        ("gelu", lambda a: ad.tsum(ad.gelu(a)) + 0.3 * ad.tsum(a), lambda: [u(6)]),
        (
            "clip_interior",
            lambda a: ad.tsum(ad.clip(a, -10.0, 10.0) * ad.clip(a, -10.0, 10.0)),
            lambda: [u(6)],
        ),
        ("softmax", lambda a: ad.tsum(ad.softmax(a, axis=-1)[..., :2]), lambda: [u(3, 5)]),
        (
            "layer_norm",
            lambda x, g, b: ad.tsum(ad.layer_norm(x, g, b) * ad.layer_norm(x, g, b)),
            lambda: [u(3, 8), pos(8), u(8)],
        ),
        ("reshape_transpose", lambda a: ad.tsum(ad.transpose(ad.reshape(a, (2, 6)), (1, 0))[:3]), lambda: [u(3, 4)]),
        ("take", lambda a: ad.tsum(a[1:, :2] * a[1:, :2]), lambda: [u(3, 4)]),
        (
            "embedding",
            lambda t: ad.tsum(ad.embedding(t, np.array([0, 2, 2, 1])) * np.arange(12.0).reshape(4, 3)),
            lambda: [u(5, 3)],
        ),
    ]


def _loss_cases(rng: np.random.Generator):
    from .losses import bce_loss, cosine_distance, rowwise_cosine_distance

    u = lambda *s: rng.uniform(-2.0, 2.0, size=s)

    def nonzero_vec(n):
        v = u(n)
        while np.linalg.norm(v) < 0.3:
            v = u(n)
        return v

    y = (rng.uniform(size=4) > 0.5).astype(np.float64)
    return [
        ("cosine_distance", lambda a, b: cosine_distance(a, b), lambda: [nonzero_vec(6), nonzero_vec(6)]),
        (
            "rowwise_cosine_distance",
            lambda a, b: ad.tmean(rowwise_cosine_distance(a, b)),
            lambda: [np.stack([nonzero_vec(5) for _ in range(3)]), np.stack([nonzero_vec(5) for _ in range(3)])],
        ),
        (
            "bce_loss",
            lambda p: bce_loss(ad.clip(p, 0.05, 0.95), y),
            lambda: [rng.uniform(0.1, 0.9, size=4)],
        ),
        (
            "softmax_bce",
            lambda z: bce_loss(ad.softmax(z, axis=-1)[:, 1], y),
            lambda: [u(4, 2)],
        ),
    ]


def run_battery(
    seed: int = 0,
    instances: int = 20,
    eps: float = 1e-5,
    tol: float = 1e-4,
    include_pipeline: bool = True,
) -> list[GradCheckReport]:
    """Check every primitive (and optionally the full model pipeline) on
    `instances` random instances each; one aggregated report per op."""
    rng = np.random.default_rng(seed)
    reports = []
    for name, op, make in _primitive_cases(rng) + _loss_cases(rng):
        worst = None
        coords = 0
        for _ in range(instances):
            r = finite_diff_check(op, make(), eps=eps, tol=tol, name=name)
            coords += r.n_coords
            if worst is None or r.max_rel_error > worst:
                worst = r.max_rel_error
        reports.append(GradCheckReport(name, worst, tol, worst < tol, coords))
    if include_pipeline:
        reports.append(pipeline_check(seed=seed, instances=instances, eps=eps, tol=tol))
    return reports


def pipeline_check(
    seed: int = 0,
    instances: int = 20,
    eps: float = 1e-5,
    tol: float = 1e-4,
) -> GradCheckReport:
    """Finite-difference check of the full encode -> joint loss pipeline on a
    2-layer, width-8 encoder, differentiating through every parameter.

    Instances draw weights at a scale where attention is clearly active;
    near-degenerate attention would push some gradient coordinates below the
    central-difference noise floor and measure noise instead of correctness.
    """
    from .encoder import EncoderConfig, EncoderParams, encode_batch
    from .trainer import LossWeights, alignment_loss, joint_classification_loss, total_loss

    cfg = EncoderConfig(
        num_layers=2, hidden_dim=8, num_heads=2, ffn_dim=8, max_positions=6, freeze_depth=0
    )
    rng = np.random.default_rng(seed + 1)
    vocab_size = 7
    B = 2
    worst = 0.0
    coords = 0
    for _ in range(instances):
        base = EncoderParams.init(
            cfg, vocab_size, np.random.default_rng(rng.integers(2**32)), init_scale=0.3
        )
        names = list(base.params)
        seq_len = int(rng.integers(3, 6))
        ids = np.concatenate(
            [
                np.full((3 * B, 1), 1),  # CLS
                rng.integers(3, vocab_size, size=(3 * B, seq_len - 1)),
            ],
            axis=1,
        )
        mask = np.ones_like(ids, dtype=np.float64)
        mask[0, -1] = 0.0  # one padded row exercises masking
        y = (rng.uniform(size=B) > 0.5).astype(np.float64)
        teacher_h = rng.normal(size=(B, cfg.hidden_dim))
        w = LossWeights(alpha=0.7, beta1=1.0, beta2=0.5, beta3=1.5)

        def full_loss(*tensors):
            p = EncoderParams(cfg, vocab_size, dict(zip(names, tensors)))
            out = encode_batch(p, ids, mask)
            h_src, h_tr, h_tl = out.h[0:B], out.h[B : 2 * B], out.h[2 * B :]
            p_src, p_tr, p_tl = out.p_pos[0:B], out.p_pos[B : 2 * B], out.p_pos[2 * B :]
            _, _, _, l_u = alignment_loss(Tensor(teacher_h), h_src, h_tr, h_tl, w)
            j = joint_classification_loss(p_src, p_tr, p_tl, y)
            return total_loss(j, l_u, w.alpha)

        r = finite_diff_check(
            full_loss, [base.params[n].data for n in names], eps=eps, tol=tol, name="pipeline"
        )
        coords += r.n_coords
        worst = max(worst, r.max_rel_error)
    return GradCheckReport("encode_joint_pipeline", worst, tol, worst < tol, coords)
