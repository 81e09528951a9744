"""Teacher-student joint training and the fine-tuning baselines.

Mode overview:
  en / tr / tl   fine-tune on one variant with plain BCE
  en+tr+tl       fine-tune on all three variants (summed BCE)
  joint          warm-up + all-variant BCE, alignment weight forced to 0
  joint_ts       warm-up, frozen teacher, BCE + alpha * alignment loss

`joint` is literally `joint_ts` with alpha = 0 on the same code path, so the
two produce identical trajectories under the same seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import autodiff as ad
from .augment import ParallelTriplet
from .autodiff import Tensor
from .encoder import (
    EncoderConfig,
    EncoderParams,
    TokenizerSpec,
    encode_batch,
    encode_texts,
    make_teacher,
    pad_batch,
    set_freeze_depth,
    tokenize,
)
from .errors import ConfigError, ContractError, ShapeError
from .losses import bce_loss, rowwise_cosine_distance
from .metrics import evaluate_variant
from .optim import Adam

MODES = ("en", "tr", "tl", "en+tr+tl", "joint", "joint_ts")
_VARIANT_OF_MODE = {"en": "src", "tr": "tr", "tl": "tl"}


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 0.3   # paper-tuned weight for the alignment term
    beta1: float = 1.0
    beta2: float = 1.0
    beta3: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ContractError(f"{f.name} must be >= 0")


@dataclass(frozen=True)
class TrainConfig:
    mode: str = "joint_ts"
    loss_weights: LossWeights = field(default_factory=LossWeights)
    freeze_depth: int = 3
    max_epochs: int = 40
    patience: int = 10
    batch_size: int = 32
    learning_rate: float = 5e-5  # paper default; desk-scale configs override to 1e-3
    seed: int = 0
    teacher_warmup_epochs: int = 3
    val_variant: str = "tl"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ContractError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.patience > self.max_epochs:
            raise ContractError("patience must not exceed max_epochs")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ContractError("batch_size and max_epochs must be positive")
        if self.val_variant not in ("src", "tr", "tl"):
            raise ContractError(f"unknown val_variant {self.val_variant!r}")

    @property
    def effective_alpha(self) -> float:
        """The Joint ablation is joint_ts with the alignment weight at 0."""
        return 0.0 if self.mode == "joint" else self.loss_weights.alpha


@dataclass
class BatchLosses:
    l_ts: float
    l_tr: float
    l_tl: float
    l_u: float
    j_joint: float
    total: float


@dataclass
class EpochStats:
    epoch: int
    l_ts: float
    l_tr: float
    l_tl: float
    l_u: float
    j_joint: float
    total: float
    val_accuracy: float
    val_weighted_f1: float

    def to_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "l_ts": self.l_ts,
            "l_tr": self.l_tr,
            "l_tl": self.l_tl,
            "l_u": self.l_u,
            "j_joint": self.j_joint,
            "total": self.total,
            "val_accuracy": self.val_accuracy,
            "val_weighted_f1": self.val_weighted_f1,
        }


@dataclass
class TrainResult:
    best_params: EncoderParams
    tokenizer: TokenizerSpec
    teacher: EncoderParams | None
    history: list[EpochStats]
    batch_losses: list[BatchLosses]
    best_epoch: int
    stopped_epoch: int
    config: TrainConfig


# -- loss composition (Eq. 1-4) ------------------------------------------------


def alignment_loss(
    teacher_h_src: Tensor,
    student_h_src: Tensor,
    student_h_tr: Tensor,
    student_h_tl: Tensor,
    w: LossWeights,
) -> tuple[Tensor, Tensor, Tensor, Tensor]:
    """Mean cosine distances of the three student variants to the teacher's
    source representation, and their weighted sum. The teacher batch is a
    constant: no gradient ever reaches it."""
    t = teacher_h_src.detach()
    batches = (student_h_src, student_h_tr, student_h_tl)
    if any(b.shape != t.shape for b in batches):
        raise ShapeError(
            f"batch shape mismatch: teacher {t.shape} vs students "
            f"{[b.shape for b in batches]}"
        )
    l_ts = ad.tmean(rowwise_cosine_distance(t, student_h_src))
    l_tr = ad.tmean(rowwise_cosine_distance(t, student_h_tr))
    l_tl = ad.tmean(rowwise_cosine_distance(t, student_h_tl))
    l_u = w.beta1 * l_ts + w.beta2 * l_tr + w.beta3 * l_tl
    return l_ts, l_tr, l_tl, l_u


def joint_classification_loss(p_src: Tensor, p_tr: Tensor, p_tl: Tensor, y) -> Tensor:
    """Sum of the three per-variant BCE terms."""
    y = np.asarray(y, dtype=np.float64)
    for p in (p_src, p_tr, p_tl):
        if p.shape != y.shape:
            raise ShapeError(f"probability batch {p.shape} does not match labels {y.shape}")
    return bce_loss(p_src, y) + bce_loss(p_tr, y) + bce_loss(p_tl, y)


def total_loss(j_joint: Tensor, l_u: Tensor, alpha: float) -> Tensor:
    if alpha < 0:
        raise ContractError("alpha must be >= 0")
    return j_joint + alpha * l_u


# -- single optimization step ---------------------------------------------------


def _encode_concat(student: EncoderParams, spec: TokenizerSpec, texts: list[str]):
    ids, mask = pad_batch([tokenize(t, spec) for t in texts])
    return encode_batch(student, ids, mask)


def train_step(
    batch: list[ParallelTriplet],
    teacher: EncoderParams | None,
    student: EncoderParams,
    optimizer: Adam,
    cfg: TrainConfig,
    spec: TokenizerSpec,
    teacher_h: np.ndarray | None = None,
) -> BatchLosses:
    """Forward the batch, backprop into trainable student weights, Adam step.

    `teacher_h` may carry precomputed teacher CLS vectors for the batch;
    the teacher is frozen, so caching them is exact.
    """
    y = np.array([t.label for t in batch], dtype=np.float64)
    B = len(batch)
    if cfg.mode in ("joint", "joint_ts", "en+tr+tl"):
        texts = [t.src for t in batch] + [t.tr for t in batch] + [t.tl for t in batch]
        out = _encode_concat(student, spec, texts)
        h_src, h_tr, h_tl = out.h[0:B], out.h[B : 2 * B], out.h[2 * B : 3 * B]
        p_src, p_tr, p_tl = out.p_pos[0:B], out.p_pos[B : 2 * B], out.p_pos[2 * B : 3 * B]
        j = joint_classification_loss(p_src, p_tr, p_tl, y)
        if cfg.mode in ("joint", "joint_ts"):
            if teacher is None:
                raise ContractError(f"mode {cfg.mode!r} requires a teacher")
            if teacher_h is None:
                teacher_h = encode_texts(teacher, spec, [t.src for t in batch])
            l_ts, l_tr, l_tl, l_u = alignment_loss(
                Tensor(teacher_h), h_src, h_tr, h_tl, cfg.loss_weights
            )
            loss = total_loss(j, l_u, cfg.effective_alpha)
            losses = BatchLosses(
                l_ts.item(), l_tr.item(), l_tl.item(), l_u.item(), j.item(), loss.item()
            )
        else:
            loss = j
            losses = BatchLosses(0.0, 0.0, 0.0, 0.0, j.item(), j.item())
    else:
        variant = _VARIANT_OF_MODE[cfg.mode]
        out = _encode_concat(student, spec, [t.variant(variant) for t in batch])
        loss = bce_loss(out.p_pos, y)
        losses = BatchLosses(0.0, 0.0, 0.0, 0.0, loss.item(), loss.item())
    optimizer.zero_grad()
    ad.backward(loss)
    optimizer.step()
    return losses


# -- full training loop ----------------------------------------------------------


def train(
    train_triplets: list[ParallelTriplet],
    val_triplets: list[ParallelTriplet],
    cfg: TrainConfig,
    encoder_config: EncoderConfig | None = None,
    tokenizer: TokenizerSpec | None = None,
    val_scorer=None,
) -> TrainResult:
    """Run warm-up (teacher modes) then train with early stopping.

    Model selection: best validation weighted F1, accuracy as tiebreaker,
    evaluated on `cfg.val_variant`. `val_scorer(student, epoch) -> (f1, acc)`
    may replace the real validation pass (used by tests).
    Deterministic given cfg.seed: parameter init uses seed, shuffling seed+1.
    """
    if not train_triplets or not val_triplets:
        raise ContractError("train requires non-empty train and validation sets")
    enc_cfg = encoder_config or EncoderConfig()
    if tokenizer is None:
        texts = [v for t in train_triplets + val_triplets for v in (t.src, t.tr, t.tl)]
        tokenizer = TokenizerSpec.from_texts(texts, max_sequence_length=enc_cfg.max_positions)

    student = EncoderParams.init(enc_cfg, tokenizer.vocab_size, np.random.default_rng(cfg.seed))
    shuffle_rng = np.random.default_rng(cfg.seed + 1)
    n = len(train_triplets)

    teacher = None
    teacher_h_all = None
    if cfg.mode in ("joint", "joint_ts"):
        # Warm-up substitutes for the pre-trained anchor: source-only BCE with
        # everything trainable, then freeze the copy as the teacher.
        warm_opt = Adam(student.trainable(), lr=cfg.learning_rate)
        warm_cfg = replace(cfg, mode="en")
        for _ in range(cfg.teacher_warmup_epochs):
            order = shuffle_rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                batch = [train_triplets[i] for i in order[start : start + cfg.batch_size]]
                train_step(batch, None, student, warm_opt, warm_cfg, tokenizer)
        teacher = make_teacher(student)
        teacher_h_all = encode_texts(teacher, tokenizer, [t.src for t in train_triplets])

    # Freezing applies after warm-up: warm-up stands in for pre-training.
    set_freeze_depth(student, cfg.freeze_depth)
    optimizer = Adam(student.trainable(), lr=cfg.learning_rate)

    history: list[EpochStats] = []
    batch_losses: list[BatchLosses] = []
    best_f1, best_acc = -1.0, -1.0
    best_params = student.clone()
    best_epoch = 0
    stale = 0
    stopped_epoch = 0
    for epoch in range(1, cfg.max_epochs + 1):
        order = shuffle_rng.permutation(n)
        epoch_losses: list[BatchLosses] = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            batch = [train_triplets[i] for i in idx]
            th = teacher_h_all[idx] if teacher_h_all is not None else None
            bl = train_step(batch, teacher, student, optimizer, cfg, tokenizer, teacher_h=th)
            epoch_losses.append(bl)
        batch_losses.extend(epoch_losses)

        if val_scorer is not None:
            val_f1, val_acc = val_scorer(student, epoch)
        else:
            report = evaluate_variant(student, tokenizer, val_triplets, cfg.val_variant)
            val_f1, val_acc = report.weighted_f1, report.accuracy

        k = len(epoch_losses)
        history.append(
            EpochStats(
                epoch=epoch,
                l_ts=sum(b.l_ts for b in epoch_losses) / k,
                l_tr=sum(b.l_tr for b in epoch_losses) / k,
                l_tl=sum(b.l_tl for b in epoch_losses) / k,
                l_u=sum(b.l_u for b in epoch_losses) / k,
                j_joint=sum(b.j_joint for b in epoch_losses) / k,
                total=sum(b.total for b in epoch_losses) / k,
                val_accuracy=val_acc,
                val_weighted_f1=val_f1,
            )
        )
        stopped_epoch = epoch
        if val_f1 > best_f1 or (val_f1 == best_f1 and val_acc > best_acc):
            best_f1, best_acc = val_f1, val_acc
            best_params = student.clone()
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    return TrainResult(
        best_params=best_params,
        tokenizer=tokenizer,
        teacher=teacher,
        history=history,
        batch_losses=batch_losses,
        best_epoch=best_epoch,
        stopped_epoch=stopped_epoch,
        config=cfg,
    )


def write_history(path, history: list[EpochStats]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for h in history:
            f.write(json.dumps(h.to_dict()) + "\n")


# -- flat key = value config files ------------------------------------------------

_INT_KEYS = {"freeze_depth", "max_epochs", "patience", "batch_size", "seed", "teacher_warmup_epochs"}
_FLOAT_KEYS = {"alpha", "beta1", "beta2", "beta3", "learning_rate"}
_STR_KEYS = {"mode", "val_variant"}


def parse_config(path) -> TrainConfig:
    """Parse `key = value` lines into a TrainConfig; unknown keys are errors."""
    values: dict[str, object] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: line {line_no}: expected key = value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            try:
                if key in _INT_KEYS:
                    values[key] = int(value)
                elif key in _FLOAT_KEYS:
                    values[key] = float(value)
                elif key in _STR_KEYS:
                    values[key] = value
                else:
                    raise ConfigError(f"{path}: line {line_no}: unknown key {key!r}")
            except ValueError:
                raise ConfigError(
                    f"{path}: line {line_no}: bad value {value!r} for {key!r}"
                ) from None
    weights = LossWeights(
        alpha=values.pop("alpha", LossWeights.alpha),
        beta1=values.pop("beta1", LossWeights.beta1),
        beta2=values.pop("beta2", LossWeights.beta2),
        beta3=values.pop("beta3", LossWeights.beta3),
    )
    try:
        return TrainConfig(loss_weights=weights, **values)
    except (TypeError, ContractError) as e:
        raise ConfigError(f"{path}: {e}") from None
