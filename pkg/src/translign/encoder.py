"""Character-level tokenizer and a small transformer encoder.

The encoder is a pre-LN transformer returning the CLS position of the final
hidden state as the sentence representation, plus a two-logit classification
head. Per-parameter freezing is expressed through `requires_grad`: a frozen
tensor never receives gradients and is never handed to the optimizer, so
bit-identity across training steps holds by construction.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ContractError, LoadError, ShapeError

PAD_ID = 0
CLS_ID = 1
UNK_ID = 2
_N_SPECIALS = 3

CHECKPOINT_FORMAT = "translign-checkpoint-v1"


@dataclass(frozen=True)
class TokenizerSpec:
    """Char-to-id vocabulary with CLS/PAD/UNK specials."""

    vocab: dict[str, int]
    max_sequence_length: int = 64
    pad_id: int = PAD_ID
    cls_id: int = CLS_ID
    unk_id: int = UNK_ID

    def __post_init__(self):
        ids = {self.pad_id, self.cls_id, self.unk_id}
        if len(ids) != 3 or max(ids) >= self.vocab_size:
            raise ContractError("special ids must be distinct and below vocab size")
        if self.max_sequence_length < 1:
            raise ContractError("max_sequence_length must be positive")

    @property
    def vocab_size(self) -> int:
        return _N_SPECIALS + len(self.vocab)

    @classmethod
    def from_texts(cls, texts, max_sequence_length: int = 64) -> "TokenizerSpec":
        chars = sorted({ch for t in texts for ch in t})
        vocab = {ch: _N_SPECIALS + i for i, ch in enumerate(chars)}
        return cls(vocab=vocab, max_sequence_length=max_sequence_length)


def tokenize(text: str, spec: TokenizerSpec) -> list[int]:
    """[CLS] + per-codepoint ids (UNK for unmapped), truncated to the max length."""
    ids = [spec.cls_id]
    for ch in text:
        if len(ids) >= spec.max_sequence_length:
            break
        ids.append(spec.vocab.get(ch, spec.unk_id))
    return ids


def pad_batch(seqs: list[list[int]], pad_id: int = PAD_ID) -> tuple[np.ndarray, np.ndarray]:
    """Right-pad to the batch max length; returns int ids (B, T) and float mask (B, T)."""
    width = max(len(s) for s in seqs)
    ids = np.full((len(seqs), width), pad_id, dtype=np.int64)
    mask = np.zeros((len(seqs), width), dtype=np.float64)
    for i, s in enumerate(seqs):
        ids[i, : len(s)] = s
        mask[i, : len(s)] = 1.0
    return ids, mask


@dataclass(frozen=True)
class EncoderConfig:
    num_layers: int = 4
    hidden_dim: int = 64
    num_heads: int = 4
    ffn_dim: int = 128
    max_positions: int = 64
    freeze_depth: int = 3  # paper-analogue default: round(0.75 * num_layers)

    def __post_init__(self):
        if self.hidden_dim % self.num_heads != 0:
            raise ContractError("hidden_dim must be divisible by num_heads")
        if not 0 <= self.freeze_depth <= self.num_layers:
            raise ContractError("freeze_depth must lie in [0, num_layers]")


def _layer_param_names(i: int) -> list[str]:
    base = f"layer{i}."
    # No key bias: softmax is invariant to a constant shift of the scores, so
    # a key bias would be a parameter with an identically-zero gradient.
    return [
        base + n
        for n in (
            "ln1.gain", "ln1.bias",
            "attn.wq", "attn.bq", "attn.wk", "attn.wv", "attn.bv",
            "attn.wo", "attn.bo",
            "ln2.gain", "ln2.bias",
            "ffn.w1", "ffn.b1", "ffn.w2", "ffn.b2",
        )
    ]


class EncoderParams:
    """All weights of tokenizer-downstream model, keyed by name."""

    def __init__(self, config: EncoderConfig, vocab_size: int, params: dict[str, Tensor]):
        self.config = config
        self.vocab_size = vocab_size
        self.params = params

    @classmethod
    def init(
        cls,
        config: EncoderConfig,
        vocab_size: int,
        rng: np.random.Generator,
        init_scale: float = 0.02,
    ) -> "EncoderParams":
        d, f = config.hidden_dim, config.ffn_dim
        p: dict[str, Tensor] = {}

        def w(name, shape):
            p[name] = ad.param(rng.normal(0.0, init_scale, size=shape))

        def zeros(name, shape):
            p[name] = ad.param(np.zeros(shape))

        def ones(name, shape):
            p[name] = ad.param(np.ones(shape))

        w("tok_emb", (vocab_size, d))
        w("pos_emb", (config.max_positions, d))
        for i in range(config.num_layers):
            base = f"layer{i}."
            ones(base + "ln1.gain", (d,))
            zeros(base + "ln1.bias", (d,))
            for proj in ("wq", "wk", "wv", "wo"):
                w(base + "attn." + proj, (d, d))
            for b in ("bq", "bv", "bo"):
                zeros(base + "attn." + b, (d,))
            ones(base + "ln2.gain", (d,))
            zeros(base + "ln2.bias", (d,))
            w(base + "ffn.w1", (d, f))
            zeros(base + "ffn.b1", (f,))
            w(base + "ffn.w2", (f, d))
            zeros(base + "ffn.b2", (d,))
        ones("final_ln.gain", (d,))
        zeros("final_ln.bias", (d,))
        w("head.w", (d, 2))
        zeros("head.b", (2,))
        return cls(config, vocab_size, p)

    def clone(self) -> "EncoderParams":
        copies = {
            k: Tensor(t.data.copy(), requires_grad=t.requires_grad)
            for k, t in self.params.items()
        }
        return EncoderParams(self.config, self.vocab_size, copies)

    def trainable(self) -> dict[str, Tensor]:
        return {k: t for k, t in self.params.items() if t.requires_grad}

    def checksum(self, only_frozen: bool = False) -> str:
        h = hashlib.sha256()
        for k in sorted(self.params):
            t = self.params[k]
            if only_frozen and t.requires_grad:
                continue
            h.update(k.encode())
            h.update(t.data.tobytes())
        return h.hexdigest()


def set_freeze_depth(params: EncoderParams, k: int) -> None:
    """Freeze embeddings plus the bottom k blocks; k == num_layers also
    freezes the final layer norm, leaving only the classification head."""
    cfg = params.config
    if not 0 <= k <= cfg.num_layers:
        raise ContractError(f"freeze depth {k} outside [0, {cfg.num_layers}]")
    frozen = set()
    if k >= 1:
        frozen.update({"tok_emb", "pos_emb"})
        for i in range(k):
            frozen.update(_layer_param_names(i))
    if k == cfg.num_layers:
        frozen.update({"final_ln.gain", "final_ln.bias"})
    for name, t in params.params.items():
        t.requires_grad = name not in frozen
        if not t.requires_grad:
            t.grad = None


def make_teacher(student: EncoderParams) -> EncoderParams:
    """Deep, fully frozen copy: later student updates can never leak in."""
    teacher = student.clone()
    for t in teacher.params.values():
        t.requires_grad = False
        t.grad = None
    return teacher


@dataclass
class EncoderOutput:
    h: np.ndarray                     # (d,) CLS vector
    per_layer_cls: list[np.ndarray]   # L+1 CLS vectors: embeddings, then each block
    logits: np.ndarray                # (2,)
    p_positive: float


@dataclass
class BatchEncoderOutput:
    h: Tensor        # (B, d)
    logits: Tensor   # (B, 2)
    p_pos: Tensor    # (B,)
    cls_trace: list[np.ndarray] = field(default_factory=list)


def encode_batch(
    params: EncoderParams,
    ids: np.ndarray,
    mask: np.ndarray | None = None,
    collect_trace: bool = False,
) -> BatchEncoderOutput:
    """Differentiable forward pass over a padded batch: ids (B, T) -> CLS reps."""
    cfg = params.config
    p = params.params
    ids = np.asarray(ids, dtype=np.int64)
    B, T = ids.shape
    if T > cfg.max_positions:
        raise ShapeError(f"sequence length {T} exceeds max_positions {cfg.max_positions}")
    if mask is None:
        mask = np.ones((B, T), dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != ids.shape:
        raise ShapeError(f"mask shape {mask.shape} != ids shape {ids.shape}")

    H = cfg.num_heads
    d = cfg.hidden_dim
    hd = d // H
    # -1e9 underflows to exactly 0 after softmax, so PAD never leaks into h.
    attn_bias = ((1.0 - mask) * -1e9)[:, None, None, :]

    x = ad.embedding(p["tok_emb"], ids) + ad.embedding(p["pos_emb"], np.arange(T))
    trace: list[np.ndarray] = []
    if collect_trace:
        trace.append(x.data[:, 0, :].copy())

    def heads(t: Tensor) -> Tensor:
        return ad.transpose(ad.reshape(t, (B, T, H, hd)), (0, 2, 1, 3))

    for i in range(cfg.num_layers):
        base = f"layer{i}."
        a = ad.layer_norm(x, p[base + "ln1.gain"], p[base + "ln1.bias"])
        q = heads(a @ p[base + "attn.wq"] + p[base + "attn.bq"])
        k = heads(a @ p[base + "attn.wk"])
        v = heads(a @ p[base + "attn.wv"] + p[base + "attn.bv"])
        scores = (q @ ad.transpose(k, (0, 1, 3, 2))) * (1.0 / np.sqrt(hd)) + attn_bias
        ctx = ad.softmax(scores, axis=-1) @ v
        ctx = ad.reshape(ad.transpose(ctx, (0, 2, 1, 3)), (B, T, d))
        x = x + (ctx @ p[base + "attn.wo"] + p[base + "attn.bo"])
        # tanh FFN: its derivative never vanishes on bounded inputs, which keeps
        # every parameter's gradient resolvable by the finite-difference oracle.
        f = ad.layer_norm(x, p[base + "ln2.gain"], p[base + "ln2.bias"])
        x = x + (ad.tanh(f @ p[base + "ffn.w1"] + p[base + "ffn.b1"]) @ p[base + "ffn.w2"] + p[base + "ffn.b2"])
        if collect_trace:
            trace.append(x.data[:, 0, :].copy())

    h = ad.layer_norm(x, p["final_ln.gain"], p["final_ln.bias"])[:, 0, :]
    logits = h @ p["head.w"] + p["head.b"]
    p_pos = ad.softmax(logits, axis=-1)[:, 1]
    return BatchEncoderOutput(h=h, logits=logits, p_pos=p_pos, cls_trace=trace)


def encode(params: EncoderParams, ids: list[int], mask: list[float] | None = None) -> EncoderOutput:
    """Single-sequence forward pass; pure function of (params, ids, mask)."""
    if not ids:
        raise ContractError("encode requires a non-empty id sequence")
    if ids[0] != CLS_ID:
        raise ContractError("id sequences must start with CLS")
    arr = np.asarray([ids], dtype=np.int64)
    m = None if mask is None else np.asarray([mask], dtype=np.float64)
    out = encode_batch(params, arr, m, collect_trace=True)
    logits = out.logits.data[0]
    return EncoderOutput(
        h=out.h.data[0].copy(),
        per_layer_cls=[t[0].copy() for t in out.cls_trace],
        logits=logits.copy(),
        p_positive=float(out.p_pos.data[0]),
    )


def encode_text(params: EncoderParams, spec: TokenizerSpec, text: str) -> EncoderOutput:
    return encode(params, tokenize(text, spec))


def encode_texts(
    params: EncoderParams, spec: TokenizerSpec, texts: list[str], batch_size: int = 64
) -> np.ndarray:
    """CLS vectors for many texts, no gradients: (N, d)."""
    outs = []
    for start in range(0, len(texts), batch_size):
        chunk = texts[start : start + batch_size]
        ids, mask = pad_batch([tokenize(t, spec) for t in chunk])
        frozen = EncoderParams(
            params.config, params.vocab_size, {k: t.detach() for k, t in params.params.items()}
        )
        outs.append(encode_batch(frozen, ids, mask).h.data)
    return np.concatenate(outs, axis=0)


# -- checkpoint io ----------------------------------------------------------


def save_checkpoint(path, params: EncoderParams, spec: TokenizerSpec) -> None:
    """One JSON document: config + vocabulary + every array. Floats are stored
    via repr so reload reproduces encodings bit-for-bit."""
    doc = {
        "format": CHECKPOINT_FORMAT,
        "config": {
            "num_layers": params.config.num_layers,
            "hidden_dim": params.config.hidden_dim,
            "num_heads": params.config.num_heads,
            "ffn_dim": params.config.ffn_dim,
            "max_positions": params.config.max_positions,
            "freeze_depth": params.config.freeze_depth,
        },
        "vocab": spec.vocab,
        "max_sequence_length": spec.max_sequence_length,
        "params": {
            k: {"shape": list(t.shape), "data": t.data.reshape(-1).tolist()}
            for k, t in params.params.items()
        },
        "trainable": {k: t.requires_grad for k, t in params.params.items()},
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f)


def load_checkpoint(path) -> tuple[EncoderParams, TokenizerSpec]:
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise LoadError(f"{path}: not a {CHECKPOINT_FORMAT} document")
    cfg = EncoderConfig(**doc["config"])
    spec = TokenizerSpec(vocab=doc["vocab"], max_sequence_length=doc["max_sequence_length"])
    tensors = {}
    for k, entry in doc["params"].items():
        arr = np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
        tensors[k] = Tensor(arr, requires_grad=doc["trainable"][k])
    return EncoderParams(cfg, spec.vocab_size, tensors), spec
