"""Embedding-space diagnostics: alignment distances, 2-D projection, freeze sweep."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .augment import ParallelTriplet
from .encoder import EncoderConfig, EncoderParams, TokenizerSpec, encode_texts
from .errors import ContractError
from .trainer import TrainConfig, train
from .metrics import evaluate_variant


@dataclass
class AlignmentReport:
    """Mean cosine distances over a triplet set, all in [0, 2]."""

    student_src_tr: float
    student_src_tl: float
    student_tr_tl: float
    teacher_src_student_src: float
    teacher_src_student_tr: float
    teacher_src_student_tl: float
    n: int

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def _mean_cos_dist(a: np.ndarray, b: np.ndarray) -> float:
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    if np.any(na == 0.0) or np.any(nb == 0.0):
        raise ContractError("zero-norm representation in alignment diagnostics")
    return float(np.mean(1.0 - np.sum(a * b, axis=1) / (na * nb)))


def alignment_diagnostics(
    teacher: EncoderParams,
    student: EncoderParams,
    spec: TokenizerSpec,
    triplets: list[ParallelTriplet],
) -> AlignmentReport:
    if not triplets:
        raise ContractError("alignment_diagnostics requires a non-empty triplet set")
    src = [t.src for t in triplets]
    s_src = encode_texts(student, spec, src)
    s_tr = encode_texts(student, spec, [t.tr for t in triplets])
    s_tl = encode_texts(student, spec, [t.tl for t in triplets])
    t_src = encode_texts(teacher, spec, src)
    return AlignmentReport(
        student_src_tr=_mean_cos_dist(s_src, s_tr),
        student_src_tl=_mean_cos_dist(s_src, s_tl),
        student_tr_tl=_mean_cos_dist(s_tr, s_tl),
        teacher_src_student_src=_mean_cos_dist(t_src, s_src),
        teacher_src_student_tr=_mean_cos_dist(t_src, s_tr),
        teacher_src_student_tl=_mean_cos_dist(t_src, s_tl),
        n=len(triplets),
    )


def project2d(vectors: np.ndarray, tags: list[str]) -> list[tuple[float, float, str]]:
    """Mean-centered projection onto the top-2 principal directions.

    Component signs are fixed (largest-magnitude loading made positive) so the
    output is deterministic across runs and platforms.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[0] < 2:
        raise ContractError("project2d requires at least 2 vectors of equal dimension")
    if len(tags) != vectors.shape[0]:
        raise ContractError("one tag per vector required")
    centered = vectors - vectors.mean(axis=0, keepdims=True)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    comps = vt[:2] if vt.shape[0] >= 2 else np.vstack([vt, np.zeros_like(vt[:1])])
    for i in range(comps.shape[0]):
        j = int(np.argmax(np.abs(comps[i])))
        if comps[i, j] < 0:
            comps[i] = -comps[i]
    proj = centered @ comps.T
    return [(float(x), float(y), tag) for (x, y), tag in zip(proj, tags)]


def project_triplets(
    params: EncoderParams,
    spec: TokenizerSpec,
    triplets: list[ParallelTriplet],
) -> list[tuple[float, float, str]]:
    """Fig.-style view: CLS vectors of all three variants, tagged by variant."""
    vecs, tags = [], []
    for variant, tag in (("src", "src"), ("tr", "original"), ("tl", "romanized")):
        vecs.append(encode_texts(params, spec, [t.variant(variant) for t in triplets]))
        tags.extend([tag] * len(triplets))
    return project2d(np.concatenate(vecs, axis=0), tags)


def freeze_sweep(
    train_triplets: list[ParallelTriplet],
    val_triplets: list[ParallelTriplet],
    test_triplets: list[ParallelTriplet],
    cfg: TrainConfig,
    k_values: list[int],
    encoder_config: EncoderConfig | None = None,
) -> list[dict]:
    """Train one model per freeze depth (same seed and data throughout) and
    report test weighted F1 rows [{"k": k, "weighted_f1": f}, ...]."""
    enc_cfg = encoder_config or EncoderConfig()
    for k in k_values:
        if not 0 <= k <= enc_cfg.num_layers:
            raise ContractError(f"freeze depth {k} outside [0, {enc_cfg.num_layers}]")
    rows = []
    for k in k_values:
        result = train(train_triplets, val_triplets, replace(cfg, freeze_depth=k), enc_cfg)
        report = evaluate_variant(
            result.best_params, result.tokenizer, test_triplets, cfg.val_variant
        )
        rows.append({"k": int(k), "weighted_f1": report.weighted_f1})
    return rows


def write_sweep(path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row) + "\n")
