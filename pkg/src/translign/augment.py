"""Three-way parallel corpus construction and JSONL corpus I/O.

Each labeled source sentence is expanded to (source, translation,
transliterated translation) with the original label, mirroring the augmented
training input the trainer consumes.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass

from .errors import ContractError, LoadError
from .translit import MappingTable, transliterate

_TOKEN_RE = re.compile(r"^(\W*)(.*?)(\W*)$", re.UNICODE)


@dataclass(frozen=True)
class LabeledExample:
    id: str
    text: str
    label: int

    def __post_init__(self):
        if not self.text.strip():
            raise ContractError(f"example {self.id!r}: empty text")
        if self.label not in (0, 1):
            raise ContractError(f"example {self.id!r}: label must be 0 or 1")


@dataclass(frozen=True)
class ParallelTriplet:
    id: str
    src: str
    tr: str
    tl: str
    label: int

    def variant(self, name: str) -> str:
        if name not in ("src", "tr", "tl"):
            raise ContractError(f"unknown variant {name!r}")
        return getattr(self, name)


class DictionaryTranslator:
    """Word-for-word substitution with case-insensitive lookup; out-of-lexicon
    words pass through unchanged."""

    def __init__(self, lexicon: dict[str, str]):
        self.lexicon = {k.lower(): v for k, v in lexicon.items()}

    def translate_word(self, word: str) -> str:
        return self.lexicon.get(word.lower(), word)


def translate(text: str, translator: DictionaryTranslator) -> str:
    """Substitute each whitespace-split token, keeping leading/trailing punctuation."""
    out = []
    for token in text.split():
        lead, core, trail = _TOKEN_RE.match(token).groups()
        out.append(lead + (translator.translate_word(core) if core else "") + trail)
    return " ".join(out)


def build_triplets(
    corpus: list[LabeledExample],
    translator: DictionaryTranslator,
    table: MappingTable,
) -> list[ParallelTriplet]:
    """src -> tr -> tl for every example; order, ids, and labels are preserved."""
    if not corpus:
        raise ContractError("build_triplets requires a non-empty corpus")
    triplets = []
    for ex in corpus:
        tr = translate(ex.text, translator)
        tl = transliterate(tr, table).output
        triplets.append(ParallelTriplet(id=ex.id, src=ex.text, tr=tr, tl=tl, label=ex.label))
    return triplets


# -- JSONL I/O ----------------------------------------------------------------


def _read_jsonl(path, required: tuple[str, ...]) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, 1):
            if not raw.strip():
                continue
            try:
                row = json.loads(raw)
            except json.JSONDecodeError as e:
                raise LoadError(f"{path}: line {line_no}: malformed JSON ({e.msg})") from None
            missing = [k for k in required if k not in row]
            if missing:
                raise LoadError(f"{path}: line {line_no}: missing fields {missing}")
            if row["label"] not in (0, 1):
                raise LoadError(
                    f"{path}: line {line_no}: unknown label value {row['label']!r}"
                )
            rows.append(row)
    if not rows:
        raise LoadError(f"{path}: empty corpus")
    return rows


def read_corpus(path) -> list[LabeledExample]:
    return [
        LabeledExample(id=str(r["id"]), text=r["text"], label=r["label"])
        for r in _read_jsonl(path, ("id", "text", "label"))
    ]


def write_corpus(path, examples: list[LabeledExample]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for ex in examples:
            f.write(json.dumps(asdict(ex), ensure_ascii=False) + "\n")


def read_triplets(path) -> list[ParallelTriplet]:
    return [
        ParallelTriplet(
            id=str(r["id"]), src=r["src"], tr=r["tr"], tl=r["tl"], label=r["label"]
        )
        for r in _read_jsonl(path, ("id", "src", "tr", "tl", "label"))
    ]


def write_triplets(path, triplets: list[ParallelTriplet]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in triplets:
            f.write(json.dumps(asdict(t), ensure_ascii=False) + "\n")
