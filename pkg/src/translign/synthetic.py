"""Bundled synthetic cross-lingual task with exact ground truth.

A constructed target language (deterministic word lexicon over a Greek-letter
script) plus a bijective cipher gives a 3-way parallel corpus whose translation
and transliteration steps are exactly reproducible. Labels are keyword-driven:
the majority polarity of the sentiment words in a sentence. Training and
validation sentences carry a spurious filler-word correlation with the label;
test sentences reverse it, so models that drift onto filler features lose
exactly where the anchored model should not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .augment import DictionaryTranslator, LabeledExample, ParallelTriplet, build_triplets
from .translit import MappingTable, cipher_table

POSITIVE_WORDS = [
    "good", "glad", "fine", "calm", "nice", "sweet", "brave", "fresh",
    "warm", "neat", "kind", "happy",
]
NEGATIVE_WORDS = [
    "bad", "sad", "angry", "dark", "gross", "harsh", "cruel", "dull",
    "weak", "sour", "awful", "grim",
]
# Filler halves: the first half co-occurs with label 1 during training, the
# second with label 0; the test split reverses the pairing.
FILLERS_POS_SIDE = [
    "movie", "film", "actor", "scene", "plot", "story", "song", "music",
    "river", "cloud", "storm", "field",
]
FILLERS_NEG_SIDE = [
    "stage", "role", "cast", "drama", "show", "crowd", "night", "rain",
    "water", "road", "town", "boat",
]

_GREEK_CONSONANTS = "βγδζθκλμνπρστφχψ"
_GREEK_VOWELS = "αειουωη"
_LANGUAGE_SEED = 7  # fixed: the language itself is part of the task definition

# Training/validation draw fillers from the label-matched half with this
# probability; the test split uses 1 - q (reversed correlation).
SPURIOUS_Q_TRAIN = 0.85


def _all_words() -> list[str]:
    return POSITIVE_WORDS + NEGATIVE_WORDS + FILLERS_POS_SIDE + FILLERS_NEG_SIDE


def make_lexicon() -> dict[str, str]:
    """Deterministic source-word -> Greek pseudo-word dictionary."""
    rng = np.random.default_rng(_LANGUAGE_SEED)
    lexicon: dict[str, str] = {}
    used: set[str] = set()
    for word in _all_words():
        while True:
            target = "".join(
                rng.choice(list(_GREEK_CONSONANTS)) + rng.choice(list(_GREEK_VOWELS))
                for _ in range(2)
            )[: int(rng.integers(3, 5))]
            if len(target) >= 3 and target not in used:
                used.add(target)
                lexicon[word] = target
                break
    return lexicon


def make_cipher_key() -> dict[str, str]:
    """Bijection from the synthetic script (plus sentence punctuation) to Latin."""
    alphabet = sorted(set(_GREEK_CONSONANTS + _GREEK_VOWELS))
    rng = np.random.default_rng(_LANGUAGE_SEED + 1)
    latin = list("abcdefghijklmnopqrstuvwxyz")
    rng.shuffle(latin)
    key = {g: latin[i] for i, g in enumerate(alphabet)}
    for ch in " .!?,":
        key[ch] = ch
    return key


@dataclass
class SyntheticTask:
    train: list[ParallelTriplet]
    val: list[ParallelTriplet]
    test: list[ParallelTriplet]
    translator: DictionaryTranslator
    table: MappingTable
    cipher_key: dict[str, str]


def generate_corpus(
    n: int,
    rng: np.random.Generator,
    id_prefix: str,
    spurious_q: float = SPURIOUS_Q_TRAIN,
) -> list[LabeledExample]:
    """Keyword-labeled sentences; `spurious_q` sets how often fillers come from
    the label-matched half (0.5 = no correlation)."""
    examples = []
    for i in range(n):
        label = int(rng.integers(0, 2))
        majority = POSITIVE_WORDS if label == 1 else NEGATIVE_WORDS
        polar = [str(rng.choice(majority)) for _ in range(1 if rng.random() < 0.7 else 2)]
        matched = FILLERS_POS_SIDE if label == 1 else FILLERS_NEG_SIDE
        other = FILLERS_NEG_SIDE if label == 1 else FILLERS_POS_SIDE
        fillers = [
            str(rng.choice(matched)) if rng.random() < spurious_q else str(rng.choice(other))
            for _ in range(int(rng.integers(2, 4)))
        ]
        words = polar + fillers
        rng.shuffle(words)
        text = " ".join(words)
        if rng.random() < 0.3:
            text += str(rng.choice([".", "!", "?"]))
        examples.append(LabeledExample(id=f"{id_prefix}-{i:05d}", text=text, label=label))
    return examples


def generate_task(
    seed: int,
    n_train: int = 2000,
    n_val: int = 500,
    n_test: int = 500,
) -> SyntheticTask:
    """The bundled task: train/val share the spurious filler correlation, test
    reverses it. The language (lexicon + cipher) is fixed; only sampling varies
    with the seed."""
    rng = np.random.default_rng(seed)
    lexicon = make_lexicon()
    key = make_cipher_key()
    translator = DictionaryTranslator(lexicon)
    table = cipher_table(key, name="synthetic-cipher")
    train = generate_corpus(n_train, rng, "train", SPURIOUS_Q_TRAIN)
    val = generate_corpus(n_val, rng, "val", SPURIOUS_Q_TRAIN)
    test = generate_corpus(n_test, rng, "test", 1.0 - SPURIOUS_Q_TRAIN)
    return SyntheticTask(
        train=build_triplets(train, translator, table),
        val=build_triplets(val, translator, table),
        test=build_triplets(test, translator, table),
        translator=translator,
        table=table,
        cipher_key=key,
    )
