#!/usr/bin/env python3
"""Regenerate the shipped transliteration tables and the native-script corpus.

Writes src/translign/tables/{devanagari.tsv,malayalam.tsv,native_corpus.txt}.
The tables spell out consonant+matra and consonant+virama composites so the
pure longest-match engine needs no script-specific logic at runtime.
"""

from __future__ import annotations

import random
from pathlib import Path

TABLES_DIR = Path(__file__).resolve().parent.parent / "src" / "translign" / "tables"

DEVANAGARI_VOWELS = {
    "अ": "a", "आ": "aa", "इ": "i", "ई": "ii", "उ": "u", "ऊ": "uu",
    "ऋ": "ri", "ए": "e", "ऐ": "ai", "ओ": "o", "औ": "au",
}
DEVANAGARI_CONSONANTS = {
    "क": "k", "ख": "kh", "ग": "g", "घ": "gh", "ङ": "ng",
    "च": "ch", "छ": "chh", "ज": "j", "झ": "jh", "ञ": "ny",
    "ट": "t", "ठ": "th", "ड": "d", "ढ": "dh", "ण": "n",
    "त": "t", "थ": "th", "द": "d", "ध": "dh", "न": "n",
    "प": "p", "फ": "ph", "ब": "b", "भ": "bh", "म": "m",
    "य": "y", "र": "r", "ल": "l", "व": "v",
    "श": "sh", "ष": "sh", "स": "s", "ह": "h", "ळ": "l",
    "क़": "q", "ख़": "kh", "ग़": "g", "ज़": "z", "ड़": "r", "ढ़": "rh", "फ़": "f",
}
DEVANAGARI_MATRAS = {
    "ा": "aa", "ि": "i", "ी": "ii", "ु": "u", "ू": "uu",
    "ृ": "ri", "े": "e", "ै": "ai", "ो": "o", "ौ": "au",
}
DEVANAGARI_SIGNS = {
    "ं": "n", "ः": "h", "ँ": "n", "ऽ": "'", "़": "", "।": ".", "॥": "..",
}
DEVANAGARI_VIRAMA = "्"

MALAYALAM_VOWELS = {
    "അ": "a", "ആ": "aa", "ഇ": "i", "ഈ": "ii", "ഉ": "u", "ഊ": "uu",
    "ഋ": "ri", "എ": "e", "ഏ": "ee", "ഐ": "ai", "ഒ": "o", "ഓ": "oo", "ഔ": "au",
}
MALAYALAM_CONSONANTS = {
    "ക": "k", "ഖ": "kh", "ഗ": "g", "ഘ": "gh", "ങ": "ng",
    "ച": "ch", "ഛ": "chh", "ജ": "j", "ഝ": "jh", "ഞ": "nj",
    "ട": "t", "ഠ": "th", "ഡ": "d", "ഢ": "dh", "ണ": "n",
    "ത": "th", "ഥ": "th", "ദ": "d", "ധ": "dh", "ന": "n",
    "പ": "p", "ഫ": "ph", "ബ": "b", "ഭ": "bh", "മ": "m",
    "യ": "y", "ര": "r", "ല": "l", "വ": "v",
    "ശ": "sh", "ഷ": "sh", "സ": "s", "ഹ": "h",
    "ള": "l", "ഴ": "zh", "റ": "r",
}
MALAYALAM_MATRAS = {
    "ാ": "aa", "ി": "i", "ീ": "ii", "ു": "u", "ൂ": "uu", "ൃ": "ri",
    "െ": "e", "േ": "ee", "ൈ": "ai", "ൊ": "o", "ോ": "oo", "ൌ": "au", "ൗ": "au",
}
MALAYALAM_SIGNS = {
    "ം": "m", "ഃ": "h",
    "ൺ": "n", "ൻ": "n", "ർ": "r", "ൽ": "l", "ൾ": "l", "ൿ": "k",
}
MALAYALAM_VIRAMA = "്"


def build_rules(vowels, consonants, matras, signs, virama) -> list[tuple[str, str]]:
    rules: list[tuple[str, str]] = []
    for cons, base in consonants.items():
        rules.append((cons, base + "a"))          # inherent vowel
        rules.append((cons + virama, base))       # vowel killer
        for matra, vowel in matras.items():
            rules.append((cons + matra, base + vowel))
    rules.extend(vowels.items())
    rules.extend(signs.items())
    rules.append((virama, ""))                    # stray virama
    return rules


def write_table(path: Path, header: str, rules: list[tuple[str, str]]) -> None:
    lines = [f"# {header}", "# source<TAB>replacement; longest source wins"]
    lines += [f"{src}\t{repl}" for src, repl in rules]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {path} ({len(rules)} rules)")


def synth_words(rng, consonants, matras, signs, virama, n):
    cons = list(consonants)
    mat = list(matras)
    sgn = [s for s in signs if signs[s] and len(s) == 1]
    words = []
    for _ in range(n):
        parts = []
        for i in range(rng.randint(2, 5)):
            c = rng.choice(cons)
            form = rng.random()
            if form < 0.45:
                parts.append(c)                       # inherent vowel
            elif form < 0.8:
                parts.append(c + rng.choice(mat))     # consonant + matra
            else:
                parts.append(c + virama)              # cluster start / final
        if rng.random() < 0.2:
            parts.append(rng.choice(sgn))
        words.append("".join(parts))
    return words


def write_corpus(path: Path, rng) -> None:
    dev_words = synth_words(rng, DEVANAGARI_CONSONANTS, DEVANAGARI_MATRAS,
                            DEVANAGARI_SIGNS, DEVANAGARI_VIRAMA, 2500)
    mal_words = synth_words(rng, MALAYALAM_CONSONANTS, MALAYALAM_MATRAS,
                            MALAYALAM_SIGNS, MALAYALAM_VIRAMA, 2500)
    ascii_words = ["help", "flood", "rain", "rt", "news", "2026"]
    lines = []
    for words in (dev_words, mal_words):
        for _ in range(500):
            n = rng.randint(3, 8)
            line = [rng.choice(words) for _ in range(n)]
            if rng.random() < 0.3:
                line.insert(rng.randrange(len(line)), rng.choice(ascii_words))
            text = " ".join(line)
            if rng.random() < 0.25:
                text += rng.choice([".", "!", "?"])
            lines.append(text)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {path} ({len(lines)} lines)")


def main() -> None:
    TABLES_DIR.mkdir(parents=True, exist_ok=True)
    write_table(
        TABLES_DIR / "devanagari.tsv",
        "Devanagari -> Latin",
        build_rules(DEVANAGARI_VOWELS, DEVANAGARI_CONSONANTS, DEVANAGARI_MATRAS,
                    DEVANAGARI_SIGNS, DEVANAGARI_VIRAMA),
    )
    write_table(
        TABLES_DIR / "malayalam.tsv",
        "Malayalam -> Latin",
        build_rules(MALAYALAM_VOWELS, MALAYALAM_CONSONANTS, MALAYALAM_MATRAS,
                    MALAYALAM_SIGNS, MALAYALAM_VIRAMA),
    )
    write_corpus(TABLES_DIR / "native_corpus.txt", random.Random(20260810))


if __name__ == "__main__":
    main()
