"""Table-driven grapheme transliteration plus an invertible cipher.

A mapping table is an ordered list of (source grapheme cluster -> ASCII)
rewrite rules applied longest-source-first. ASCII input passes through
untouched; unmapped non-ASCII codepoints pass through and are counted, so
transliteration is total even on noisy social-media text.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .errors import ContractError, LoadError

ALLOWED_REPLACEMENT_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ'~.-"
)

# Consonant ranges used to recognize inherent-vowel rules for word-final
# schwa deletion (Devanagari incl. nukta extensions, Malayalam).
_BRAHMIC_CONSONANTS = (
    (0x0915, 0x0939),
    (0x0958, 0x095F),
    (0x0D15, 0x0D39),
)


def _is_brahmic_consonant(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _BRAHMIC_CONSONANTS)


@dataclass(frozen=True)
class Rule:
    source: str
    replacement: str

    @property
    def inherent_a(self) -> bool:
        """True for bare-consonant rules whose replacement carries the inherent 'a'."""
        return (
            len(self.replacement) >= 2
            and self.replacement.endswith("a")
            and _is_brahmic_consonant(self.source[-1])
        )


class MappingTable:
    """Immutable after construction; matching is longest-source-first with
    ties broken by rule order."""

    def __init__(self, name: str, rules: list[tuple[str, str]], final_schwa_deletion: bool = False):
        self.name = name
        self.final_schwa_deletion = final_schwa_deletion
        self.rules: list[Rule] = [Rule(s, r) for s, r in rules]
        self._validate()
        by_first: dict[str, list[Rule]] = {}
        for order, rule in enumerate(self.rules):
            by_first.setdefault(rule.source[0], []).append(rule)
        for lst in by_first.values():
            lst.sort(key=lambda r: -len(r.source))  # stable: ties keep load order
        self._by_first = by_first

    def _validate(self) -> None:
        seen: dict[str, int] = {}
        for i, rule in enumerate(self.rules, 1):
            if not rule.source:
                raise LoadError(f"table {self.name!r}: rule {i}: empty source")
            if rule.source in seen:
                raise LoadError(
                    f"table {self.name!r}: rule {i}: duplicate source {rule.source!r} "
                    f"(first defined at rule {seen[rule.source]})"
                )
            seen[rule.source] = i
            bad = set(rule.replacement) - ALLOWED_REPLACEMENT_CHARS
            if bad:
                raise LoadError(
                    f"table {self.name!r}: rule {i}: disallowed replacement characters {sorted(bad)!r}"
                )
        # Idempotence guard: a replacement that contains a rule source would
        # make a second pass rewrite the output again.
        sources = [r.source for r in self.rules]
        for i, rule in enumerate(self.rules, 1):
            for src in sources:
                if src in rule.replacement:
                    raise LoadError(
                        f"table {self.name!r}: rule {i}: replacement {rule.replacement!r} "
                        f"contains rule source {src!r}"
                    )

    def __len__(self) -> int:
        return len(self.rules)


@dataclass
class TransliterationResult:
    output: str
    unmapped_count: int
    rule_hits: dict[str, int] = field(default_factory=dict)


def load_table(path, name: str | None = None, final_schwa_deletion: bool = False) -> MappingTable:
    """Parse a UTF-8 rule file: one `source<TAB>replacement` per line, '#' comments."""
    rules: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise LoadError(f"{path}: line {line_no}: expected source<TAB>replacement")
            rules.append((parts[0], parts[1]))
    try:
        return MappingTable(name or str(path), rules, final_schwa_deletion)
    except LoadError as e:
        raise LoadError(f"{path}: {e}") from None


def transliterate(text: str, table: MappingTable) -> TransliterationResult:
    """Total, deterministic rewrite; ASCII passes through, unmapped non-ASCII
    passes through and is counted."""
    out: list[str] = []
    unmapped = 0
    hits: dict[str, int] = {}
    last_rule: Rule | None = None
    i = 0
    n = len(text)
    while i < n:
        matched = None
        for rule in table._by_first.get(text[i], ()):
            if text.startswith(rule.source, i):
                matched = rule
                break
        if matched is not None:
            out.append(matched.replacement)
            hits[matched.source] = hits.get(matched.source, 0) + 1
            i += len(matched.source)
            last_rule = matched
        else:
            ch = text[i]
            if not ch.isalpha() and table.final_schwa_deletion:
                _strip_schwa(out, last_rule)
            if not ch.isascii():
                unmapped += 1
            out.append(ch)
            i += 1
            last_rule = None
    if table.final_schwa_deletion:
        _strip_schwa(out, last_rule)
    return TransliterationResult("".join(out), unmapped, hits)


def _strip_schwa(out: list[str], last_rule: Rule | None) -> None:
    if last_rule is not None and last_rule.inherent_a and out and out[-1]:
        out[-1] = out[-1][:-1]


SHIPPED_TABLES = ("devanagari", "malayalam")


def shipped_table_path(name: str):
    if name not in SHIPPED_TABLES:
        raise ContractError(f"no shipped table {name!r}; available: {SHIPPED_TABLES}")
    return resources.files("translign") / "tables" / f"{name}.tsv"


def shipped_table(name: str, final_schwa_deletion: bool = False) -> MappingTable:
    return load_table(
        shipped_table_path(name), name=name, final_schwa_deletion=final_schwa_deletion
    )


def shipped_corpus_path():
    """1000 lines of native-script text fully covered by the shipped tables."""
    return resources.files("translign") / "tables" / "native_corpus.txt"


# -- synthetic cipher --------------------------------------------------------


def validate_cipher_key(key: dict[str, str]) -> None:
    if len(set(key.values())) != len(key):
        raise ContractError("cipher key is not a bijection (duplicate targets)")
    for k, v in key.items():
        if len(k) != 1 or len(v) != 1:
            raise ContractError("cipher key must map single codepoints to single codepoints")


def cipher_transliterate(text: str, key: dict[str, str]) -> str:
    """Length-preserving substitution; every codepoint must be in the key."""
    validate_cipher_key(key)
    try:
        return "".join(key[ch] for ch in text)
    except KeyError as e:
        raise ContractError(f"codepoint {e.args[0]!r} outside cipher key domain") from None


def invert_cipher_key(key: dict[str, str]) -> dict[str, str]:
    validate_cipher_key(key)
    return {v: k for k, v in key.items()}


def cipher_table(key: dict[str, str], name: str = "cipher") -> MappingTable:
    """The same cipher expressed as a mapping table (non-identity rules only)."""
    validate_cipher_key(key)
    rules = [(k, v) for k, v in key.items() if k != v]
    return MappingTable(name, rules)
