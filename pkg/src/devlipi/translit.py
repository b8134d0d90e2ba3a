"""Recognized Devanagari labels to IAST text.

Consonant entries carry the inherent ``a``.  A following vowel sign takes
its place, a virama deletes it, and anusvara, visarga and candrabindu are
appended.  Recognition emits one label per glyph, so the long ``o``/``au``
signs arrive as ``ा`` plus an ``े``/``ै`` ascender; they are fused first.
"""
from __future__ import annotations

import csv
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

FIRST_CHOICE = "first_choice"
ALTERNATE = "alternate"
UNRECOGNIZED_MODIFIER = "unrecognized_modifier"
UNKNOWN = "□"  # white square
MISSING_MODIFIER = "_"

# Glyph pairs written as one vowel sign.
FUSED_SIGNS = {("ा", "े"): "ो", ("ा", "ै"): "ौ"}


def _kind(ch: str) -> str:
    """Coarse class of one code point: consonant, vowel, vsign, virama, mark."""
    name = unicodedata.name(ch, "")
    if not name.startswith("DEVANAGARI"):
        return "other"
    if "VOWEL SIGN" in name:
        return "vsign"
    if name.endswith("VIRAMA"):
        return "virama"
    if name.startswith("DEVANAGARI SIGN"):
        return "mark"
    if name.startswith("DEVANAGARI LETTER"):
        # independent vowels and consonants share the LETTER prefix
        return "vowel" if ch in _VOWEL_LETTERS else "consonant"
    return "other"


_VOWEL_LETTERS = set("अआइईउऊऋॠऌॡएऐओऔऍऎऑऒ")


def label_kind(label: str) -> str:
    """Kind of a whole label: a stacked conjunct counts as a consonant."""
    if not label:
        return "other"
    kinds = [_kind(c) for c in label]
    if kinds[-1] == "consonant":
        return "consonant"
    if len(label) == 1:
        return kinds[0]
    if kinds[0] == "vowel":
        return "vowel"
    return "other"


@dataclass(frozen=True)
class OutputToken:
    roman: str
    confidence: str = FIRST_CHOICE
    label: str = ""
    alternates: tuple = ()
    note: str = ""


@dataclass(frozen=True)
class TranslitTable:
    entries: dict

    def __post_init__(self):
        for lab, rom in self.entries.items():
            if label_kind(lab) == "consonant" and not rom.endswith("a"):
                raise ValueError(f"consonant {lab!r} maps to {rom!r} without inherent a")

    @classmethod
    def loads(cls, text: str) -> "TranslitTable":
        entries = {}
        for row in csv.reader(text.splitlines(), delimiter="\t"):
            if not row or not row[0].strip() or row[0].lstrip().startswith("#"):
                continue
            lab = unicodedata.normalize("NFC", row[0].strip())
            rom = unicodedata.normalize("NFC", row[1].strip() if len(row) > 1 else "")
            if lab in entries:
                raise ValueError(f"duplicate table entry for {lab!r}")
            entries[lab] = rom
        return cls(entries)

    @classmethod
    def load(cls, path) -> "TranslitTable":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    def dumps(self) -> str:
        return "".join(f"{k}\t{v}\n" for k, v in self.entries.items())

    def __contains__(self, label) -> bool:
        return label in self.entries

    def roman(self, label: str):
        """Roman form of ``label``; unlisted stacks are composed code point
        by code point.  None when some part is unknown."""
        if label in self.entries:
            return self.entries[label]
        if len(label) < 2:
            return None
        out = ""
        for ch in label:
            r = self.entries.get(ch)
            if r is None:
                return None
            k = _kind(ch)
            if k in ("vsign", "virama") and out.endswith("a"):
                out = out[:-1]
            out += r
        return out

    def reverse(self, roman: str) -> set:
        return {k for k, v in self.entries.items() if v == roman}


@lru_cache(maxsize=1)
def default_table() -> TranslitTable:
    text = resources.files("devlipi").joinpath("data/iast.tsv").read_text(encoding="utf-8")
    return TranslitTable.loads(text)


def transliterate(labels, table: TranslitTable | None = None, alternates=None) -> list:
    """One token per written syllable.

    ``labels`` is the glyph sequence of one word in reading order; ``None``
    stands for a modifier the recognizer could not name.  ``alternates``
    maps a label position to the runner-up labels of that glyph; such
    tokens are marked ``alternate``.
    """
    table = table or default_table()
    alternates = alternates or {}
    labels = list(labels)
    # keep alternates aligned with the fused sequence
    alt_at = []
    fused = []
    for i, lab in enumerate(labels):
        if fused and lab is not None and fused[-1] is not None and (fused[-1], lab) in FUSED_SIGNS:
            fused[-1] = FUSED_SIGNS[(fused[-1], lab)]
            continue
        fused.append(lab)
        alt_at.append(tuple(alternates.get(i, ())))

    tokens = []
    cur = None  # [roman, label, alternates, missing, notes, inherent]

    def flush():
        if cur is None:
            return
        roman, label, alts, missing, notes, _ = cur
        conf = UNRECOGNIZED_MODIFIER if missing else ALTERNATE if alts else FIRST_CHOICE
        tokens.append(OutputToken(unicodedata.normalize("NFC", roman), conf, label, alts,
                                  "; ".join(notes)))

    for lab, alts in zip(fused, alt_at):
        if lab is None:
            if cur is None:
                cur = [MISSING_MODIFIER, "", (), True, [], False]
            else:
                cur[0] += MISSING_MODIFIER
                cur[3] = True
            continue
        kind = label_kind(lab)
        rom = table.roman(lab)
        if kind in ("vsign", "virama", "mark") and rom is not None:
            if cur is None:
                cur = [rom, lab, alts, False, [], False]
            else:
                if kind in ("vsign", "virama") and cur[5]:
                    cur[0] = cur[0][:-1]
                    cur[5] = False
                cur[0] += rom
                cur[1] += lab
                cur[2] = cur[2] + alts
            continue
        flush()
        if rom is None:
            cur = [UNKNOWN, lab, alts, False, [f"unknown label {lab!r}"], False]
        else:
            cur = [rom, lab, alts, False, [], kind == "consonant" and rom.endswith("a")]
    flush()
    return tokens


def render_document(tokens, layout=None) -> str:
    """Join tokens into text.

    ``layout`` lists, per line, the number of tokens in each word.  Without
    a layout all tokens form one word.
    """
    tokens = list(tokens)
    if not tokens:
        return ""
    if layout is None:
        layout = [[len(tokens)]]
    out_lines = []
    i = 0
    for words in layout:
        parts = []
        for n in words:
            parts.append("".join(t.roman for t in tokens[i:i + n]))
            i += n
        out_lines.append(" ".join(p for p in parts if p))
    if i != len(tokens):
        raise ValueError(f"layout covers {i} tokens, got {len(tokens)}")
    return unicodedata.normalize("NFC", "\n".join(out_lines)) + "\n"


def sidecar_report(tokens, layout=None) -> dict:
    """Tokens that were not a clean first choice, with their positions."""
    tokens = list(tokens)
    pos = []
    layout = layout if layout is not None else [[len(tokens)]]
    for li, words in enumerate(layout):
        for wi, n in enumerate(words):
            pos += [(li, wi)] * n
    entries = []
    for i, t in enumerate(tokens):
        if t.confidence != FIRST_CHOICE or t.note:
            li, wi = pos[i] if i < len(pos) else (None, None)
            entries.append({"index": i, "line": li, "word": wi, "label": t.label,
                            "roman": t.roman, "confidence": t.confidence,
                            "alternates": list(t.alternates), "note": t.note})
    return {
        "tokens": len(tokens),
        "alternate": sum(t.confidence == ALTERNATE for t in tokens),
        "unrecognized_modifier": sum(t.confidence == UNRECOGNIZED_MODIFIER for t in tokens),
        "unknown_label": sum(t.roman == UNKNOWN for t in tokens),
        "entries": entries,
    }


def transliterate_text(text: str, table: TranslitTable | None = None) -> str:
    """Transliterate Unicode Devanagari text, word by word."""
    table = table or default_table()
    lines = []
    for line in unicodedata.normalize("NFC", text).splitlines():
        words = []
        for w in line.split():
            words.append("".join(t.roman for t in transliterate(split_labels(w, table), table)))
        lines.append(" ".join(words))
    return "\n".join(lines)


def split_labels(word: str, table: TranslitTable | None = None) -> list:
    """Break a Devanagari string into table labels, longest match first."""
    table = table or default_table()
    longest = max((len(k) for k in table.entries), default=1)
    out = []
    i = 0
    while i < len(word):
        for n in range(min(longest, len(word) - i), 0, -1):
            piece = word[i:i + n]
            if n == 1 or piece in table:
                out.append(piece)
                i += n
                break
    return out
