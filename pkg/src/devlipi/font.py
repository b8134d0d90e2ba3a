"""Procedural glyph set used as the default template library and by the
synthetic page generator.

Every core glyph is a connected 2-px stroke drawing on a 24-row strip whose
top row meets the header line.  Shapes are drawn from a seeded generator so
the set is identical on every run; no font rasteriser is involved.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from skimage.draw import line as _bresenham

from .raster import cc_label, crop_to_content

CORE_H = 24
HEADER_T = 3
ASC_H = 9
DESC_H = 12
STROKE = 2

VOWELS = "अ आ इ ई उ ऊ ए ऐ ओ औ ऋ ॠ ऌ ॡ".split()
CONSONANTS = ("क ख ग घ ङ च छ ज झ ञ ट ठ ड ढ ण त थ द ध न "
              "प फ ब भ म य र ल व श ष स ह").split()
SPECIAL_CONJUNCTS = ["क्ष", "त्र", "ज्ञ"]
AA_SIGN = "ा"
VISARGA = "ः"
CORE_LABELS = VOWELS + CONSONANTS + SPECIAL_CONJUNCTS + [AA_SIGN, VISARGA]

# Pairs whose header-stripped bodies differ only by a break in the stroke.
CONFUSION_PAIRS = [("घ", "ध"), ("म", "भ")]
RAKAR_CANDIDATES = "प क ग ब द ह ट फ".split()
N_RAKAR = 2


def _art(rows):
    return np.array([[1 if ch == "#" else 0 for ch in r] for r in rows], dtype=np.uint8)


ASCENDERS = {
    "े": _art([
        "##.......",
        ".##......",
        "..##.....",
        "...##....",
        "....##...",
        ".....##..",
        "......##.",
        ".......##",
    ]),
    "ै": _art([
        "##......##",
        ".##....##.",
        "..##..##..",
        "...####...",
        "....##....",
        ".....##...",
        "......##..",
        ".......##.",
    ]),
    "ं": _art([
        ".##.",
        "####",
        "####",
        ".##.",
    ]),
    "ँ": _art([
        "...####...",
        "...####...",
        "...####...",
        "..........",
        "##......##",
        "##......##",
        ".##....##.",
        "..######..",
    ]),
}

DESCENDERS = {
    "ु": _art([
        "#......",
        "#......",
        "#......",
        "######.",
        ".....##",
        ".....##",
        ".....##",
        "....##.",
        "...##..",
        "..###..",
        ".##....",
        "##.....",
    ]),
    "ू": _art([
        "....#....",
        "....#....",
        "....#....",
        "#########",
        "##..##..#",
        "##..##...",
        "##..##...",
        "##..##...",
        "##..##...",
        "##.......",
        "##.......",
        "##.......",
    ]),
    "ृ": _art([
        "...#....",
        "...#....",
        "...#....",
        ".####...",
        "##..##..",
        "##..##..",
        "##..##..",
        ".####...",
        "...##...",
        "...##...",
        "...#####",
        "...#####",
    ]),
    "्": _art([
        "......#",
        "......#",
        "......#",
        "......#",
        "......#",
        "......#",
        "......#",
        ".....##",
        "....##.",
        "...##..",
        "#####..",
        "####...",
    ]),
}


def descender_neck_col(label: str) -> int:
    return int(np.flatnonzero(DESCENDERS[label][0])[0])


class _Canvas:
    def __init__(self, h, w):
        self.a = np.zeros((h, w), dtype=np.uint8)

    def _dab(self, r, c):
        h, w = self.a.shape
        r = min(max(r, 0), h - STROKE)
        c = min(max(c, 0), w - STROKE)
        self.a[r:r + STROKE, c:c + STROKE] = 1

    def stroke(self, r0, c0, r1, c1):
        rr, cc = _bresenham(r0, c0, r1, c1)
        for r, c in zip(rr.tolist(), cc.tolist()):
            self._dab(r, c)


def _norm32(img):
    from .features import normalize_glyph
    return normalize_glyph(img, 32).astype(bool)


def _random_glyph(rng, width):
    h, w = CORE_H, width
    cv = _Canvas(h, w)
    right = w - STROKE
    if rng.random() < 0.8:
        cv.stroke(0, right, h - 1, right)
        anchor_c = right
    else:
        anchor_c = int(rng.integers(w // 3, right))
        cv.stroke(0, anchor_c, int(rng.integers(h // 2, h)), anchor_c)
    # Keep the top row narrow so header stripping never eats glyph rows.
    n = int(rng.integers(3, 6))
    for _ in range(n):
        kind = rng.choice(["h", "v", "d", "loop", "arc"])
        ys, xs = np.nonzero(cv.a[2:])
        k = int(rng.integers(len(ys)))
        r0, c0 = int(ys[k]) + 2, int(xs[k])
        if kind == "h":
            c1 = int(rng.integers(0, w))
            cv.stroke(r0, c0, r0, c1)
        elif kind == "v":
            r1 = int(rng.integers(2, h))
            cv.stroke(r0, c0, r1, c0)
        elif kind == "d":
            cv.stroke(r0, c0, int(rng.integers(2, h)), int(rng.integers(0, w)))
        elif kind == "loop":
            r1 = min(h - 1, r0 + int(rng.integers(5, 11)))
            c1 = max(0, c0 - int(rng.integers(5, 11)))
            cv.stroke(r0, c0, r0, c1)
            cv.stroke(r0, c1, r1, c1)
            cv.stroke(r1, c1, r1, c0)
            cv.stroke(r1, c0, r0, c0)
        else:
            rm = min(h - 1, r0 + int(rng.integers(4, 9)))
            cm = max(0, c0 - int(rng.integers(4, 10)))
            cv.stroke(r0, c0, rm, cm)
            cv.stroke(rm, cm, min(h - 1, rm + int(rng.integers(3, 8))), c0)
    return cv.a


def _acceptable(g, width):
    if g[0].sum() > 0.6 * width or g[0].sum() == 0:
        return False
    if not g[-1].any() or not g[:, 0].any():
        return False
    return len(cc_label(g, 8)) == 1


def _break_glyph(g):
    """Erase a small patch so the body splits into exactly two parts while
    every column keeps some ink (the twin must stay one character box)."""
    h, w = g.shape
    rows = sorted(range(h - 1), key=lambda r: abs(r - h // 2))
    for dh, dw in ((2, 2), (2, 3), (3, 2), (3, 3), (2, 4), (4, 2), (4, 4)):
        for r in rows:
            for c in range(w - dw + 1):
                patch = g[r:r + dh, c:c + dw]
                if not patch.any():
                    continue
                cut = g.copy()
                cut[r:r + dh, c:c + dw] = 0
                if not cut.any(axis=0).all() or not (cut[0].any() and cut[-1].any()):
                    continue
                cm = cc_label(cut, 8)
                if len(cm) == 2 and min(x.cardinality for x in cm.components) >= 12:
                    return cut
    raise RuntimeError("no clean break found")


def _add_rakar(g):
    """Attach a V-shaped stroke to the body, adding two stroke ends."""
    from .features import count_endpoints
    h, w = g.shape
    base_ends = count_endpoints(g)
    ys, xs = np.nonzero(g)
    order = np.lexsort((xs, -ys))
    for k in order:
        r0, c0 = int(ys[k]), int(xs[k])
        for dr, dc in ((4, -5), (5, -4), (4, 4), (-4, -5), (-5, 5), (6, -3), (3, -6), (6, 3)):
            cv = _Canvas(h, w)
            cv.a = g.copy()
            tip_r, tip_c = r0 + dr, c0 + dc
            if not (0 <= tip_r < h - 1 and 0 <= tip_c < w - 1):
                continue
            cv.stroke(r0, c0, tip_r, tip_c)
            end_r, end_c = tip_r - (dr // abs(dr)) * 4, tip_c + (dc // abs(dc)) * 3
            if not (0 <= end_r < h - 1 and 0 <= end_c < w - 1):
                continue
            cv.stroke(tip_r, tip_c, end_r, end_c)
            out = cv.a
            added = int(out.sum() - g.sum())
            if added < 10 or len(cc_label(out, 8)) != 1:
                continue
            if count_endpoints(out) >= base_ends + 2:
                return out
    raise RuntimeError("no rakar placement found")


@dataclass(frozen=True)
class Font:
    core: dict
    ascenders: dict
    descenders: dict
    rakar: dict

    @property
    def mean_core_width(self) -> float:
        return float(np.mean([g.shape[1] for g in self.core.values()]))


@lru_cache(maxsize=1)
def default_font() -> Font:
    rng = np.random.default_rng(20160823)
    core = {}
    seen = []
    for label in VOWELS + CONSONANTS + SPECIAL_CONJUNCTS:
        if label in [b for _, b in CONFUSION_PAIRS]:
            continue
        while True:
            width = int(rng.integers(14, 23))
            g = _random_glyph(rng, width)
            if not _acceptable(g, width):
                continue
            g = crop_to_content(g)
            n = _norm32(g)
            if all(np.count_nonzero(n ^ s) >= 140 for s in seen):
                break
        core[label] = g
        seen.append(n)
    for a, b in CONFUSION_PAIRS:
        core[b] = _break_glyph(core[a])
    core[AA_SIGN] = np.ones((CORE_H, STROKE), dtype=np.uint8)
    vis = np.zeros((14, 4), dtype=np.uint8)
    vis[0:4] = 1
    vis[10:14] = 1
    core[VISARGA] = vis
    core = {k: core[k] for k in CORE_LABELS}
    rakar = {}
    for base in RAKAR_CANDIDATES:
        try:
            rakar[base + "्र"] = _add_rakar(core[base])
        except RuntimeError:
            continue
        if len(rakar) == N_RAKAR:
            break
    return Font(core, dict(ASCENDERS), dict(DESCENDERS), rakar)


def font_entries(font: Font):
    """(glyph, label, class, source) tuples for every glyph in ``font``."""
    out = [(g, k, "core", f"core_{i:03d}.pbm") for i, (k, g) in enumerate(font.core.items())]
    n = len(out)
    out += [(g, k, "core", f"core_{n + i:03d}.pbm") for i, (k, g) in enumerate(font.rakar.items())]
    out += [(g, k, "ascender", f"asc_{i:03d}.pbm") for i, (k, g) in enumerate(font.ascenders.items())]
    out += [(g, k, "descender", f"desc_{i:03d}.pbm")
            for i, (k, g) in enumerate(font.descenders.items())]
    return out


def font_rules(font: Font) -> dict:
    return {
        "confusion_pairs": [list(p) for p in CONFUSION_PAIRS
                            if p[0] in font.core and p[1] in font.core],
        "rakar": [[comp[:-2], comp] for comp in font.rakar],
    }


def write_glyph_dir(out_dir, font: Font | None = None):
    """Export a font as a glyph directory that the ingester accepts."""
    import json
    from pathlib import Path

    from .pnm import write_pbm

    font = font or default_font()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for g, label, cls, name in font_entries(font):
        write_pbm(out / name, g)
        rows.append(f"{name}\t{label}\t{cls}")
    (out / "labels.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    (out / "rules.json").write_text(
        json.dumps(font_rules(font), ensure_ascii=False, indent=1, sort_keys=True) + "\n",
        encoding="utf-8")
    return out
