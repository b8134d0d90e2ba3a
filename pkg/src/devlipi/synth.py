"""Synthetic Devanagari-like pages with exact ground truth.

Pages are assembled from a glyph set (the default procedural font or any
ingested glyph directory) following the three-strip layout: ascenders sit
on the header line, core glyphs hang from it, descenders hang below the
core.  Composite characters (touching conjuncts and shadow pairs), joined
and detached descenders, overlapping lines and rotation are optional.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields

import numpy as np
from scipy import ndimage as ndi

from . import font as F
from . import morphology
from .raster import cc_label, rotate

GEN_VERSION = 1
VOWEL_ASC = ("े", "ै")
NASAL_ASC = ("ं", "ँ")
INK, PAPER = 40, 215


@dataclass
class SynthSpec:
    lines: int = 3
    words_per_line: tuple = (0, 0)  # (0, 0) fills each line to the block width
    glyphs_per_word: tuple = (2, 5)
    skew: float = 0.0
    overlap: bool = False
    composites: int = 0
    shadows: int = 0
    ascenders: float = 0.0
    descenders: float = 0.0
    detached: float = 0.0
    aa: float = 0.0
    visarga: float = 0.0
    width: int = 1000
    height: int = 800
    gray: bool = False
    seed: int = 0
    line_gap: int = 20
    word_gap: int = 10
    glyph_gap: int = 3
    block_width: int = 0

    @classmethod
    def from_text(cls, text: str) -> "SynthSpec":
        """Parse ``key = value`` lines; ranges are written ``lo, hi``."""
        cp = configparser.ConfigParser()
        cp.read_string("[spec]\n" + text)
        kw = {}
        types = {f.name: f.type for f in fields(cls)}
        for key, raw in cp["spec"].items():
            if key not in types:
                raise ValueError(f"unknown generator key: {key}")
            t = types[key]
            if t == "tuple":
                kw[key] = tuple(int(v) for v in raw.split(","))
            elif t == "bool":
                kw[key] = cp["spec"].getboolean(key)
            elif t == "int":
                kw[key] = int(raw)
            else:
                kw[key] = float(raw)
        return cls(**kw)


@dataclass
class SynthPage:
    image: np.ndarray
    binary: np.ndarray
    manifest: dict
    line_map: np.ndarray = field(repr=False)


@dataclass
class _Unit:
    kind: str  # char | aa | visarga | conjunct | shadow
    labels: list
    asc: str | None = None
    desc: str | None = None
    detached: bool = False
    ov: int = 0
    bridge_row: int = 0
    x: int = 0

    def text(self):
        if self.kind == "char":
            return self.labels[0] + (self.desc or "") + (self.asc or "")
        return "".join(self.labels)


# ------------------------------------------------------------- glyph helpers

def _core_set(font):
    return {**font.core, **font.rakar}


def _twins(font):
    return {b for _, b in F.CONFUSION_PAIRS if b in font.core}


def _base_labels(font):
    """Labels that may stand as an ordinary character."""
    skip = {F.AA_SIGN, F.VISARGA}
    return [k for k in _core_set(font) if k not in skip]


def _consonant_like(label):
    return label[0] in F.CONSONANTS


def neck_offset(glyph, desc_art):
    """Left offset placing a joined descender's neck on the glyph's bottom
    row inside the glyph's columns, or None."""
    neck = int(np.flatnonzero(desc_art[0])[0])
    w, wd = glyph.shape[1], desc_art.shape[1]
    for c in np.flatnonzero(glyph[-1]):
        left = int(c) - neck
        if 0 <= left and left + wd <= w:
            return left
    return None


def bridge_row(a, b):
    """Row for a single pixel joining the right column of ``a`` to the left
    column of ``b`` across a one-column gap, or None."""
    ra = np.flatnonzero(a[:, -1])
    rb = set(np.flatnonzero(b[:, 0]).tolist())
    for r in ra.tolist():
        if {r - 1, r, r + 1} & rb:
            return r
    return None


def _chebyshev_clear(a, b, ov, dist=4):
    """True when ``b`` placed ``ov`` columns into ``a`` stays ``dist`` px away."""
    h = max(a.shape[0], b.shape[0])
    w = a.shape[1] + b.shape[1] - ov
    pad = dist
    P = np.zeros((h + 2 * pad, w + 2 * pad), dtype=bool)
    Q = np.zeros_like(P)
    P[pad:pad + a.shape[0], pad:pad + a.shape[1]] = a
    x = pad + a.shape[1] - ov
    Q[pad:pad + b.shape[0], x:x + b.shape[1]] = b
    grown = ndi.binary_dilation(P, np.ones((2 * dist - 1, 2 * dist - 1), dtype=bool))
    return not (grown & Q).any()


_PAIR_CACHE: dict = {}


def shadow_pairs(font, min_ov=1, max_ov=8):
    """All (a, b, ov) with overlapping boxes and disjoint, well separated ink."""
    key = (id(font), min_ov, max_ov)
    if key not in _PAIR_CACHE:
        _PAIR_CACHE[key] = (font, _shadow_pairs(font, min_ov, max_ov))
    return _PAIR_CACHE[key][1]


def _shadow_pairs(font, min_ov, max_ov):
    core = _core_set(font)
    labs = [k for k in _base_labels(font) if k not in _twins(font) and k in F.CORE_LABELS]
    out = []
    for a in labs:
        for b in labs:
            if a == b:
                continue
            for ov in range(min_ov, max_ov + 1):
                if ov >= min(core[a].shape[1], core[b].shape[1]):
                    break
                if _chebyshev_clear(core[a], core[b], ov):
                    out.append((a, b, ov))
    return out


# ------------------------------------------------------------- fixtures

def conjunct_image(a, b, row):
    """Glyphs ``a`` and ``b`` joined by one pixel in the column between them."""
    h = max(a.shape[0], b.shape[0])
    out = np.zeros((h, a.shape[1] + 1 + b.shape[1]), dtype=np.uint8)
    out[:a.shape[0], :a.shape[1]] = a
    out[:b.shape[0], a.shape[1] + 1:] = b
    out[row, a.shape[1]] = 1
    return out


def shadow_image(a, b, ov):
    """Return (image, mask_a, mask_b) for ``b`` tucked ``ov`` columns under ``a``."""
    h = max(a.shape[0], b.shape[0])
    w = a.shape[1] + b.shape[1] - ov
    ma = np.zeros((h, w), dtype=np.uint8)
    mb = np.zeros((h, w), dtype=np.uint8)
    ma[:a.shape[0], :a.shape[1]] = a
    mb[:b.shape[0], a.shape[1] - ov:] = b
    return ma | mb, ma, mb


def break_stroke(glyph, rng, gap=2):
    """Erase a ``gap``-row slice of a vertical stroke; a 3x3 closing must
    bridge it again.  Returns None when no suitable slice exists."""
    h, w = glyph.shape
    sq = morphology.square(3)
    rows = rng.permutation(np.arange(3, h - 3 - gap))
    for r in rows.tolist():
        for c in rng.permutation(np.arange(w - 1)).tolist():
            patch = glyph[r:r + gap, c:c + 2]
            if not patch.all():
                continue
            if c + 2 < w and glyph[r:r + gap, c + 2].any():
                continue
            if c > 0 and glyph[r:r + gap, c - 1].any():
                continue
            cut = glyph.copy()
            cut[r:r + gap, c:c + 2] = 0
            if len(cc_label(cut, 8)) < 2:
                continue
            if len(cc_label(morphology.close(cut, sq), 8)) == 1:
                return cut
    return None


# ------------------------------------------------------------- page planning

def _box_width(unit, core):
    w = core[unit.labels[0]].shape[1]
    if unit.kind == "conjunct":
        return w + 1 + core[unit.labels[1]].shape[1]
    if unit.kind == "shadow":
        return w + core[unit.labels[1]].shape[1] - unit.ov
    return w


def _box_dims(unit, core, font):
    """Width and height of the character box the segmenter will first see."""
    w = _box_width(unit, core)
    if unit.kind in ("conjunct", "shadow"):
        return w, F.CORE_H
    h = core[unit.labels[0]].shape[0]
    if unit.desc:
        h = F.CORE_H + (2 if unit.detached else 0) + font.descenders[unit.desc].shape[0]
    return w, h


def _stats(words, core, font):
    dims = [_box_dims(u, core, font) for w in words for u in w]
    wd = float(np.mean([d[0] for d in dims]))
    ht = float(np.mean([d[1] for d in dims]))
    return wd, ht


def _plan_ok(lines, core, font, margin=0.15, wreg=0.2, dreg=0.10,
             ch=0.67, dh=0.33):
    words = [w for L in lines for w in L]
    if not words:
        return True
    wd, ht = _stats(words, core, font)
    thresh_ht = (1 + margin) * ht
    for w in words:
        for u in w:
            bw, bh = _box_dims(u, core, font)
            if u.kind in ("conjunct", "shadow"):
                if not 2 * wd <= bw <= 3 * wd:
                    return False
                if u.kind == "conjunct":
                    cut = core[u.labels[0]].shape[1]
                    lo = max(1, math.ceil(wd - wreg * wd))
                    hi = math.floor(wd + wreg * wd)
                    if not lo <= cut <= hi:
                        return False
            elif bw >= 2 * wd:
                return False
            if u.desc:
                if bh <= thresh_ht:
                    return False
                if not u.detached:
                    anchor = bh * ch / (ch + dh)
                    lo = math.ceil(anchor * (1 - dreg))
                    hi = math.floor(anchor * (1 + dreg))
                    if not lo <= F.CORE_H <= hi:
                        return False
            elif bh > thresh_ht:
                return False
    return True


def _pick_units(spec, rng, font, n_glyphs):
    base = _base_labels(font)
    units = []
    for i in range(n_glyphs):
        lab = base[int(rng.integers(len(base)))]
        units.append(_Unit("char", [lab]))
        if _consonant_like(lab) and rng.random() < spec.aa and i < n_glyphs - 1:
            units.append(_Unit("aa", [F.AA_SIGN]))
    if rng.random() < spec.visarga:
        units.append(_Unit("visarga", [F.VISARGA]))
    return units


def _assign_modifiers(spec, rng, font, u, nxt):
    core = _core_set(font)
    g = core[u.labels[0]]
    lab = u.labels[0]
    if not _consonant_like(lab):
        return
    followed_by_aa = nxt is not None and nxt.kind == "aa"
    if rng.random() < spec.descenders and lab not in _twins(font) and not followed_by_aa:
        d = list(font.descenders)[int(rng.integers(len(font.descenders)))]
        if neck_offset(g, font.descenders[d]) is not None:
            u.desc = d
            u.detached = bool(rng.random() < spec.detached)
    if rng.random() < spec.ascenders and not followed_by_aa:
        pool = NASAL_ASC if u.desc else VOWEL_ASC + NASAL_ASC
        if u.desc == "्":
            pool = ()
        pool = [a for a in pool if a in font.ascenders and font.ascenders[a].shape[1] <= g.shape[1]]
        if pool:
            u.asc = pool[int(rng.integers(len(pool)))]


def _layout(lines, core, spec):
    """Assign x positions; returns the block width actually used."""
    widest = 0
    for L in lines:
        x = 0
        for w in L:
            for u in w:
                u.x = x
                x += _box_width(u, core) + spec.glyph_gap
            x += spec.word_gap - spec.glyph_gap
        widest = max(widest, x - spec.word_gap)
    return widest


def _line_pitch(spec):
    if spec.overlap:
        return F.HEADER_T + F.CORE_H + F.DESC_H + 3
    return F.ASC_H + F.HEADER_T + F.CORE_H + F.DESC_H + 2 + spec.line_gap


def _block_limits(spec):
    pitch = _line_pitch(spec)
    block_h = (spec.lines - 1) * pitch + F.ASC_H + F.HEADER_T + F.CORE_H + F.DESC_H + 2
    return spec.block_width or spec.width - 80, block_h


def _plan(spec, rng, font):
    core = _core_set(font)
    max_w, _ = _block_limits(spec)
    lines = []
    for _ in range(spec.lines):
        fill = spec.words_per_line == (0, 0)
        n_words = 10_000 if fill else int(rng.integers(spec.words_per_line[0],
                                                       spec.words_per_line[1] + 1))
        line = []
        x = 0
        for _ in range(n_words):
            n = int(rng.integers(spec.glyphs_per_word[0], spec.glyphs_per_word[1] + 1))
            word = _pick_units(spec, rng, font, n)
            ww = sum(core[u.labels[0]].shape[1] + spec.glyph_gap for u in word) - spec.glyph_gap
            # leave room for composites inserted later
            if x + ww + 60 > max_w and line:
                break
            line.append(word)
            x += ww + spec.word_gap
        lines.append(line)

    slots = [(i, j) for i, L in enumerate(lines) for j in range(len(L))]
    pairs = shadow_pairs(font) if spec.shadows else []
    for kind, count in (("conjunct", spec.composites), ("shadow", spec.shadows)):
        for _ in range(count):
            i, j = slots[int(rng.integers(len(slots)))]
            word = lines[i][j]
            pos = int(rng.integers(len(word) + 1))
            if kind == "conjunct":
                cons = [k for k in F.CONSONANTS if k in core and k not in _twins(font)]
                for _ in range(200):
                    a = cons[int(rng.integers(len(cons)))]
                    b = cons[int(rng.integers(len(cons)))]
                    r = bridge_row(core[a], core[b])
                    if r is not None and abs(core[a].shape[1] - font.mean_core_width) <= 2:
                        break
                word.insert(pos, _Unit("conjunct", [a, b], bridge_row=r))
            else:
                a, b, ov = pairs[int(rng.integers(len(pairs)))]
                word.insert(pos, _Unit("shadow", [a, b], ov=ov))

    for L in lines:
        for w in L:
            for k, u in enumerate(w):
                if u.kind == "char":
                    _assign_modifiers(spec, rng, font, u, w[k + 1] if k + 1 < len(w) else None)
    return lines


def _overlap_fix(lines, font, spec):
    """Make every line except the last carry a joined descender and every line
    except the first an ascender, keeping their columns apart."""
    core = _core_set(font)
    for L in lines:
        for w in L:
            for u in w:
                u.detached = False
    for i in range(len(lines) - 1):
        chars = [u for w in lines[i] for u in w if u.kind == "char" and _consonant_like(u.labels[0])
                 and u.labels[0] not in _twins(font)]
        if not any(u.desc for u in chars):
            for u in chars:
                if neck_offset(core[u.labels[0]], font.descenders["ु"]) is not None:
                    u.desc = "ु"
                    if u.asc in VOWEL_ASC:
                        u.asc = None
                    break
    for i in range(1, len(lines)):
        descs = []
        for w in lines[i - 1]:
            for u in w:
                if u.desc:
                    descs.append((u.x - 2, u.x + core[u.labels[0]].shape[1] + 2))
        chars = [u for w in lines[i] for u in w if u.kind == "char"]
        for u in chars:
            if u.asc:
                lo, hi = u.x, u.x + core[u.labels[0]].shape[1]
                if any(lo < b and a < hi for a, b in descs):
                    u.asc = None
        if not any(u.asc for u in chars):
            for u in chars:
                g = core[u.labels[0]]
                lo, hi = u.x, u.x + g.shape[1]
                if any(lo < b and a < hi for a, b in descs):
                    continue
                if _consonant_like(u.labels[0]) and font.ascenders["ं"].shape[1] <= g.shape[1]:
                    u.asc = "ं"
                    break


# ------------------------------------------------------------- rendering

def _blit(canvas, img, top, left, lmap=None, line=0):
    h, w = img.shape
    region = canvas[top:top + h, left:left + w]
    region |= img.astype(canvas.dtype)
    if lmap is not None:
        lmap[top:top + h, left:left + w][img.astype(bool)] = line


def _bbox(top, left, h, w):
    return [int(top), int(top + h - 1), int(left), int(left + w - 1)]


def _render(lines, spec, font, canvas, lmap, y0, x0):
    core = _core_set(font)
    pitch = _line_pitch(spec)
    man_lines, composites, descenders = [], [], []
    for i, L in enumerate(lines):
        y = y0 + F.ASC_H + i * pitch  # header top
        top_core = y + F.HEADER_T
        mwords = []
        for j, w in enumerate(L):
            left = x0 + w[0].x
            right = x0 + w[-1].x + _box_width(w[-1], core) - 1
            canvas[y:y + F.HEADER_T, left:right + 1] = 1
            lmap[y:y + F.HEADER_T, left:right + 1] = i + 1
            chars = []
            for u in w:
                ux = x0 + u.x
                if u.kind in ("char", "aa"):
                    g = core[u.labels[0]]
                    _blit(canvas, g, top_core, ux, lmap, i + 1)
                    mods = []
                    if u.asc:
                        a = font.ascenders[u.asc]
                        ax = ux + g.shape[1] - a.shape[1]
                        _blit(canvas, a, y - a.shape[0], ax, lmap, i + 1)
                        mods.append({"label": u.asc, "strip": "ascender",
                                     "bbox": _bbox(y - a.shape[0], ax, *a.shape)})
                    if u.desc:
                        d = font.descenders[u.desc]
                        dx = ux + neck_offset(g, d)
                        dy = top_core + g.shape[0] + (2 if u.detached else 0)
                        _blit(canvas, d, dy, dx, lmap, i + 1)
                        mods.append({"label": u.desc, "strip": "descender",
                                     "bbox": _bbox(dy, dx, *d.shape)})
                        descenders.append({
                            "label": u.labels[0], "modifier": u.desc,
                            "bbox": [top_core, dy + d.shape[0] - 1, ux, ux + g.shape[1] - 1],
                            "seg_row": int(g.shape[0]), "detached": bool(u.detached),
                        })
                    chars.append({"label": u.labels[0], "bbox": _bbox(top_core, ux, *g.shape),
                                  "modifiers": mods})
                elif u.kind == "visarga":
                    g = core[F.VISARGA]
                    vy = top_core + (F.CORE_H - g.shape[0]) // 2
                    _blit(canvas, g, vy, ux, lmap, i + 1)
                    chars.append({"label": F.VISARGA, "bbox": _bbox(vy, ux, *g.shape),
                                  "modifiers": []})
                else:
                    a, b = core[u.labels[0]], core[u.labels[1]]
                    if u.kind == "conjunct":
                        img = conjunct_image(a, b, u.bridge_row)
                        bx = ux + a.shape[1] + 1
                        cut = a.shape[1]
                    else:
                        img, _, _ = shadow_image(a, b, u.ov)
                        bx = ux + a.shape[1] - u.ov
                        cut = None
                    _blit(canvas, img, top_core, ux, lmap, i + 1)
                    chars.append({"label": u.labels[0], "bbox": _bbox(top_core, ux, *a.shape),
                                  "modifiers": []})
                    chars.append({"label": u.labels[1], "bbox": _bbox(top_core, bx, *b.shape),
                                  "modifiers": []})
                    composites.append({"kind": u.kind, "labels": list(u.labels),
                                       "bbox": _bbox(top_core, ux, *img.shape),
                                       "cut_col": cut, "overlap": int(u.ov)})
            mwords.append({"bbox": [y, top_core + F.CORE_H - 1, left, right],
                           "header_rows": [y, y + F.HEADER_T - 1],
                           "text": "".join(u.text() for u in w), "chars": chars})
        rows = np.flatnonzero((lmap == i + 1).any(axis=1))
        man_lines.append({"top": int(rows[0]), "bottom": int(rows[-1]), "header_top": int(y),
                          "words": mwords})
    return man_lines, composites, descenders


def to_gray(binary, rng, ink=INK, paper=PAPER, spread=8):
    """Two-mode gray rendering; the modes never meet."""
    noise = rng.normal(0.0, spread, binary.shape)
    noise = np.clip(noise, -3 * spread, 3 * spread)
    base = np.where(binary.astype(bool), ink, paper).astype(np.float64)
    return np.clip(np.rint(base + noise), 0, 255).astype(np.uint8)


def gen_synthetic(spec: SynthSpec, font=None) -> SynthPage:
    font = font or F.default_font()
    core = _core_set(font)
    rng = np.random.default_rng(spec.seed)
    for _ in range(200):
        lines = _plan(spec, rng, font)
        width = _layout(lines, core, spec)
        if spec.overlap:
            _overlap_fix(lines, font, spec)
        max_w, block_h = _block_limits(spec)
        if width <= max_w and _plan_ok(lines, core, font):
            break
    else:
        raise RuntimeError("could not satisfy the page specification")

    H, W = spec.height, spec.width
    canvas = np.zeros((H, W), dtype=np.uint8)
    lmap = np.zeros((H, W), dtype=np.int32)
    y0 = (H - block_h) // 2
    x0 = (W - width) // 2
    man_lines, composites, descenders = _render(lines, spec, font, canvas, lmap, y0, x0)

    binary = canvas
    if spec.skew % 360:
        # The canvas grows so no rotated text leaves the frame.
        binary = rotate(canvas, float(spec.skew))
    image = to_gray(binary, rng) if spec.gray else binary
    text = "\n".join(" ".join(w["text"] for w in L["words"]) for L in man_lines)
    manifest = {
        "version": GEN_VERSION,
        "width": W, "height": H,
        "skew": float(spec.skew), "seed": int(spec.seed),
        "overlap": bool(spec.overlap),
        "lines": man_lines,
        "composites": composites,
        "descenders": descenders,
        "text": text,
    }
    return SynthPage(image, binary, manifest, lmap)
