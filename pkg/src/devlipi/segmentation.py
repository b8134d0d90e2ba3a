"""Page decomposition: lines (plain and overlapping), words, header-line
removal, character boxes, and the descender / conjunct / shadow splitters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import morphology
from .errors import NoBoxes, SingleComponent
from .raster import BoundingBox, cc_label, h_projection, v_projection


@dataclass(frozen=True)
class SegConfig:
    min_card: int = 10
    header_band: float = 0.9
    header_edge: float = 0.4
    ch_ratio: float = 0.67
    dh_ratio: float = 0.33
    height_margin: float = 0.15
    descender_region: float = 0.10
    conjunct_region: float = 0.20
    shadow_se: int = 3
    line_overlap: float = 0.5


@dataclass(frozen=True)
class LineImage:
    """One text line; ``image`` covers page rows ``top..bottom`` at full width."""

    image: np.ndarray
    top: int
    bottom: int


@dataclass(frozen=True)
class WordImage:
    image: np.ndarray
    header_rows: tuple
    body: np.ndarray
    origin: tuple = (0, 0)


@dataclass(frozen=True)
class CharBox:
    image: np.ndarray
    strip: str  # "ascender" | "core" | "descender"
    bbox: BoundingBox
    flags: frozenset = field(default_factory=frozenset)

    @property
    def height(self) -> int:
        return self.image.shape[0]

    @property
    def width(self) -> int:
        return self.image.shape[1]

    def with_flags(self, *add, drop=()):
        return replace(self, flags=(self.flags | set(add)) - set(drop))


@dataclass(frozen=True)
class PageStats:
    avg_ht: float
    avg_wd: float
    thresh_ht: float
    thresh_wd_2: tuple
    thresh_wd_3: float


def _runs(mask):
    """(start, stop) pairs of maximal True runs in a 1-D mask."""
    m = np.concatenate([[False], np.asarray(mask, dtype=bool), [False]])
    d = np.flatnonzero(np.diff(m.astype(np.int8)))
    return list(zip(d[::2].tolist(), d[1::2].tolist()))


def _box_from(img, top, left, strip, flags=()):
    """Tighten ``img`` to its content and record page coordinates."""
    rows = np.flatnonzero(img.any(axis=1))
    cols = np.flatnonzero(img.any(axis=0))
    r0, r1, c0, c1 = rows[0], rows[-1], cols[0], cols[-1]
    crop = np.ascontiguousarray(img[r0:r1 + 1, c0:c1 + 1])
    bbox = BoundingBox(int(top + r0), int(top + r1), int(left + c0), int(left + c1))
    return CharBox(crop, strip, bbox, frozenset(flags))


# ---------------------------------------------------------------- lines

def segment_lines(page) -> list:
    page = np.asarray(page, dtype=np.uint8)
    out = []
    for a, b in _runs(h_projection(page) > 0):
        out.append(LineImage(page[a:b].copy(), a, b - 1))
    return out


def drop_small_components(page, min_card: int = 10) -> np.ndarray:
    cm = cc_label(page, 8)
    out = np.asarray(page, dtype=np.uint8).copy()
    for comp in cm.components:
        if comp.cardinality < min_card:
            out[comp.pixels[:, 0], comp.pixels[:, 1]] = 0
    return out


def _header_groups(cleaned, overlap=0.5):
    """Find the header row band of every text line.

    Repeatedly takes the rows of maximal horizontal projection among the
    pixels not yet claimed, and claims every component crossing them.  Bands
    whose claimed components sit at the same height as an earlier band are
    folded into it, so one tilted line does not count twice.
    """
    cm = cc_label(cleaned, 8)
    labels = cm.labels
    remaining = np.asarray(cleaned, dtype=bool).copy()
    groups = []
    while remaining.any():
        hp = remaining.sum(axis=1)
        peak = hp == hp.max()
        # equal peaks on separate lines are separate bands
        for a, b in _runs(peak):
            rows = np.arange(a, b)
            ids = np.unique(labels[rows][remaining[rows]])
            if ids.size == 0:
                continue
            boxes = [cm.components[i - 1].bbox for i in ids]
            top = min(bx.top for bx in boxes)
            bottom = max(bx.bottom for bx in boxes)
            remaining[np.isin(labels, ids)] = False
            groups.append({"rows": rows, "ids": set(ids.tolist()), "top": top,
                           "bottom": bottom})

    lines = []
    for g in groups:
        h = g["bottom"] - g["top"] + 1
        best, best_ov = None, 0.0
        for L in lines:
            ov = min(g["bottom"], L["bottom"]) - max(g["top"], L["top"]) + 1
            hl = L["bottom"] - L["top"] + 1
            frac = ov / min(h, hl) if ov > 0 else 0.0
            if frac >= overlap and frac > best_ov:
                best, best_ov = L, frac
        if best is None:
            lines.append(dict(g))
        else:
            best["ids"] |= g["ids"]
            best["top"] = min(best["top"], g["top"])
            best["bottom"] = max(best["bottom"], g["bottom"])

    # Short bands (detached marks) are not lines; they are re-attached later.
    if lines:
        tallest = max(L["bottom"] - L["top"] + 1 for L in lines)
        lines = [L for L in lines if L["bottom"] - L["top"] + 1 >= 0.5 * tallest]
    # the founding band's rows; folded bands only widen the extent
    return [L["rows"] for L in lines]


def bridge_lines(cleaned, overlap: float = 0.5) -> np.ndarray:
    """Fill each line's header rows across the full width so that all words
    of a line fuse into a single 8-connected component."""
    out = np.asarray(cleaned, dtype=np.uint8).copy()
    for rows in _header_groups(cleaned, overlap):
        out[rows, :] = 1
    return out


def _nearest_line(box, header_bands):
    best, best_d = 0, math.inf
    for i, rows in enumerate(header_bands):
        lo, hi = int(rows.min()), int(rows.max())
        if box.bottom < lo:
            d = lo - box.bottom
        elif box.top > hi:
            d = box.top - hi
        else:
            d = 0
        if d < best_d:
            best, best_d = i, d
    return best


def split_overlapping_lines(page, min_card: int = 10, overlap: float = 0.5) -> list:
    """Separate lines whose bands share rows, keeping every pixel.

    Each bridged component that owns a header band is one line; its pixels
    are recovered by subtracting the image with that component removed.
    Components without a header band, including those dropped as too small,
    join the line whose header band is vertically nearest.
    """
    page = np.asarray(page, dtype=np.uint8)
    if not page.any():
        return []
    cleaned = drop_small_components(page, min_card)
    bands = _header_groups(cleaned, overlap) if cleaned.any() else []
    if not bands:
        return [LineImage(page.copy(), 0, page.shape[0] - 1)]
    bridged = cleaned.copy()
    for rows in bands:
        bridged[rows, :] = 1
    bl = cc_label(bridged, 8).labels
    band_label = [int(bl[rows[0], 0]) for rows in bands]

    owner = np.full(bl.max() + 1, -1, dtype=np.int64)
    for i, lab in enumerate(band_label):
        if owner[lab] == -1:
            owner[lab] = i
    masks = [np.zeros(page.shape, dtype=bool) for _ in bands]
    fg = page.astype(bool)
    for lab in range(1, bl.max() + 1):
        i = owner[lab]
        if i >= 0:
            # I_ncc with this component zeroed, subtracted from the bridged image.
            zeroed = bridged.copy()
            zeroed[bl == lab] = 0
            masks[i] |= ((bridged - zeroed) > 0) & fg
    claimed = np.logical_or.reduce(masks)
    rest = cc_label((fg & ~claimed).astype(np.uint8), 8)
    for comp in rest.components:
        i = _nearest_line(comp.bbox, bands)
        masks[i][comp.pixels[:, 0], comp.pixels[:, 1]] = True

    out = []
    for m in masks:
        rows = np.flatnonzero(m.any(axis=1))
        if rows.size == 0:
            continue
        a, b = int(rows[0]), int(rows[-1])
        out.append(LineImage(m[a:b + 1].astype(np.uint8), a, b))
    out.sort(key=lambda L: L.top)
    return out


# ---------------------------------------------------------------- words

def strip_header(word, band: float = 0.9, origin=(0, 0), edge: float = 0.0) -> WordImage:
    """Locate the header line as the contiguous band of rows around the
    projection peak whose counts reach ``band`` times the peak, and zero it.

    With ``edge`` > 0 one more row on either side joins the band when its
    count reaches ``edge`` times the peak; this absorbs the ragged rims a
    resampled header line picks up.
    """
    w = np.asarray(word, dtype=np.uint8)
    hp = h_projection(w)
    m = int(np.argmax(hp))
    rows = [m]
    if w.shape[0] >= 3 and hp[m] > 0:
        lim = band * hp[m]
        a = m
        while a - 1 >= 0 and hp[a - 1] >= lim:
            a -= 1
        b = m
        while b + 1 < len(hp) and hp[b + 1] >= lim:
            b += 1
        if edge > 0:
            if a - 1 >= 0 and hp[a - 1] >= edge * hp[m]:
                a -= 1
            if b + 1 < len(hp) and hp[b + 1] >= edge * hp[m]:
                b += 1
        rows = list(range(a, b + 1))
    body = w.copy()
    body[rows, :] = 0
    return WordImage(w, tuple(rows), body, tuple(origin))


def segment_words(line: LineImage, band: float = 0.9, edge: float = 0.0) -> list:
    img = line.image
    out = []
    for a, b in _runs(v_projection(img) > 0):
        crop = img[:, a:b]
        rows = np.flatnonzero(crop.any(axis=1))
        r0, r1 = rows[0], rows[-1]
        out.append(strip_header(crop[r0:r1 + 1], band, (line.top + r0, a), edge))
    return out


def split_characters(word: WordImage) -> list:
    """Cut the header-free body at empty columns, then separate the strip
    above the header from the rest of each column group."""
    body = word.body
    top0, left0 = word.origin
    header_top = min(word.header_rows)
    boxes = []
    for a, b in _runs(v_projection(body) > 0):
        sub = body[:, a:b]
        asc = np.zeros_like(sub)
        core = np.zeros_like(sub)
        for r0, r1 in _runs(h_projection(sub) > 0):
            if r1 - 1 < header_top:
                asc[r0:r1] = sub[r0:r1]
            else:
                core[r0:r1] = sub[r0:r1]
        if core.any():
            boxes.append(_box_from(core, top0, left0 + a, "core"))
        if asc.any():
            boxes.append(_box_from(asc, top0, left0 + a, "ascender"))
    return boxes


# ---------------------------------------------------------------- statistics

def compute_stats(boxes, cfg: SegConfig = SegConfig()) -> PageStats:
    core = [b for b in boxes if b.strip == "core"]
    if not core:
        raise NoBoxes("no core character boxes")
    ht = float(np.mean([b.height for b in core]))
    wd = float(np.mean([b.width for b in core]))
    return PageStats(
        avg_ht=ht,
        avg_wd=wd,
        thresh_ht=(1.0 + cfg.height_margin) * ht,
        thresh_wd_2=(2.0 * wd, 3.0 * wd),
        thresh_wd_3=3.0 * wd,
    )


def needs_descender_split(box: CharBox, stats: PageStats) -> bool:
    return box.strip == "core" and box.height > stats.thresh_ht


# ---------------------------------------------------------------- descenders

def descender_region(height: int, cfg: SegConfig = SegConfig()):
    """Rows searched for the waist: the core/descender anchor row +- margin."""
    anchor = height * cfg.ch_ratio / (cfg.ch_ratio + cfg.dh_ratio)
    lo = max(1, math.ceil(anchor * (1 - cfg.descender_region)))
    hi = min(height - 1, math.floor(anchor * (1 + cfg.descender_region)))
    return lo, hi


def descender_cut(img, stats: PageStats, cfg: SegConfig = SegConfig()):
    """Return (row, kind) where ``kind`` is "gap" or "waist".

    A gap is an empty row below the upper half of the average core height.
    Otherwise the row inside the region with the narrowest extent between
    its leftmost and rightmost pixel is the cut.
    """
    img = np.asarray(img)
    H = img.shape[0]
    hp = h_projection(img)
    start = max(1, int(0.5 * stats.avg_ht))
    empty = np.flatnonzero(hp[start:] == 0)
    if empty.size:
        return start + int(empty[0]), "gap"
    lo, hi = descender_region(H, cfg)
    best, best_w = None, None
    for x in range(lo, hi + 1):
        cols = np.flatnonzero(img[x])
        if cols.size == 0:
            return x, "gap"
        w = int(cols[-1] - cols[0])
        if best_w is None or w < best_w:
            best, best_w = x, w
    return best, "waist"


def split_descender(box: CharBox, stats: PageStats, cfg: SegConfig = SegConfig()):
    row, _ = descender_cut(box.image, stats, cfg)
    if row is None:
        return box, None
    upper = box.image[:row]
    lower = box.image[row:]
    if not upper.any() or not lower.any():
        return box, None
    core = _box_from(upper, box.bbox.top, box.bbox.left, "core", box.flags)
    mod = _box_from(lower, box.bbox.top + row, box.bbox.left, "descender")
    return core, mod


# ---------------------------------------------------------------- composites

def flag_composites(box: CharBox, stats: PageStats) -> CharBox:
    w = box.width
    lo, hi = stats.thresh_wd_2
    if lo <= w <= hi:
        return box.with_flags("composite_2")
    if w > stats.thresh_wd_3:
        return box.with_flags("composite_3")
    return box


def conjunct_region(centre: float, avg_wd: float, width: int, frac: float = 0.2):
    lo = max(1, math.ceil(centre - frac * avg_wd))
    hi = min(width - 1, math.floor(centre + frac * avg_wd))
    return lo, hi


def conjunct_cut(img, lo: int, hi: int):
    """Column in [lo, hi] with the smallest top-to-bottom pixel extent, or
    None when no column there holds foreground."""
    img = np.asarray(img)
    best, best_h = None, None
    for y in range(lo, hi + 1):
        rows = np.flatnonzero(img[:, y])
        if rows.size == 0:
            continue
        h = int(rows[-1] - rows[0])
        if best_h is None or h < best_h:
            best, best_h = y, h
    return best


def split_conjunct(box: CharBox, stats: PageStats, cfg: SegConfig = SegConfig()) -> list:
    img = box.image
    W = img.shape[1]
    cuts = []
    c1 = conjunct_cut(img, *conjunct_region(stats.avg_wd, stats.avg_wd, W, cfg.conjunct_region))
    if c1 is None:
        return [box.with_flags("unresolved")]
    cuts.append(c1)
    if "composite_3" in box.flags:
        c2 = conjunct_cut(img, *conjunct_region(2 * stats.avg_wd, stats.avg_wd, W,
                                                cfg.conjunct_region))
        if c2 is None or c2 <= c1:
            return [box.with_flags("unresolved")]
        cuts.append(c2)
    parts = []
    edges = [0] + cuts + [W]
    for a, b in zip(edges[:-1], edges[1:]):
        piece = np.zeros_like(img)
        piece[:, a:b] = img[:, a:b]
        if piece.any():
            parts.append(_box_from(piece, box.bbox.top, box.bbox.left, box.strip))
    return parts


def split_shadow(box: CharBox, se_side: int = 3) -> list:
    """Separate characters whose boxes overlap but whose strokes do not.

    Small breaks inside a character are bridged by a closing first; each
    closed component then claims the original pixels under it.
    """
    img = np.asarray(box.image, dtype=np.uint8)
    closed = morphology.close(img, morphology.square(se_side))
    cm = cc_label(closed, 8)
    if len(cm) < 2:
        raise SingleComponent("box closes to a single component")
    remaining = img.copy()
    parts = []
    comps = sorted(cm.components, key=lambda c: (c.bbox.left, c.bbox.top))
    for comp in comps:
        without = remaining.copy()
        without[cm.labels == comp.id] = 0
        piece = remaining - without
        remaining = without
        if piece.any():
            parts.append(_box_from(piece, box.bbox.top, box.bbox.left, box.strip))
    return parts
