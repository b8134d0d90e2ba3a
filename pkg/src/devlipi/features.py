"""Glyph features: zone pixel counts, crossings, projections, their
moments, and skeleton endpoint neighbourhoods for modifiers.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import ndimage as ndi

from .errors import EmptyGlyph, EmptyModifier, LayoutMismatch
from .raster import as_binary, cc_label, content_bbox, skeletonize
from .errors import EmptyImage

N_ZONES = 13
N_MOMENTS = 16
DEFAULT_SIDE = 32


def normalize_glyph(img, side: int = DEFAULT_SIDE) -> np.ndarray:
    """Crop to content, pad to a centred square, resample to ``side``x``side``.

    Padding before resampling keeps the aspect ratio, so a thin vertical bar
    stays thin instead of being stretched into a block.
    """
    arr = as_binary(img)
    try:
        box = content_bbox(arr)
    except EmptyImage:
        raise EmptyGlyph("glyph has no foreground") from None
    g = arr[box.slices()]
    h, w = g.shape
    s = max(h, w)
    top, left = (s - h) // 2, (s - w) // 2
    sq = np.zeros((s, s), dtype=np.uint8)
    sq[top:top + h, left:left + w] = g
    idx = np.minimum(((np.arange(side) + 0.5) * s / side).astype(int), s - 1)
    out = sq[np.ix_(idx, idx)]
    return (out >= 0.5).astype(np.uint8)


@dataclass(frozen=True)
class ZoneLayout:
    """Thirteen rectangles, inclusive bounds, tiling a ``canvas`` exactly."""

    canvas: tuple
    regions: tuple

    def __post_init__(self):
        if len(self.regions) != N_ZONES:
            raise LayoutMismatch(f"expected {N_ZONES} zones, got {len(self.regions)}")
        h, w = self.canvas
        cover = np.zeros((h, w), dtype=int)
        for t, b, l, r in self.regions:
            if not (0 <= t <= b < h and 0 <= l <= r < w):
                raise LayoutMismatch(f"zone {(t, b, l, r)} leaves the canvas")
            cover[t:b + 1, l:r + 1] += 1
        if not (cover == 1).all():
            raise LayoutMismatch("zones must tile the canvas without overlap")

    def index_map(self) -> np.ndarray:
        m = np.empty(self.canvas, dtype=np.int64)
        for i, (t, b, l, r) in enumerate(self.regions):
            m[t:b + 1, l:r + 1] = i
        return m

    def dumps(self) -> str:
        lines = [f"canvas {self.canvas[0]} {self.canvas[1]}"]
        lines += [f"zone {t} {b} {l} {r}" for t, b, l, r in self.regions]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ZoneLayout":
        canvas, regions = None, []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, *vals = line.split()
            if key == "canvas":
                canvas = (int(vals[0]), int(vals[1]))
            elif key == "zone":
                regions.append(tuple(int(v) for v in vals))
            else:
                raise LayoutMismatch(f"unknown layout entry {key!r}")
        if canvas is None:
            raise LayoutMismatch("layout file declares no canvas")
        return cls(canvas, tuple(regions))

    @classmethod
    def load(cls, path) -> "ZoneLayout":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def default_layout() -> ZoneLayout:
    text = resources.files("devlipi").joinpath("data/zones.txt").read_text(encoding="utf-8")
    return ZoneLayout.loads(text)


def zone_counts(glyph, layout: ZoneLayout) -> np.ndarray:
    g = as_binary(glyph)
    if g.shape != tuple(layout.canvas):
        raise LayoutMismatch(f"glyph {g.shape} does not match canvas {layout.canvas}")
    return np.bincount(layout.index_map().ravel(), weights=g.ravel(),
                       minlength=N_ZONES).astype(np.int64)


def transition_counts(glyph):
    """Per-row and per-column counts of 1 -> 0 steps inside the image."""
    g = as_binary(glyph).astype(bool)
    ht = (g[:, :-1] & ~g[:, 1:]).sum(axis=1)
    vt = (g[:-1, :] & ~g[1:, :]).sum(axis=0)
    return ht.astype(np.int64), vt.astype(np.int64)


def glyph_projections(glyph):
    g = as_binary(glyph).astype(np.int64)
    return g.sum(axis=1), g.sum(axis=0)


def series_moments(series):
    """Population mean, variance, skewness and excess kurtosis.

    A constant series has zero spread; its skewness and kurtosis are taken
    as 0.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.size == 0:
        raise ValueError("series must be non-empty")
    mean = x.mean()
    d = x - mean
    var = float(np.mean(d * d))
    if var <= 0.0:
        return float(mean), 0.0, 0.0, 0.0
    z = d / np.sqrt(var)
    return float(mean), var, float(np.mean(z ** 3)), float(np.mean(z ** 4) - 3.0)


def moment_vector(glyph) -> np.ndarray:
    """[HT, VT, HP, VP] x [mean, var, skew, kurt]."""
    ht, vt = transition_counts(glyph)
    hp, vp = glyph_projections(glyph)
    return np.array([m for s in (ht, vt, hp, vp) for m in series_moments(s)])


@dataclass(frozen=True)
class Endpoint:
    row: int
    col: int
    left: int
    right: int
    top: int
    bottom: int

    @property
    def signature(self):
        return (self.left, self.right, self.top, self.bottom)


@dataclass(frozen=True)
class EndpointFeatures:
    endpoints: tuple
    cc_count: int

    @property
    def endpoint_count(self) -> int:
        return len(self.endpoints)

    @property
    def signatures(self):
        return tuple(sorted(e.signature for e in self.endpoints))


def neighbour_count(skel) -> np.ndarray:
    """Foreground 8-neighbours of every pixel (3x3 sum minus the centre)."""
    s = as_binary(skel).astype(np.int64)
    total = ndi.convolve(s, np.ones((3, 3), dtype=np.int64), mode="constant", cval=0)
    return (total - s) * s


def endpoint_features(modifier) -> EndpointFeatures:
    arr = as_binary(modifier)
    if not arr.any():
        raise EmptyModifier("modifier has no foreground")
    skel = skeletonize(arr)
    np_map = neighbour_count(skel)
    p = np.pad(skel, 1)
    pts = []
    for r, c in zip(*np.nonzero((np_map == 1) & (skel == 1))):
        R, C = r + 1, c + 1
        pts.append(Endpoint(
            int(r), int(c),
            left=int(p[R - 1:R + 2, C - 1].sum()),
            right=int(p[R - 1:R + 2, C + 1].sum()),
            top=int(p[R - 1, C - 1:C + 2].sum()),
            bottom=int(p[R + 1, C - 1:C + 2].sum()),
        ))
    return EndpointFeatures(tuple(pts), len(cc_label(arr, 8)))


def count_endpoints(glyph) -> int:
    skel = skeletonize(glyph)
    return int(((neighbour_count(skel) == 1) & (skel == 1)).sum())
