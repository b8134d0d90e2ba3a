"""Raster substrate: histograms, thresholding, projections, rotation,
connected components and thinning.

Images are plain 2-D numpy arrays.  A gray image holds ``uint8`` intensities;
a binary image holds ``uint8`` values in {0, 1} with 1 marking text.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np
from scipy import ndimage as ndi
from skimage.morphology import skeletonize as _sk_skeletonize

from .errors import EmptyImage

__all__ = [
    "BoundingBox",
    "Component",
    "ComponentMap",
    "as_binary",
    "as_gray",
    "bbox_count",
    "binarize_invert",
    "cc_label",
    "content_bbox",
    "crop_to_content",
    "despeckle",
    "default_threshold",
    "h_projection",
    "histogram",
    "majority",
    "mode_gap",
    "rotate",
    "skeletonize",
    "v_projection",
]

_STRUCT = {
    4: np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool),
    8: np.ones((3, 3), dtype=bool),
}


def as_gray(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("gray intensities must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def as_binary(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {arr.shape}")
    return (arr != 0).astype(np.uint8)


def histogram(img) -> np.ndarray:
    """256-bin intensity histogram."""
    return np.bincount(as_gray(img).ravel(), minlength=256).astype(np.int64)


def mode_gap(h) -> int:
    """Peak count of the dark half minus peak count of the bright half."""
    h = np.asarray(h)
    return int(h[:128].max()) - int(h[128:].max())


def default_threshold(h) -> int:
    """Midpoint between the dominant dark mode and the dominant bright mode."""
    h = np.asarray(h)
    dark = int(np.argmax(h[:128]))
    bright = 128 + int(np.argmax(h[128:]))
    return (dark + bright) // 2


def binarize_invert(img, T: int) -> np.ndarray:
    if not 0 <= T <= 255:
        raise ValueError(f"threshold must lie in [0, 255], got {T}")
    return (as_gray(img) <= T).astype(np.uint8)


def h_projection(img) -> np.ndarray:
    return np.asarray(img, dtype=np.int64).sum(axis=1)


def v_projection(img) -> np.ndarray:
    return np.asarray(img, dtype=np.int64).sum(axis=0)


def rotate(img, angle: float) -> np.ndarray:
    """Rotate about the image centre, anticlockwise for positive ``angle``.

    The canvas grows to hold the whole rotated frame; sampling is
    nearest-neighbour so a binary image stays binary.  Multiples of 90 degrees
    are exact index permutations.
    """
    img = np.ascontiguousarray(img, dtype=np.uint8)
    if not -360.0 <= angle <= 360.0:
        raise ValueError(f"angle out of range: {angle}")
    quarter = angle / 90.0
    if abs(quarter - round(quarter)) < 1e-12:
        return np.ascontiguousarray(np.rot90(img, int(round(quarter)) % 4))
    H, W = img.shape
    rad = math.radians(angle)
    c, s = abs(math.cos(rad)), abs(math.sin(rad))
    new_w = int(math.ceil(W * c + H * s)) + 2
    new_h = int(math.ceil(W * s + H * c)) + 2
    M = cv2.getRotationMatrix2D(((W - 1) / 2.0, (H - 1) / 2.0), angle, 1.0)
    M[0, 2] += (new_w - 1) / 2.0 - (W - 1) / 2.0
    M[1, 2] += (new_h - 1) / 2.0 - (H - 1) / 2.0
    return cv2.warpAffine(img, M, (new_w, new_h), flags=cv2.INTER_NEAREST,
                          borderMode=cv2.BORDER_CONSTANT, borderValue=0)


@dataclass(frozen=True)
class BoundingBox:
    """Inclusive pixel bounds."""

    top: int
    bottom: int
    left: int
    right: int

    @property
    def height(self) -> int:
        return self.bottom - self.top + 1

    @property
    def width(self) -> int:
        return self.right - self.left + 1

    def as_tuple(self):
        return (self.top, self.bottom, self.left, self.right)

    def slices(self):
        return slice(self.top, self.bottom + 1), slice(self.left, self.right + 1)


@dataclass(frozen=True)
class Component:
    id: int
    pixels: np.ndarray  # (N, 2) array of (row, col)
    bbox: BoundingBox

    @property
    def cardinality(self) -> int:
        return len(self.pixels)


@dataclass(frozen=True)
class ComponentMap:
    labels: np.ndarray
    components: tuple

    def __len__(self):
        return len(self.components)

    def mask(self, cid: int) -> np.ndarray:
        return (self.labels == cid).astype(np.uint8)


def _raster_labels(img, connectivity):
    if connectivity not in _STRUCT:
        raise ValueError("connectivity must be 4 or 8")
    labels, n = ndi.label(np.asarray(img) != 0, structure=_STRUCT[connectivity])
    if n == 0:
        return labels, 0
    # Re-number so ids follow raster-scan order of first discovery.
    flat = labels.ravel()
    ids, first = np.unique(flat, return_index=True)
    keep = ids != 0
    ids, first = ids[keep], first[keep]
    order = ids[np.argsort(first)]
    remap = np.zeros(n + 1, dtype=labels.dtype)
    remap[order] = np.arange(1, n + 1, dtype=labels.dtype)
    return remap[labels], n


def cc_label(img, connectivity: int = 8) -> ComponentMap:
    """Label maximal components; ids are dense from 1 in raster order."""
    labels, n = _raster_labels(img, connectivity)
    comps = []
    if n:
        rows, cols = np.nonzero(labels)
        lab = labels[rows, cols]
        order = np.argsort(lab, kind="stable")
        rows, cols, lab = rows[order], cols[order], lab[order]
        bounds = np.searchsorted(lab, np.arange(1, n + 2))
        for cid in range(1, n + 1):
            a, b = bounds[cid - 1], bounds[cid]
            r, c = rows[a:b], cols[a:b]
            box = BoundingBox(int(r.min()), int(r.max()), int(c.min()), int(c.max()))
            comps.append(Component(cid, np.stack([r, c], axis=1), box))
    return ComponentMap(labels, tuple(comps))


def bbox_count(img) -> int:
    """Number of 8-connected components, i.e. enclosing bounding boxes."""
    arr = np.ascontiguousarray(np.asarray(img) != 0, dtype=np.uint8)
    if not arr.any():
        return 0
    n, _ = cv2.connectedComponents(arr, connectivity=8)
    return int(n) - 1


def content_bbox(img) -> BoundingBox:
    arr = np.asarray(img)
    rows = np.flatnonzero(arr.any(axis=1))
    if rows.size == 0:
        raise EmptyImage("image has no foreground pixel")
    cols = np.flatnonzero(arr.any(axis=0))
    return BoundingBox(int(rows[0]), int(rows[-1]), int(cols[0]), int(cols[-1]))


def crop_to_content(img) -> np.ndarray:
    box = content_bbox(img)
    return np.asarray(img)[box.slices()].copy()


def skeletonize(img) -> np.ndarray:
    """Thin strokes to unit width while keeping 8-connectivity."""
    arr = np.asarray(img) != 0
    if not arr.any():
        return np.zeros(arr.shape, dtype=np.uint8)
    return _sk_skeletonize(arr).astype(np.uint8)


def despeckle(img, speck: int = 3) -> np.ndarray:
    """Drop 8-connected specks under ``speck`` pixels and fill background
    pixels whose four neighbours are all ink."""
    g = as_binary(img)
    lab, n = ndi.label(g, structure=np.ones((3, 3), dtype=bool))
    if n:
        keep = np.bincount(lab.ravel()) >= speck
        keep[0] = False
        g = keep[lab].astype(np.uint8)
    p = np.pad(g, 1)
    pinhole = p[:-2, 1:-1] & p[2:, 1:-1] & p[1:-1, :-2] & p[1:-1, 2:]
    return g | pinhole


def majority(img, size: int = 3) -> np.ndarray:
    """Binary majority (median) filter; the border counts as background."""
    g = as_binary(img)
    pad = size // 2
    return ndi.median_filter(np.pad(g, pad), size=size)[pad:pad + g.shape[0], pad:pad + g.shape[1]]
