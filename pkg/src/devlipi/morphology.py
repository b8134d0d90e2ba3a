"""Binary dilation, erosion and closing with square and oriented-line
structuring elements.

Dilation discards anything pushed past the canvas edge; erosion treats the
outside as background.  Closing is evaluated on a canvas padded by the SE
reach, so it is the set-theoretic closing restricted to the image.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np
from skimage.draw import line as _bresenham

__all__ = ["StructuringElement", "square", "line", "dilate", "erode", "close"]


@dataclass(frozen=True)
class StructuringElement:
    """A mask of (dr, dc) offsets around an anchor at (0, 0)."""

    offsets: tuple
    shape: str = "custom"
    size: float = 0.0
    angle: float = 0.0

    def __post_init__(self):
        if not self.offsets:
            raise ValueError("structuring element mask must be non-empty")

    @property
    def reach(self):
        arr = np.asarray(self.offsets)
        return int(np.abs(arr[:, 0]).max()), int(np.abs(arr[:, 1]).max())

    def reflected(self) -> "StructuringElement":
        return StructuringElement(tuple(sorted((-r, -c) for r, c in self.offsets)),
                                  self.shape, self.size, self.angle)

    def kernel(self) -> np.ndarray:
        rr, rc = self.reach
        k = np.zeros((2 * rr + 1, 2 * rc + 1), dtype=np.uint8)
        for dr, dc in self.offsets:
            k[dr + rr, dc + rc] = 1
        return k


def square(side: int) -> StructuringElement:
    if side < 1:
        raise ValueError("square side must be positive")
    lo = -(side // 2)
    span = range(lo, lo + side)
    return StructuringElement(tuple((r, c) for r in span for c in span), "square", side)


def line(length: float, angle: float) -> StructuringElement:
    """Digital line through the anchor, symmetric about it.

    ``angle`` is anticlockwise from the +column axis; rows grow downward so a
    positive angle climbs toward row 0.
    """
    if length <= 0:
        raise ValueError("line length must be positive")
    half = length / 2.0
    rad = math.radians(angle)
    er, ec = int(round(-half * math.sin(rad))), int(round(half * math.cos(rad)))
    rr, cc = _bresenham(0, 0, er, ec)
    pts = set(zip(rr.tolist(), cc.tolist()))
    pts |= {(-r, -c) for r, c in pts}
    return StructuringElement(tuple(sorted(pts)), "line", float(length), float(angle))


def _as_u8(img):
    return np.ascontiguousarray(np.asarray(img) != 0, dtype=np.uint8)


def _anchor(se):
    rr, rc = se.reach
    return (rc, rr)


def dilate(img, se: StructuringElement) -> np.ndarray:
    """{p + s : p in img, s in se}, clipped to the canvas."""
    ref = se.reflected()
    return cv2.dilate(_as_u8(img), ref.kernel(), anchor=_anchor(ref),
                      borderType=cv2.BORDER_CONSTANT, borderValue=0)


def erode(img, se: StructuringElement) -> np.ndarray:
    """{p : p + s in img for every s in se}."""
    return cv2.erode(_as_u8(img), se.kernel(), anchor=_anchor(se),
                     borderType=cv2.BORDER_CONSTANT, borderValue=0)


def close(img, se: StructuringElement) -> np.ndarray:
    rr, rc = se.reach
    arr = _as_u8(img)
    padded = np.pad(arr, ((rr, rr), (rc, rc)))
    out = erode(dilate(padded, se), se)
    return np.ascontiguousarray(out[rr:rr + arr.shape[0], rc:rc + arr.shape[1]])
