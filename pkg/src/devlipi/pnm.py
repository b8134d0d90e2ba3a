"""PGM (P5) and PBM (P4) readers and writers.

PBM bit 1 is ink, which maps onto binary foreground 1.  PNG and any other
format Pillow understands are accepted by the readers as a convenience.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .raster import as_binary, as_gray, binarize_invert, default_threshold, histogram


def _open(path):
    with Image.open(path) as im:
        im.load()
        return im.copy()


def read_gray(path) -> np.ndarray:
    im = _open(path)
    if im.mode == "1":
        return np.where(np.asarray(im, dtype=bool), 255, 0).astype(np.uint8)
    return np.asarray(im.convert("L"), dtype=np.uint8).copy()


def read_binary(path, threshold: int | None = None) -> np.ndarray:
    """Read a page as a binary image; gray inputs are thresholded and inverted."""
    im = _open(path)
    if im.mode == "1":
        return (~np.asarray(im, dtype=bool)).astype(np.uint8)
    gray = np.asarray(im.convert("L"), dtype=np.uint8)
    if threshold is None:
        threshold = default_threshold(histogram(gray))
    return binarize_invert(gray, threshold)


def write_pbm(path, img) -> None:
    fg = as_binary(img).astype(bool)
    Image.fromarray(~fg).save(Path(path), format="PPM")


def write_pgm(path, img) -> None:
    Image.fromarray(as_gray(img), mode="L").save(Path(path), format="PPM")
