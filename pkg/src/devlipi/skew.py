"""Full-range skew estimation and upside-down detection.

The candidate angle range is first narrowed with oriented line dilations,
then searched with horizontal projection peaks.  Positive angles are
anticlockwise throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import morphology
from .errors import EmptyLine, RangeNotFound
from .raster import bbox_count, crop_to_content, h_projection, rotate

CLOCKWISE = "clockwise"
ANTICLOCKWISE = "anticlockwise"


@dataclass(frozen=True)
class SkewConfig:
    probe_angle: float = 2.0
    alpha: float = 10.0
    beta: float = 10.0
    se_square_side: int = 15
    range_step: float = 1.0
    max_width: float = 15.0
    refine_span: float = 4.0
    peak_floor: float = 0.9

    def __post_init__(self):
        if self.refine_span < 0:
            raise ValueError("refine_span must not be negative")
        for name in ("probe_angle", "alpha", "beta", "se_square_side", "range_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.alpha > 45 or self.beta > 45:
            raise ValueError("alpha and beta must not exceed 45 degrees")


@dataclass(frozen=True)
class SkewEstimate:
    theta_skew: float
    direction: str
    search_range: tuple
    hp_max_org: int
    flipped: bool = False
    fallback: str | None = None
    rotations: int = 0
    dilations: int = 0

    @property
    def total_angle(self) -> float:
        """Tilt including the half turn found by flip detection, in [-180, 180)."""
        a = self.theta_skew + (180.0 if self.flipped else 0.0)
        return (a + 180.0) % 360.0 - 180.0


def hp_max(img) -> int:
    return int(h_projection(img).max()) if np.asarray(img).size else 0


def close_page(img, side: int = 15) -> np.ndarray:
    """Fuse each text line into a solid band (content cropped first)."""
    return morphology.close(crop_to_content(img), morphology.square(side))


def probe_direction(closed, probe: float = 2.0) -> str:
    """Direction the text is tilted, judged by which small turn sharpens the
    projection peak.  Equal peaks count as clockwise."""
    if probe <= 0:
        raise ValueError("probe must be positive")
    hp_clock = hp_max(rotate(closed, -probe))
    hp_anti = hp_max(rotate(closed, probe))
    return ANTICLOCKWISE if hp_clock > hp_anti else CLOCKWISE


class _Counter:
    """Caches bbox counts of the closed image dilated by a long line."""

    def __init__(self, closed, sign):
        self.closed = closed
        self.sign = sign
        self.length = closed.shape[1] // 2
        self.cache = {}

    def __call__(self, angle):
        if angle not in self.cache:
            se = morphology.line(self.length, self.sign * angle)
            self.cache[angle] = bbox_count(morphology.dilate(self.closed, se))
        return self.cache[angle]


def _coarse(count, cfg: SkewConfig, offset: float):
    a, b = cfg.alpha + offset, cfg.beta
    angles = []
    while a <= 180.0 + cfg.alpha + 1e-9:
        angles.append(a)
        a += b
    return angles


def _edge(count, inside, outside, tol):
    """Bisect between an angle where lines stay apart and one where they merge."""
    while abs(outside - inside) > tol:
        mid = (inside + outside) / 2.0
        if count(mid) > 1:
            inside = mid
        else:
            outside = mid
    return outside


def _bound(count, cfg: SkewConfig):
    for offset in (0.0, cfg.beta / 2.0):
        angles = _coarse(count, cfg, offset)
        counts = [None] * len(angles)
        first_multi = None
        for i, t in enumerate(angles):
            counts[i] = count(t)
            if counts[i] > 1:
                first_multi = i
                break
        if first_multi is None:
            continue
        # Walk on until the lines merge again.
        last_multi = first_multi
        high = None
        for t in angles[first_multi + 1:]:
            if count(t) == 1:
                high = t
                break
            last_multi += 1
        if high is None:
            continue
        high = _edge(count, angles[last_multi], high, cfg.range_step)
        if first_multi == 0 and offset == 0.0:
            return 1.0, float(high)
        low = angles[first_multi - 1] if first_multi else max(angles[0] - cfg.beta, 0.0)
        low = _edge(count, angles[first_multi], low, cfg.range_step)
        return float(max(low, 1.0)), float(high)
    raise RangeNotFound("line dilation never separated the lines")


def bound_range(closed, direction: str, cfg: SkewConfig = SkewConfig()):
    """Unsigned [low, high] bracket for the tilt magnitude in ``direction``."""
    sign = 1 if direction == ANTICLOCKWISE else -1
    return _bound(_Counter(closed, sign), cfg)


def _first_peak(values, org, floor=0.0):
    """Index of the first element that beats ``org`` and its successor.

    A run of equal values counts as one peak, located at its centre; the
    last element only needs to beat ``org``.  Peaks below ``floor`` are
    passed over.
    """
    n = len(values)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[j + 1] == values[i]:
            j += 1
        if values[i] > org and values[i] >= floor and (j == n - 1 or values[i] > values[j + 1]):
            return (i + j) // 2
        i = j + 1
    return None


def _sweep(closed, angles, sign):
    return [hp_max(rotate(closed, -sign * a)) if a else hp_max(closed) for a in angles]


def naive_skew(img, cfg: SkewConfig = SkewConfig(), lo: float = -180.0,
               hi: float = 180.0) -> SkewEstimate:
    """Baseline: projection peak of the page at every angle step over
    [lo, hi]; ties go to the lowest angle."""
    src = crop_to_content(img)
    org = hp_max(src)
    n = int(round((hi - lo) / cfg.range_step)) + 1
    angles = [lo + i * cfg.range_step for i in range(n)]
    values = [hp_max(rotate(src, -a)) if a else org for a in angles]
    k = int(np.argmax(values))
    theta = angles[k]
    return SkewEstimate(theta, ANTICLOCKWISE if theta >= 0 else CLOCKWISE,
                        (lo, hi), org, rotations=n)


def estimate_skew(img, cfg: SkewConfig = SkewConfig()) -> SkewEstimate:
    closed = close_page(img, cfg.se_square_side)
    org = hp_max(closed)
    direction = probe_direction(closed, cfg.probe_angle)
    sign = 1 if direction == ANTICLOCKWISE else -1
    count = _Counter(closed, sign)
    try:
        low, high = _bound(count, cfg)
    except RangeNotFound:
        est = naive_skew(img, cfg, -90.0, 90.0)
        return replace(est, fallback="range_not_found", rotations=est.rotations + 2,
                       dilations=len(count.cache))
    n = int(math.floor((high - low) / cfg.range_step + 1e-9)) + 1
    angles = [low + i * cfg.range_step for i in range(n)]
    values = _sweep(closed, angles, sign)
    k = _first_peak(values, org, cfg.peak_floor * max(values))
    fallback = None
    if k is None:
        # No angle beats the original peak: take the best of {0} and R.
        cand = [0.0] + angles
        vals = [org] + values
        k0 = int(np.argmax(vals))
        mag = cand[k0]
        fallback = "no_peak"
    else:
        mag = angles[k]
    theta = sign * mag
    rotations = 2 + n
    if cfg.refine_span > 0:
        theta, extra = refine_angle(img, theta, cfg.refine_span, cfg.range_step)
        rotations += extra
    theta = (theta + 180.0) % 360.0 - 180.0
    if high - low > cfg.max_width and fallback is None:
        fallback = "wide_range"
    return SkewEstimate(float(theta), direction, (low, high), org, False, fallback,
                        rotations=rotations, dilations=len(count.cache))


def refine_angle(img, theta: float, span: float = 4.0, step: float = 1.0):
    """Sharpen a closed-image estimate on the unclosed page, whose thin
    header lines give a narrow projection peak.  Returns (angle, rotations)."""
    src = crop_to_content(img)
    n = int(round(2 * span / step)) + 1
    angles = [theta - span + i * step for i in range(n)]
    values = [hp_max(rotate(src, -a)) if a else hp_max(src) for a in angles]
    best = max(range(n), key=lambda i: (values[i], -abs(angles[i] - theta)))
    return angles[best], n


def detect_flip(unskewed) -> bool:
    """True when header bands sit in the lower half of their lines.

    Lines are separated with the overlap-aware splitter so that touching
    bands do not hide each other; each line votes with its ink.
    """
    from .segmentation import split_overlapping_lines

    lines = split_overlapping_lines(unskewed)
    if not lines:
        raise EmptyLine("no text line found")
    up = down = 0
    for line in lines:
        crop = crop_to_content(line.image)
        hp = h_projection(crop)
        ink = int(hp.sum())
        if int(np.argmax(hp)) > crop.shape[0] // 2:
            down += ink
        else:
            up += ink
    return down > up


def deskew(img, cfg: SkewConfig = SkewConfig()):
    """Estimate the tilt, undo it, then undo a half turn if the page reads
    upside down.  Returns (image, estimate)."""
    est = estimate_skew(img, cfg)
    out = rotate(img, -est.theta_skew) if est.theta_skew else np.asarray(img, dtype=np.uint8)
    flipped = detect_flip(out)
    if flipped:
        out = rotate(out, 180.0)
    return out, replace(est, flipped=flipped)
