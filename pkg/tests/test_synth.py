import numpy as np
import pytest

import oracles
from devlipi.font import CORE_H, default_font
from devlipi.synth import (SynthSpec, break_stroke, conjunct_image, gen_synthetic, shadow_image,
                           shadow_pairs, to_gray)


def test_same_seed_same_page():
    spec = SynthSpec(lines=2, composites=1, ascenders=0.3, seed=8)
    a, b = gen_synthetic(spec), gen_synthetic(spec)
    assert np.array_equal(a.image, b.image) and a.manifest == b.manifest
    c = gen_synthetic(SynthSpec(lines=2, composites=1, ascenders=0.3, seed=9))
    assert not np.array_equal(a.image, c.image)


def test_manifest_layout():
    p = gen_synthetic(SynthSpec(lines=3, composites=1, shadows=1, descenders=0.3, seed=4))
    man = p.manifest
    assert {"version", "width", "height", "skew", "seed", "lines", "composites",
            "descenders", "text"} <= set(man)
    assert len(man["lines"]) == 3 and len(man["composites"]) == 2
    assert p.binary.shape == (man["height"], man["width"])
    for L in man["lines"]:
        for w in L["words"]:
            t, b, l, r = w["bbox"]
            assert p.binary[t:b + 1, l:r + 1].any()
            for ch in w["chars"]:
                ct, cb, cl, cr = ch["bbox"]
                assert l <= cl <= cr <= r
    # every ink pixel belongs to a line in the map
    assert not (p.binary.astype(bool) & (p.line_map == 0)).any()


def test_gray_pages_keep_modes_apart():
    p = gen_synthetic(SynthSpec(lines=1, gray=True, seed=2))
    ink, paper = p.image[p.binary == 1], p.image[p.binary == 0]
    assert ink.max() < paper.min()


def test_to_gray_clips_noise():
    rng = np.random.default_rng(0)
    b = (rng.random((50, 50)) < 0.3).astype(np.uint8)
    g = to_gray(b, rng, ink=40, paper=215, spread=3)
    assert g[b == 1].min() >= 31 and g[b == 1].max() <= 49
    assert g[b == 0].min() >= 206


def test_skewed_page_grows():
    flat = gen_synthetic(SynthSpec(lines=2, seed=6))
    tilted = gen_synthetic(SynthSpec(lines=2, seed=6, skew=30))
    assert tilted.binary.shape[0] > flat.binary.shape[0]
    assert tilted.manifest["skew"] == 30.0


def test_spec_from_text():
    spec = SynthSpec.from_text("lines = 4\nglyphs_per_word = 2, 3\ngray = yes\nskew = -7.5\n")
    assert (spec.lines, spec.glyphs_per_word, spec.gray, spec.skew) == (4, (2, 3), True, -7.5)
    with pytest.raises(ValueError):
        SynthSpec.from_text("colour = red\n")


def test_conjunct_image_has_one_bridge():
    f = default_font()
    a, b = f.core["क"], f.core["म"]
    img = conjunct_image(a, b, 12)
    assert img.shape == (CORE_H, a.shape[1] + 1 + b.shape[1])
    assert img[:, a.shape[1]].sum() == 1 and img[12, a.shape[1]] == 1
    assert img.sum() == a.sum() + b.sum() + 1


def test_shadow_masks_partition():
    f = default_font()
    pairs = shadow_pairs(f)
    assert pairs
    la, lb, ov = pairs[0]
    img, ma, mb = shadow_image(f.core[la], f.core[lb], ov)
    assert not (ma & mb).any()
    assert np.array_equal(ma | mb, img)
    _, n = oracles.flood_labels(img, 8)
    assert n == 2


def test_break_stroke_disconnects():
    f = default_font()
    rng = np.random.default_rng(1)
    g = f.core["ग"]
    cut = break_stroke(g, rng)
    assert cut is not None
    assert cut.sum() < g.sum() and not (cut & ~g.astype(bool)).any()
    assert oracles.flood_labels(cut, 8)[1] >= 2
