import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from devlipi import morphology as M
from devlipi.raster import bbox_count, rotate

images = arrays(np.uint8, st.tuples(st.integers(1, 20), st.integers(1, 20)),
                elements=st.integers(0, 1))
offsets = st.sets(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=9)
ses = st.one_of(
    st.integers(1, 5).map(M.square),
    st.tuples(st.floats(1, 10), st.floats(-180, 180)).map(lambda t: M.line(*t)),
    offsets.map(lambda s: M.StructuringElement(tuple(sorted(s)))),
)


def test_square_and_line_shapes():
    assert len(M.square(3).offsets) == 9
    assert M.square(3).reach == (1, 1)
    flat = M.line(9, 0)
    assert {r for r, _ in flat.offsets} == {0}
    assert len(flat.offsets) == 9
    steep = M.line(9, 90)
    assert {c for _, c in steep.offsets} == {0}
    diag = M.line(11, 45)
    # anticlockwise from +x: up and to the right means negative row, positive column
    assert (-2, 2) in diag.offsets and (2, -2) in diag.offsets
    with pytest.raises(ValueError):
        M.square(0)
    with pytest.raises(ValueError):
        M.line(0, 10)


def test_dilate_erode_examples():
    img = np.zeros((7, 7), dtype=np.uint8)
    img[3, 3] = 1
    d = M.dilate(img, M.square(3))
    assert d[2:5, 2:5].all() and d.sum() == 9
    assert not M.dilate(np.zeros((5, 5)), M.square(3)).any()
    e = M.erode(d, M.square(3))
    assert np.array_equal(e, img)


def test_close_examples():
    rect = np.zeros((12, 12), dtype=np.uint8)
    rect[3:9, 2:10] = 1
    assert np.array_equal(M.close(rect, M.square(3)), rect)
    words = np.zeros((30, 80), dtype=np.uint8)
    for x in (5, 15, 25):
        words[10:20, x:x + 6] = 1
    closed = M.close(words, M.square(15))
    assert bbox_count(closed) == 1


@settings(max_examples=80)
@given(images, ses)
def test_operators_match_set_definitions(img, se):
    off = se.offsets
    assert np.array_equal(M.dilate(img, se), oracles.set_dilate(img, off))
    assert np.array_equal(M.erode(img, se), oracles.set_erode(img, off))
    assert np.array_equal(M.close(img, se), oracles.set_close(img, off))


@settings(max_examples=60)
@given(images, ses)
def test_closing_extensive_and_idempotent(img, se):
    c = M.close(img, se)
    assert not (img & (1 - c)).any()
    assert np.array_equal(M.close(c, se), c)


@settings(max_examples=60)
@given(images, ses)
def test_extensivity_with_anchor(img, se):
    if (0, 0) in se.offsets:
        assert not (img & (1 - M.dilate(img, se))).any()
        assert not (M.erode(img, se) & (1 - img)).any()


@settings(max_examples=60)
@given(images, ses)
def test_duality_in_interior(img, se):
    rr, rc = se.reach
    H, W = img.shape
    lhs = M.erode(img, se)
    rhs = 1 - M.dilate(1 - img, se.reflected())
    inner = (slice(rr, H - rr), slice(rc, W - rc))
    assert np.array_equal(lhs[inner], rhs[inner])


def _two_lines(tilt):
    img = np.zeros((120, 300), dtype=np.uint8)
    img[40:48, 20:280] = 1
    img[70:78, 20:280] = 1
    return rotate(img, tilt)


def test_line_dilation_separates_then_merges():
    tilt = 10.0
    img = _two_lines(tilt)
    L = img.shape[1] // 2
    assert bbox_count(M.dilate(img, M.line(L, tilt))) == 2
    assert bbox_count(M.dilate(img, M.line(L, tilt + 2))) == 2
    assert bbox_count(M.dilate(img, M.line(L, tilt + 60))) == 1
