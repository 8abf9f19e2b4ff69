"""Pixel-level operations against naive oracles and the exact
boundary values the detector depends on."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference
from trapsight import imaging
from trapsight.errors import ConfigError, DimensionMismatchError, ImageFormatError
from trapsight.imaging import (
    Component,
    absolute_difference,
    binary_threshold,
    count_weevils,
    decode_image,
    decode_pgm,
    encode_pgm,
    encode_png,
    label_components,
    read_image,
    similarity_percent,
    to_grayscale,
    write_image,
)


# -- to_grayscale -----------------------------------------------------------


@pytest.mark.parametrize(
    "rgb,expected",
    [((0, 0, 0), 0), ((255, 255, 255), 255), ((100, 100, 100), 100)],
)
def test_grayscale_corner_values(rgb, expected):
    img = np.full((1, 1, 3), rgb, dtype=np.uint8)
    assert to_grayscale(img)[0, 0] == expected


def test_grayscale_equal_channels_identity():
    v = np.arange(256, dtype=np.uint8)
    img = np.dstack([v.reshape(16, 16)] * 3)
    assert np.array_equal(to_grayscale(img), v.reshape(16, 16))


def test_grayscale_matches_float_luma_oracle():
    rng = np.random.default_rng(7)
    img = rng.integers(0, 256, size=(23, 31, 3), dtype=np.uint8)
    assert np.array_equal(to_grayscale(img), reference.naive_grayscale(img))


def test_grayscale_passthrough_and_rejects():
    gray = np.zeros((4, 4), dtype=np.uint8)
    assert to_grayscale(gray) is not None
    with pytest.raises(ImageFormatError):
        to_grayscale(np.zeros((4, 4, 4), dtype=np.uint8))
    with pytest.raises(ImageFormatError):
        to_grayscale(np.zeros((4, 4, 3), dtype=np.float32))


# -- binary_threshold -------------------------------------------------------


def test_threshold_equality_is_foreground():
    img = np.array([[61, 60]], dtype=np.uint8)
    out = binary_threshold(img, 60)
    assert out[0, 0] == 0  # above T: background
    assert out[0, 1] == 255  # equality: foreground


def test_threshold_t255_keeps_everything_foreground():
    img = np.full((3, 3), 128, dtype=np.uint8)
    assert (binary_threshold(img, 255) == 255).all()


def test_threshold_output_strictly_binary():
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, size=(40, 40), dtype=np.uint8)
    out = binary_threshold(img, 97)
    assert set(np.unique(out)) <= {0, 255}


@given(t=st.integers(0, 255))
@settings(max_examples=40, deadline=None)
def test_threshold_agrees_with_naive_loop(t):
    img = np.arange(256, dtype=np.uint8).reshape(16, 16)
    assert np.array_equal(binary_threshold(img, t), reference.naive_threshold(img, t))


@pytest.mark.parametrize("t", [-1, 256, 1000])
def test_threshold_rejects_out_of_range(t):
    with pytest.raises(ConfigError):
        binary_threshold(np.zeros((2, 2), dtype=np.uint8), t)


# -- absolute_difference ----------------------------------------------------


def test_absdiff_examples_and_symmetry():
    a = np.array([[200, 50]], dtype=np.uint8)
    b = np.array([[50, 200]], dtype=np.uint8)
    out = absolute_difference(a, b)
    assert out.tolist() == [[150, 150]]
    assert np.array_equal(out, absolute_difference(b, a))
    assert (absolute_difference(a, a) == 0).all()


def test_absdiff_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        absolute_difference(
            np.zeros((2, 3), dtype=np.uint8), np.zeros((3, 2), dtype=np.uint8)
        )


# -- similarity_percent -----------------------------------------------------


def test_similarity_extremes():
    a = np.zeros((10, 10), dtype=np.uint8)
    assert similarity_percent(a, a) == 100.0
    assert similarity_percent(a, np.full_like(a, 255)) == 0.0


@given(k=st.integers(0, 63))
@settings(max_examples=30, deadline=None)
def test_similarity_drops_linearly_with_flips(k):
    rng = np.random.default_rng(11)
    a = reference.random_binary(rng, (8, 8))
    b = a.copy()
    flat = b.reshape(-1)
    flat[:k] = 255 - flat[:k]
    assert similarity_percent(a, b) == pytest.approx(100.0 - 100.0 * k / 64)


def test_similarity_rejects_non_binary():
    gray = np.full((4, 4), 7, dtype=np.uint8)
    with pytest.raises(ImageFormatError):
        similarity_percent(gray, gray)


def test_similarity_of_largest_admissible_object():
    # A full-resolution frame pair differing in exactly the largest
    # admissible object area reproduces the default S threshold.
    a = np.zeros((2490, 3856), dtype=np.uint8)
    b = a.copy()
    b.reshape(-1)[:266_000] = 255
    assert similarity_percent(a, b) == pytest.approx(97.2296, abs=1e-4)


# -- label_components -------------------------------------------------------


def test_label_empty_frame():
    assert label_components(np.zeros((5, 5), dtype=np.uint8)) == []


def test_label_single_center_pixel():
    img = np.zeros((3, 3), dtype=np.uint8)
    img[1, 1] = 255
    (comp,) = label_components(img)
    assert comp == Component(label=1, area=1, bbox=(1, 1, 1, 1), centroid=(1.0, 1.0))


def test_label_diagonal_pair_is_one_component():
    img = np.zeros((4, 4), dtype=np.uint8)
    img[1, 1] = img[2, 2] = 255
    (comp,) = label_components(img)
    assert comp.area == 2
    assert comp.bbox == (1, 1, 2, 2)
    assert comp.centroid == (1.5, 1.5)


def test_label_ordering_and_dense_labels():
    img = np.zeros((10, 10), dtype=np.uint8)
    img[6:8, 1:3] = 255  # lower-left
    img[1:3, 6:8] = 255  # upper-right
    img[1:3, 1:3] = 255  # upper-left
    comps = label_components(img)
    assert [c.label for c in comps] == [1, 2, 3]
    assert [c.bbox[:2] for c in comps] == [(1, 1), (6, 1), (1, 6)]


def _assert_matches_oracle(img):
    comps = label_components(img)
    oracle = reference.flood_fill_components(img)
    assert len(comps) == len(oracle)
    got = sorted((c.area, c.bbox) for c in comps)
    want = sorted((o["area"], o["bbox"]) for o in oracle)
    assert got == want
    got_centroids = sorted((c.bbox, c.centroid) for c in comps)
    want_centroids = sorted((o["bbox"], o["centroid"]) for o in oracle)
    for (_, gc), (_, wc) in zip(got_centroids, want_centroids):
        assert gc == pytest.approx(wc)
    assert sum(c.area for c in comps) == int(np.count_nonzero(img))


@pytest.mark.parametrize("density", [0.05, 0.3, 0.5, 0.7, 0.95])
def test_label_matches_flood_fill_on_random_frames(density):
    rng = np.random.default_rng(int(density * 1000))
    for _ in range(40):
        _assert_matches_oracle(reference.random_binary(rng, (64, 64), density))


def test_label_structured_patterns():
    # Checkerboard: every foreground pixel 8-touches its diagonal
    # neighbours, so each color class collapses to one component.
    n = 16
    yy, xx = np.mgrid[:n, :n]
    checker = np.where((yy + xx) % 2 == 0, 255, 0).astype(np.uint8)
    _assert_matches_oracle(checker)
    # Nested rings with background between them.
    ring = np.zeros((21, 21), dtype=np.uint8)
    ring[3:18, 3:18] = 255
    ring[6:15, 6:15] = 0
    ring[9:12, 9:12] = 255
    _assert_matches_oracle(ring)
    # Full frame and single rows/columns.
    _assert_matches_oracle(np.full((7, 7), 255, dtype=np.uint8))
    _assert_matches_oracle(np.full((1, 31), 255, dtype=np.uint8))
    _assert_matches_oracle(np.full((31, 1), 255, dtype=np.uint8))


def test_label_odd_width_frames():
    # Odd widths exercise the per-row provisional-label bound.
    rng = np.random.default_rng(99)
    for w in (1, 3, 17, 63, 65):
        _assert_matches_oracle(reference.random_binary(rng, (13, w), 0.5))


# -- count_weevils ----------------------------------------------------------


def _comps(*areas):
    return [
        Component(label=i + 1, area=a, bbox=(0, 0, 0, 0), centroid=(0.0, 0.0))
        for i, a in enumerate(areas)
    ]


def test_count_inclusive_boundaries():
    assert count_weevils(_comps(27_785), 27_785, 266_000) == 1
    assert count_weevils(_comps(266_000), 27_785, 266_000) == 1
    assert count_weevils(_comps(27_784, 266_001), 27_785, 266_000) == 0
    assert count_weevils([], 27_785, 266_000) == 0


def test_count_rejects_inverted_bounds():
    with pytest.raises(ConfigError):
        count_weevils(_comps(5), 10, 9)


@given(st.lists(st.integers(1, 1000), max_size=20), st.integers(0, 50))
@settings(max_examples=50, deadline=None)
def test_count_monotone_under_widening(areas, slack):
    comps = _comps(*areas) if areas else []
    narrow = count_weevils(comps, 100, 500)
    wide = count_weevils(comps, 100 - slack, 500 + slack)
    assert wide >= narrow


# -- codecs -----------------------------------------------------------------


def test_pgm_round_trip():
    rng = np.random.default_rng(5)
    img = rng.integers(0, 256, size=(9, 14), dtype=np.uint8)
    data = encode_pgm(img)
    assert data.startswith(b"P5\n14 9\n255\n")
    assert np.array_equal(decode_pgm(data), img)


def test_pgm_header_with_comments():
    data = b"P5\n# a comment\n2 2 # trailing\n255\n\x01\x02\x03\x04"
    assert decode_pgm(data).tolist() == [[1, 2], [3, 4]]


@pytest.mark.parametrize(
    "data",
    [
        b"P6\n2 2\n255\n" + b"\x00" * 12,  # wrong magic
        b"P5\n2 2\n65535\n" + b"\x00" * 8,  # unsupported maxval
        b"P5\n2 2\n255\n\x00",  # truncated pixels
        b"P5\n2\n255\n\x00\x00",  # malformed header
    ],
)
def test_pgm_rejects_malformed(data):
    with pytest.raises(ImageFormatError):
        decode_pgm(data)


def test_png_round_trip_and_sniffing():
    rng = np.random.default_rng(6)
    img = rng.integers(0, 256, size=(12, 8), dtype=np.uint8)
    png = encode_png(img)
    assert png.startswith(b"\x89PNG")
    assert np.array_equal(decode_image(png), img)
    assert np.array_equal(decode_image(encode_pgm(img)), img)
    with pytest.raises(ImageFormatError):
        decode_image(b"GIF89a not supported")


def test_read_write_by_suffix(tmp_path):
    img = np.arange(64, dtype=np.uint8).reshape(8, 8)
    for name in ("frame.pgm", "frame.png"):
        path = tmp_path / name
        write_image(path, img)
        assert np.array_equal(read_image(path), img)
    with pytest.raises(ImageFormatError):
        write_image(tmp_path / "frame.bmp", img)
