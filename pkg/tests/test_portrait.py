"""Raster geometry, shading, markers, and the printed-portrait lap count."""

import hashlib

import numpy as np
import pytest
from PIL import Image

from hzl.contour import Circle, ZeroOnContour, winding
from hzl.harmonic import HarmonicLens, find_zeros
from hzl.portrait import PortraitSpec, chromatic_index, render, save_png
from hzl.rational import RationalFunction, rhie_base


def _square_lens():
    return HarmonicLens(RationalFunction([0, 0, 1], [1]))


def _inverse_lens():
    return HarmonicLens(RationalFunction([1], [0, 1]))


def test_spec_geometry():
    s = PortraitSpec(center=1 + 2j, width=4.0, height=2.0, resolution=(64, 32))
    assert s.nx == 64 and s.ny == 32
    assert s.to_pixel(1 + 2j) == (31.5, 15.5)
    assert s.to_pixel(-1 + 3j) == (0.0, 0.0)        # top-left corner
    assert s.to_pixel(3 + 1j) == (63.0, 31.0)       # bottom-right corner
    square = PortraitSpec(resolution=33)
    assert square.height == square.width
    assert square.resolution == (33, 33)


def test_spec_validation():
    with pytest.raises(ValueError, match="resolution"):
        PortraitSpec(resolution=8)
    with pytest.raises(ValueError, match="resolution"):
        PortraitSpec(resolution=(64, 5000))
    with pytest.raises(ValueError, match="nondegenerate"):
        PortraitSpec(width=-1.0)


def test_render_shape_and_determinism():
    img = render(_square_lens(), PortraitSpec(resolution=(64, 32), markers=False))
    assert img.shape == (32, 64, 3)
    assert img.dtype == np.uint8
    again = render(_square_lens(), PortraitSpec(resolution=(64, 32), markers=False))
    assert np.array_equal(img, again)


def test_shading_levels():
    # window [-2, 2]^2 at 33 px: col 24 / row 16 is z = 1, col 16 is z = 0
    spec = PortraitSpec(resolution=33, width=4.0, markers=False)
    img = render(_square_lens(), spec)
    assert img[16, 24].max() == 252    # |R'(1)| = 2: brightened
    assert img[16, 16].max() == 207    # |R'(0)| = 0: dimmed
    flat = render(_square_lens(),
                  PortraitSpec(resolution=33, width=4.0, markers=False, shading=False))
    assert flat[16, 24].max() == 230
    assert flat[16, 16].max() == 230


def test_pole_pixel_is_white():
    img = render(_inverse_lens(), PortraitSpec(resolution=17, width=4.0, markers=False))
    assert (img[8, 8] == 255).all()


def test_zero_markers_drawn_from_census():
    lens = _square_lens()
    census = find_zeros(lens)
    img = render(lens, PortraitSpec(resolution=201, width=4.0), census=census)
    assert (img[100, 150] == 0).all()   # zero at 1 + 0j
    assert (img[100, 100] == 0).all()   # zero and critical point at the origin


def test_pole_marker_white_with_outline():
    img = render(_inverse_lens(), PortraitSpec(resolution=201, width=4.0))
    assert (img[100, 100] == 255).all()
    box = img[96:105, 96:105]
    assert (box == 0).all(axis=-1).any()


def test_save_png_round_trip(tmp_path):
    lens = HarmonicLens(rhie_base(2, 0.5))
    img = render(lens, PortraitSpec(resolution=64, width=2.5), census=find_zeros(lens))
    p1 = tmp_path / "a.png"
    p2 = tmp_path / "b.png"
    save_png(img, p1)
    save_png(img, p2)
    assert hashlib.sha256(p1.read_bytes()).digest() == hashlib.sha256(p2.read_bytes()).digest()
    assert np.array_equal(np.asarray(Image.open(p1)), img)


def test_chromatic_index_matches_winding():
    lens = _square_lens()
    circle = Circle(0.0j, 2.0)
    assert chromatic_index(lens, circle) == 2
    assert chromatic_index(lens, circle) == winding(lens, circle).value


def test_chromatic_index_near_pole():
    lens = HarmonicLens(rhie_base(2, 0.5))
    assert chromatic_index(lens, Circle(0.5 + 0j, 0.1)) == -1


def test_chromatic_index_hue_seam():
    # f stays in the left half plane, so arg f hops across the +-pi seam
    # without actually winding
    lens = HarmonicLens(RationalFunction([-5, 1], [1]))
    assert chromatic_index(lens, Circle(0.0j, 1.0)) == 0


def test_chromatic_index_rejections():
    lens = _square_lens()
    with pytest.raises(ValueError):
        chromatic_index(lens, Circle(0.0j, 2.0), color_bins=3)
    with pytest.raises(ZeroOnContour):
        chromatic_index(lens, Circle(0.0j, 1.0))   # zero at z = 1 on the circle
