"""Phase portraits of f = R - conj(z) with zero, pole and critical markers.

Hue encodes arg f; brightness is nudged up where the map preserves
orientation (|R'| > 1) and down where it reverses, so the critical curve
|R'| = 1 shows up as a value step even when the hue field is smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from .contour import Circle, NonConvergent, ZeroOnContour
from .harmonic import HarmonicLens, ZeroCensus

_VAL_BASE = 0.90
_VAL_PRESERVING = 0.99   # base brightness +10% where |R'| > 1
_VAL_REVERSING = 0.81    # and -10% where |R'| < 1
_MARKER_FRAC = 0.008     # marker radius as a fraction of the pixel diagonal


@dataclass(frozen=True)
class PortraitSpec:
    """Window and raster geometry plus the marker/shading toggles.

    resolution may be a single pixel count (square raster) or an (nx, ny)
    pair; height defaults to width.
    """

    center: complex = 0j
    width: float = 4.0
    height: float | None = None
    resolution: int | tuple = 600
    markers: bool = True
    shading: bool = True

    def __post_init__(self):
        if self.height is None:
            object.__setattr__(self, "height", float(self.width))
        if not (self.width > 0 and self.height > 0):
            raise ValueError("window must be nondegenerate")
        res = self.resolution
        if np.ndim(res) == 0:
            res = (int(res), int(res))
        else:
            res = (int(res[0]), int(res[1]))
        if not all(16 <= k <= 4096 for k in res):
            raise ValueError("resolution out of range")
        object.__setattr__(self, "resolution", res)

    @property
    def nx(self) -> int:
        return self.resolution[0]

    @property
    def ny(self) -> int:
        return self.resolution[1]

    def to_pixel(self, z) -> tuple:
        """Math point -> (col, row) with the imaginary axis pointing up."""
        z = complex(z)
        left = self.center.real - 0.5 * self.width
        top = self.center.imag + 0.5 * self.height
        col = (z.real - left) / self.width * (self.nx - 1)
        row = (top - z.imag) / self.height * (self.ny - 1)
        return col, row


def _hsv_to_rgb(h, s, v):
    """Vectorized HSV -> RGB on arrays in [0, 1]."""
    h6 = (h % 1.0) * 6.0
    i = np.floor(h6).astype(int) % 6
    f = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def render(lens: HarmonicLens, spec: PortraitSpec = PortraitSpec(),
           census: ZeroCensus | None = None) -> np.ndarray:
    """Render to an (ny, nx, 3) uint8 array.

    Markers (drawn when spec.markers): black disks on the census zeros,
    white squares on the poles of R, black triangles on the roots of R'.
    """
    xs = np.linspace(spec.center.real - 0.5 * spec.width,
                     spec.center.real + 0.5 * spec.width, spec.nx)
    ys = np.linspace(spec.center.imag + 0.5 * spec.height,
                     spec.center.imag - 0.5 * spec.height, spec.ny)
    Z = xs[None, :] + 1j * ys[:, None]
    fz = np.asarray(lens(Z), dtype=complex)
    bad = ~np.isfinite(fz)
    hue = (np.angle(np.where(bad, 1.0, fz)) + math.pi) / (2.0 * math.pi)
    if spec.shading:
        dz = np.asarray(lens.deriv(Z), dtype=complex)
        val = np.where(np.abs(dz) > 1.0, _VAL_PRESERVING, _VAL_REVERSING)
    else:
        val = np.full(hue.shape, _VAL_BASE)
    sat = np.ones_like(val)
    # poles print as white
    sat[bad] = 0.0
    val[bad] = 1.0
    rgb = _hsv_to_rgb(hue, sat, val)
    img = (np.clip(rgb, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    if spec.markers:
        img = _draw_markers(img, lens, spec, census)
    return img


def _critical_points(lens: HarmonicLens) -> list:
    dR = lens.function.derivative()
    if dR.num.degree < 1:
        return []
    return [complex(w) for w in dR.num.roots()]


def _draw_markers(img: np.ndarray, lens: HarmonicLens, spec: PortraitSpec,
                  census: ZeroCensus | None) -> np.ndarray:
    pil = Image.fromarray(img)
    draw = ImageDraw.Draw(pil)
    rad = max(2.0, _MARKER_FRAC * math.hypot(spec.nx, spec.ny))
    if census is not None:
        for rec in census.zeros:
            cx, cy = spec.to_pixel(rec.z)
            draw.ellipse((cx - rad, cy - rad, cx + rad, cy + rad),
                         fill=(0, 0, 0))
    for pole in lens.function.poles():
        cx, cy = spec.to_pixel(pole.z)
        draw.rectangle((cx - rad, cy - rad, cx + rad, cy + rad),
                       fill=(255, 255, 255), outline=(0, 0, 0))
    for w in _critical_points(lens):
        cx, cy = spec.to_pixel(w)
        tri = [(cx, cy - rad), (cx - rad, cy + rad), (cx + rad, cy + rad)]
        draw.polygon(tri, fill=(0, 0, 0))
    return np.asarray(pil)


def save_png(img: np.ndarray, path) -> None:
    """Write the array as a PNG; the byte stream depends only on the pixels."""
    Image.fromarray(img).save(path, format="PNG")


def chromatic_index(lens, circle: Circle, color_bins: int = 24) -> int:
    """Signed number of full color-wheel laps of arg f along the circle.

    The argument is quantized into color_bins hue bins first, so this counts
    what a reader of the printed portrait would count; for a fine enough
    sampling the lap count equals the winding number of f on the circle.
    """
    color_bins = int(color_bins)
    if color_bins < 4:
        raise ValueError("need at least 4 color bins")
    samples = max(64, 8 * color_bins)
    for _ in range(14):
        t = np.arange(samples) / samples
        fz = np.asarray(lens(circle.points(t)), dtype=complex)
        mod = np.abs(fz)
        if not np.all(np.isfinite(mod)):
            raise ZeroOnContour("f blows up on the circle")
        if mod.min() <= 1e-12 * (1.0 + mod.max()):
            raise ZeroOnContour("f vanishes on the circle")
        bins = np.floor((np.angle(fz) + math.pi)
                        / (2.0 * math.pi) * color_bins).astype(int)
        bins = np.minimum(bins, color_bins - 1)   # angle == pi lands on the seam
        steps = bins - np.roll(bins, 1)
        steps = (steps + color_bins // 2) % color_bins - color_bins // 2
        # a hop of a quarter wheel between neighbours is under-resolved
        if np.abs(steps).max() <= max(1, color_bins // 4):
            total = int(steps.sum())
            return total // color_bins
        samples *= 2
    raise NonConvergent("phase laps did not stabilize under refinement")
