"""Winding numbers along circles and arc-polygons, by adaptive phase tracking.

A contour is sampled until every consecutive phase step is below pi/2; the
accumulated argument change divided by 2*pi is then the winding number.
Functions passed in must accept numpy arrays of complex points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
_STEP_LIMIT = 0.5 * math.pi
_MAX_SAMPLES = 2 ** 22
_MIN_MODULUS = 1e-9


class ZeroOnContour(ArithmeticError):
    """The function vanishes (or blows up) on the contour; nudge it."""


class NonConvergent(ArithmeticError):
    """Sample cap exhausted without taming the phase steps."""


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float

    def points(self, t):
        return self.center + self.radius * np.exp(1j * TWO_PI * np.asarray(t, dtype=float))

    @property
    def initial_samples(self):
        return 64


@dataclass(frozen=True)
class Arc:
    """Circular arc from angle a0 to a1 (radians); a1 < a0 runs clockwise."""
    center: complex
    radius: float
    a0: float
    a1: float

    def points(self, s):
        ang = self.a0 + (self.a1 - self.a0) * np.asarray(s, dtype=float)
        return self.center + self.radius * np.exp(1j * ang)


@dataclass(frozen=True)
class Segment:
    a: complex
    b: complex

    def points(self, s):
        return self.a + (self.b - self.a) * np.asarray(s, dtype=float)


@dataclass(frozen=True)
class ArcPolygon:
    """Closed chain of arcs and segments, parametrized piecewise over [0, 1]."""
    pieces: tuple

    def points(self, t):
        t = np.asarray(t, dtype=float)
        m = len(self.pieces)
        idx = np.minimum((t * m).astype(int), m - 1)
        s = t * m - idx
        out = np.empty(t.shape, dtype=complex)
        for i, piece in enumerate(self.pieces):
            mask = idx == i
            if mask.any():
                out[mask] = piece.points(s[mask])
        return out

    @property
    def initial_samples(self):
        return 16 * len(self.pieces)


def annulus_sector(center, r_in, r_out, a0, a1) -> ArcPolygon:
    """Boundary of the annular sector r_in <= |z - center| <= r_out,
    angles a0..a1, traversed counterclockwise."""
    c = complex(center)
    return ArcPolygon((
        Arc(c, r_out, a0, a1),
        Segment(c + r_out * np.exp(1j * a1), c + r_in * np.exp(1j * a1)),
        Arc(c, r_in, a1, a0),
        Segment(c + r_in * np.exp(1j * a0), c + r_out * np.exp(1j * a0)),
    ))


@dataclass(frozen=True)
class WindingResult:
    value: int
    samples_used: int
    max_phase_step: float


def _wrap(d):
    return (d + math.pi) % TWO_PI - math.pi


def _sample(f, contour, extra_predicates=(), *, min_modulus=_MIN_MODULUS,
            max_samples=_MAX_SAMPLES):
    """Adaptively refine [0,1] until phase steps (of f and of every function
    in extra_predicates) drop below pi/2.  Returns (ts, value arrays)."""
    fns = (f,) + tuple(extra_predicates)
    n0 = getattr(contour, "initial_samples", 64)
    ts = np.linspace(0.0, 1.0, n0 + 1)
    vals = [np.asarray(fn(contour.points(ts)), dtype=complex) for fn in fns]
    while True:
        for v in vals:
            if not np.all(np.isfinite(v)):
                raise ZeroOnContour("non-finite value on contour (pole on the path?)")
            if np.abs(v).min() <= min_modulus:
                raise ZeroOnContour("function modulus fell below 1e-9 on the contour")
        bad = np.zeros(len(ts) - 1, dtype=bool)
        for v in vals:
            bad |= np.abs(_wrap(np.diff(np.angle(v)))) >= _STEP_LIMIT
        if not bad.any():
            return ts, vals
        if len(ts) + int(bad.sum()) > max_samples:
            raise NonConvergent(f"needs more than {max_samples} contour samples")
        i = np.nonzero(bad)[0]
        mids = 0.5 * (ts[i] + ts[i + 1])
        if np.any(ts[i + 1] - ts[i] < 1e-15):
            raise NonConvergent("phase step will not settle at float resolution")
        pts = contour.points(mids)
        order = np.argsort(np.concatenate([ts, mids]), kind="stable")
        ts = np.concatenate([ts, mids])[order]
        vals = [np.concatenate([v, np.asarray(fn(pts), dtype=complex)])[order]
                for fn, v in zip(fns, vals)]


def _turns(v):
    total = float(np.sum(_wrap(np.diff(np.angle(v)))))
    return total / TWO_PI


def winding(f, contour, *, min_modulus=_MIN_MODULUS, max_samples=_MAX_SAMPLES) -> WindingResult:
    """Winding number of f along the closed contour."""
    ts, (v,) = _sample(f, contour, min_modulus=min_modulus, max_samples=max_samples)
    steps = _wrap(np.diff(np.angle(v)))
    turns = float(np.sum(steps)) / TWO_PI
    value = int(round(turns))
    if abs(turns - value) > 0.05:
        raise NonConvergent(f"accumulated phase {turns:.4f} turns is not near an integer")
    return WindingResult(value, len(ts), float(np.abs(steps).max(initial=0.0)))


def poincare_index(f, z0, radius: float) -> int:
    """Index of the isolated exceptional point z0: the winding of f on a
    small circle around it (+1/-1 at regular zeros, -m at order-m poles)."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    return winding(f, Circle(complex(z0), radius)).value


@dataclass(frozen=True)
class RoucheResult:
    holds: bool
    min_margin: float
    winding_f: int
    winding_g: int


def rouche_check(f, g, contour, *, margin=1e-12) -> RoucheResult:
    """Test |f + g| < |f| + |g| strictly along the contour.

    When the inequality holds at every adaptive sample (with the given
    relative margin), the two winding numbers are equal and both are
    reported; a False result is a result, not an error.
    """
    ts, (vf, vg) = _sample(f, contour, (g,))
    denom = np.abs(vf) + np.abs(vg)
    rel = (denom - np.abs(vf + vg)) / denom
    min_margin = float(rel.min())
    holds = bool(min_margin > margin)
    wf = int(round(_turns(vf)))
    wg = int(round(_turns(vg)))
    if holds and wf != wg:
        raise AssertionError(f"inequality held but windings differ: {wf} != {wg}")
    return RoucheResult(holds, min_margin, wf, wg)


def encloses(contour, z) -> bool:
    """Whether the closed contour winds around the point z."""
    if isinstance(contour, Circle):
        return abs(z - contour.center) < contour.radius
    return winding(lambda w: w - z, contour).value != 0


@dataclass(frozen=True)
class AuditReport:
    winding: int
    sum_indices: int
    pole_orders: int
    match: bool

    @property
    def rhs(self):
        return self.sum_indices - self.pole_orders


def argument_principle_audit(f, census, contour) -> AuditReport:
    """Compare the contour winding of f with the census content inside it:
    sum of zero indices minus total pole order.  f must expose .function
    (the rational part) and census an iterable .zeros of records."""
    lhs = winding(f, contour).value
    inside = [rec for rec in census.zeros if encloses(contour, rec.z)]
    if any(rec.index is None for rec in inside):
        raise ValueError("cannot audit: census holds singular zeros with no index")
    s = sum(rec.index for rec in inside)
    orders = sum(p.order for p in f.function.poles() if encloses(contour, p.z))
    return AuditReport(lhs, s, orders, lhs == s - orders)
