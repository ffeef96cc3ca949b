"""Rational functions R = p/q: evaluation, poles, Taylor data, pole surgery.

Numerator and denominator are kept coprime; construction rejects inputs
that share a root, while make() deflates them (with a warning) instead.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .polynomial import ComplexPolynomial, coprime

# Returned by eval at a point where the denominator vanishes to working
# precision; keeps pole hits distinguishable from ordinary large values.
POLE_MARKER = complex(math.inf, math.inf)

_POLE_TOL = 1e-14
_MERGE_TOL = 1e-8


def is_pole_value(w) -> bool:
    return not (math.isfinite(w.real) and math.isfinite(w.imag))


def _refine_multiple(q, z0, order, radius):
    """Newton-polish the center of an order-m root cluster of q.

    Eigenvalue roots of an order-m factor scatter by ~eps**(1/m), and their
    centroid keeps an O(eps**(2/m)) bias. The (m-1)th derivative has a simple
    root at the same point, so Newton on it converges quadratically. Falls
    back to the centroid if the iteration leaves the cluster neighbourhood.
    """
    d = q
    for _ in range(order - 1):
        d = d.derivative()
    dd = d.derivative()
    z = z0
    for _ in range(8):
        dv = dd(z)
        if dv == 0:
            break
        step = d(z) / dv
        z = z - step
        if abs(step) < 1e-15 * (1.0 + abs(z)):
            break
    if abs(z - z0) <= 10.0 * radius:
        return z
    return z0


@dataclass(frozen=True)
class Pole:
    z: complex
    order: int


class RationalFunction:
    """Quotient of two coprime complex polynomials.

    The derivative and the pole list are computed lazily and cached; the
    instance itself is treated as immutable.
    """

    def __init__(self, num, den, *, _checked=False):
        num = num if isinstance(num, ComplexPolynomial) else ComplexPolynomial(num)
        den = den if isinstance(den, ComplexPolynomial) else ComplexPolynomial(den)
        if den.degree < 0:
            raise ValueError("zero denominator")
        if num.degree < 0:
            num, den = ComplexPolynomial(), ComplexPolynomial([1])
        if not _checked and not coprime(num, den):
            raise ValueError("numerator and denominator share a root; use make()")
        self.num = num
        self.den = den
        self._deriv = None
        self._poles = None

    @classmethod
    def make(cls, num, den, *, warn=True):
        """Build p/q, deflating any shared roots and normalizing the scale.

        Both polynomials are divided by the largest denominator coefficient
        so evaluation stays well conditioned.
        """
        num = num if isinstance(num, ComplexPolynomial) else ComplexPolynomial(num)
        den = den if isinstance(den, ComplexPolynomial) else ComplexPolynomial(den)
        if den.degree < 0:
            raise ValueError("zero denominator")
        while num.degree >= 1 and den.degree >= 1 and not coprime(num, den):
            rn, rd = num.roots(), den.roots()
            scale = max(1.0, max(abs(r) for r in rn + rd))
            pair = min(((a, b) for a in rn for b in rd), key=lambda ab: abs(ab[0] - ab[1]))
            if abs(pair[0] - pair[1]) >= _MERGE_TOL * scale:
                break
            shared = 0.5 * (pair[0] + pair[1])
            if warn:
                warnings.warn(f"deflating shared root near {shared:.6g}", stacklevel=2)
            num = num.deflate(shared)
            den = den.deflate(shared)
        s = max(abs(c) for c in den.coeffs)
        num = num * (1.0 / s)
        den = den * (1.0 / s)
        return cls(num, den, _checked=True)

    @property
    def degree(self):
        return max(self.num.degree, self.den.degree)

    def __call__(self, z):
        """R(z); arrays pass through with inf/nan at poles, scalars return
        POLE_MARKER when |den(z)| < 1e-14 * (1 + |num(z)|)."""
        if np.ndim(z):
            z = np.asarray(z, dtype=complex)
            with np.errstate(divide="ignore", invalid="ignore"):
                nv = self.num(z)
                dv = self.den(z)
                out = nv / dv
            out = np.where(np.abs(dv) < _POLE_TOL * (1.0 + np.abs(nv)), POLE_MARKER, out)
            return out
        z = complex(z)
        nv = self.num(z)
        dv = self.den(z)
        if abs(dv) < _POLE_TOL * (1.0 + abs(nv)):
            return POLE_MARKER
        return nv / dv

    def derivative(self) -> "RationalFunction":
        """d/dz (p/q) by the quotient rule, reduced to coprime form."""
        if self._deriv is None:
            p, q = self.num, self.den
            u = p.derivative() * q - p * q.derivative()
            self._deriv = RationalFunction.make(u, q * q, warn=False)
        return self._deriv

    def poles(self) -> list[Pole]:
        """Denominator roots clustered into (location, order) pairs."""
        if self._poles is None:
            if self.den.degree < 1:
                self._poles = []
            else:
                rts = self.den.roots()
                scale = max(1.0, max(abs(r) for r in rts))
                groups: list[list[complex]] = []
                for r in sorted(rts, key=lambda w: (w.real, w.imag)):
                    for g in groups:
                        if abs(r - g[0]) < _MERGE_TOL * scale:
                            g.append(r)
                            break
                    else:
                        groups.append([r])
                self._poles = []
                for g in groups:
                    z0 = sum(g) / len(g)
                    if len(g) > 1:
                        z0 = _refine_multiple(
                            self.den, z0, len(g), _MERGE_TOL * scale
                        )
                    self._poles.append(Pole(z0, len(g)))
        return list(self._poles)

    def taylor(self, z0, count: int):
        """First `count` Taylor coefficients of R about z0.

        Uses the exact recursion for derivatives of p/q**m (numerators only
        grow linearly in degree), so no finite differencing is involved.
        Raises when z0 sits on or next to a pole.
        """
        if not (1 <= count <= 64):
            raise ValueError("count must be in 1..64")
        z0 = complex(z0)
        q0 = self.den(z0)
        n0 = self.num(z0)
        if abs(q0) < 1e-12 * (1.0 + abs(n0)):
            raise ValueError("expansion point is at or near a pole")
        out = []
        u = self.num
        dq = self.den.derivative()
        fact = 1.0
        qpow = 1.0 + 0j
        for k in range(count):
            qpow *= q0
            out.append(u(z0) / (fact * qpow))
            u = u.derivative() * self.den - (k + 1) * (u * dq)
            fact *= k + 1
        return out

    def add_pole(self, z0, residue, order: int = 1) -> "RationalFunction":
        """R + residue / (z - z0)**order.

        A new pole raises the degree by `order`; at an existing pole the
        orders merge after deflation.
        """
        if not isinstance(order, int) or order < 1:
            raise ValueError("order must be a positive integer")
        if residue == 0:
            raise ValueError("residue must be nonzero")
        z0 = complex(z0)
        shift = ComplexPolynomial([-z0, 1]) ** order
        num = self.num * shift + complex(residue) * self.den
        den = self.den * shift
        out = RationalFunction.make(num, den, warn=False)
        fresh = abs(self.den(z0)) > 1e-12 * (1.0 + abs(self.num(z0)))
        if fresh and out.degree != self.degree + order:
            raise ArithmeticError(
                f"degree {out.degree} after adding a fresh order-{order} pole to "
                f"degree {self.degree}; cancellation went wrong"
            )
        return out

    def convex_with_pole(self, z0, eps: float) -> "RationalFunction":
        """(1 - eps) * R + eps / (z - z0) for 0 < eps < 1."""
        if not (0.0 < eps < 1.0):
            raise ValueError("eps must lie strictly between 0 and 1")
        z0 = complex(z0)
        shift = ComplexPolynomial([-z0, 1])
        num = (1.0 - eps) * (self.num * shift) + eps * self.den
        den = self.den * shift
        return RationalFunction.make(num, den, warn=False)

    def add_constant(self, c) -> "RationalFunction":
        # p/q + c stays coprime: a shared root of p + c*q and q would be a root of p
        return RationalFunction(self.num + complex(c) * self.den, self.den, _checked=True)

    def as_dict(self) -> dict:
        return {
            "num": [[c.real, c.imag] for c in self.num.coeffs],
            "den": [[c.real, c.imag] for c in self.den.coeffs],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict())

    @classmethod
    def from_json(cls, data) -> "RationalFunction":
        """Accepts the JSON text or the already-parsed dict."""
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        num = ComplexPolynomial([complex(re, im) for re, im in data["num"]])
        den = ComplexPolynomial([complex(re, im) for re, im in data["den"]])
        return cls(num, den)

    def __repr__(self):
        return f"RationalFunction(num={list(self.num.coeffs)!r}, den={list(self.den.coeffs)!r})"


def rhie_base(d: int, r: float) -> RationalFunction:
    """z**(d-1) / (z**d - r**d): d poles on a circle of radius r, plus the
    point at the origin where the first d-2 derivatives vanish."""
    if not isinstance(d, int) or d < 2:
        raise ValueError("d must be an integer >= 2")
    if not r > 0:
        raise ValueError("r must be positive")
    num = [0.0] * (d - 1) + [1.0]
    den = [-(r ** d)] + [0.0] * (d - 1) + [1.0]
    return RationalFunction(num, den, _checked=True)


def mpw_radius(d: int) -> float:
    """Largest pole-circle radius for which the unperturbed construction
    keeps its full 3d+1 zeros; valid for d >= 3."""
    if not isinstance(d, int) or d < 3:
        raise ValueError("d must be an integer >= 3")
    return math.sqrt((d - 2) / d) * (2.0 / (d - 2)) ** (1.0 / d)
