"""Polynomials over C and R, with residual-certified root finding.

Coefficients are stored lowest degree first, so coeffs[k] multiplies z**k.
The zero polynomial is the empty coefficient tuple (degree -inf); it is
never represented as [0].
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.optimize import brentq

log = logging.getLogger(__name__)

# Trailing coefficients below _TRIM times the largest modulus are noise from
# earlier arithmetic and are stripped on construction.
_TRIM = 1e-14
_ROOT_RESIDUAL = 1e-10


def _horner(coeffs, z):
    """Evaluate sum(coeffs[k] * z**k) with Horner's scheme; z may be an array."""
    if len(coeffs) == 0:
        return np.zeros_like(np.asarray(z)) if np.ndim(z) else type(z)(0)
    acc = None
    for c in reversed(coeffs):
        acc = c if acc is None else acc * z + c
    return acc


class ComplexPolynomial:
    """Immutable dense polynomial with complex coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [complex(c) for c in coeffs]
        if cs:
            top = max(abs(c) for c in cs)
            if top == 0.0:
                cs = []
            else:
                while cs and abs(cs[-1]) < _TRIM * top:
                    cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("ComplexPolynomial is immutable")

    @property
    def degree(self):
        """Degree as an int; -inf for the zero polynomial."""
        return len(self.coeffs) - 1 if self.coeffs else -math.inf

    def __call__(self, z):
        if np.ndim(z):
            z = np.asarray(z, dtype=complex)
            if len(self.coeffs) == 0:
                return np.zeros(z.shape, dtype=complex)
            return _horner(self.coeffs, z)
        return complex(_horner(self.coeffs, complex(z))) if self.coeffs else 0j

    def derivative(self):
        return ComplexPolynomial([k * c for k, c in enumerate(self.coeffs)][1:])

    def __add__(self, other):
        other = other if isinstance(other, ComplexPolynomial) else ComplexPolynomial([other])
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for k, c in enumerate(b):
            out[k] += c
        return ComplexPolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return ComplexPolynomial([-c for c in self.coeffs])

    def __sub__(self, other):
        other = other if isinstance(other, ComplexPolynomial) else ComplexPolynomial([other])
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, ComplexPolynomial):
            return ComplexPolynomial([complex(other) * c for c in self.coeffs])
        if not self.coeffs or not other.coeffs:
            return ComplexPolynomial()
        out = [0j] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return ComplexPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        out = ComplexPolynomial([1])
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, ComplexPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"ComplexPolynomial({list(self.coeffs)!r})"

    def deflate(self, root):
        """Divide out (z - root), discarding the remainder."""
        if self.degree < 1:
            raise ValueError("nothing to deflate")
        out = []
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * root + c
            out.append(acc)
        out.pop()  # the final accumulator is the remainder p(root)
        return ComplexPolynomial(out[::-1])

    def roots(self):
        """All complex roots, via companion-matrix eigenvalues plus a Newton
        polish, certified by |p(root)| <= 1e-10 * max coefficient modulus."""
        if self.degree < 1:
            raise ValueError("undefined roots: need degree >= 1")
        desc = np.array(self.coeffs[::-1], dtype=complex)
        rts = np.roots(desc)
        dcs = self.derivative().coeffs
        for _ in range(3):
            pv = _horner(self.coeffs, rts)
            dv = _horner(dcs, rts) if dcs else np.zeros_like(rts)
            ok = np.abs(dv) > 0
            cand = rts - np.where(ok, pv / np.where(ok, dv, 1), 0)
            better = np.abs(_horner(self.coeffs, cand)) <= np.abs(pv)
            rts = np.where(better & ok, cand, rts)
        top = max(abs(c) for c in self.coeffs)
        res = np.abs(_horner(self.coeffs, rts))
        if not np.all(res <= _ROOT_RESIDUAL * top):
            raise ArithmeticError(
                f"root residual {res.max():.3e} exceeds {_ROOT_RESIDUAL * top:.3e}"
            )
        return [complex(r) for r in rts]


def coprime(p: ComplexPolynomial, q: ComplexPolynomial, tol: float = 1e-8) -> bool:
    """True when no root of p falls within tol of a root of q.

    The tolerance is scale-aware: it is multiplied by the largest root
    modulus when that exceeds one.
    """
    if p.degree < 1 or q.degree < 1:
        return True
    rp, rq = p.roots(), q.roots()
    scale = max(1.0, max(abs(r) for r in rp + rq))
    t = tol * scale
    return all(abs(a - b) >= t for a in rp for b in rq)


class RealPolynomial:
    """Dense polynomial with real coefficients, used for radial root scans."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [float(c) for c in coeffs]
        if cs:
            top = max(abs(c) for c in cs)
            if top == 0.0:
                cs = []
            else:
                while cs and abs(cs[-1]) < _TRIM * top:
                    cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("RealPolynomial is immutable")

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else -math.inf

    def __call__(self, x):
        if np.ndim(x):
            x = np.asarray(x, dtype=float)
            if len(self.coeffs) == 0:
                return np.zeros(x.shape)
            return _horner(self.coeffs, x)
        return float(_horner(self.coeffs, float(x))) if self.coeffs else 0.0

    def derivative(self):
        return RealPolynomial([k * c for k, c in enumerate(self.coeffs)][1:])

    def descartes_bound(self) -> int:
        """Upper bound on the number of positive real roots (sign variations)."""
        signs = [math.copysign(1, c) for c in self.coeffs if c != 0.0]
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    def __repr__(self):
        return f"RealPolynomial({list(self.coeffs)!r})"


def positive_real_roots(p: RealPolynomial, lo: float, hi: float, *, samples: int = 256,
                        max_refine: int = 9) -> list[float]:
    """Roots of p in the bracket [lo, hi], sorted ascending.

    Isolation is by sign scan at doubling resolution, each sign change then
    solved with Brent's method.  Roots of even multiplicity (no sign change)
    are not detected.  The returned count never exceeds the Descartes bound;
    an unbracketed scan logs a diagnostic and returns an empty list.
    """
    if not (lo < hi):
        raise ValueError("empty bracket")
    if p.degree < 1:
        raise ValueError("undefined roots: need degree >= 1")
    bound = p.descartes_bound()
    prev_count = -1
    roots: list[float] = []
    for level in range(max_refine):
        n = samples * 2 ** level
        xs = np.linspace(lo, hi, n + 1)
        vs = p(xs)
        roots = []
        for i in np.nonzero(np.diff(np.sign(vs)) != 0)[0]:
            a, b = float(xs[i]), float(xs[i + 1])
            if vs[i] == 0.0:
                roots.append(a)
            elif vs[i + 1] == 0.0:
                continue  # picked up as the left endpoint of the next cell
            else:
                roots.append(brentq(p, a, b, xtol=1e-15, rtol=8.9e-16))
        if vs[-1] == 0.0:
            roots.append(float(xs[-1]))
        # dedupe near-identical hits from adjacent cells
        roots.sort()
        merged = []
        for r in roots:
            if not merged or r - merged[-1] > 1e-13 * (1.0 + abs(r)):
                merged.append(r)
        roots = merged
        if len(roots) == bound or len(roots) == prev_count:
            break
        prev_count = len(roots)
    if len(roots) > bound:
        raise ArithmeticError(f"found {len(roots)} roots, above the Descartes bound {bound}")
    if not roots and p(lo) * p(hi) > 0:
        log.debug("positive_real_roots: not bracketed on [%g, %g]", lo, hi)
    return roots
