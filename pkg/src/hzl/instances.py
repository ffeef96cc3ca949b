"""Constructions of concrete rational functions used across the tests and CLI.

The degree-2 fitting trick: prescribing f(z_k) = 0 at five points gives five
linear conditions p(z_k) - conj(z_k) q(z_k) = 0 on the six coefficients of
p and q, so a null vector of the 5x6 system yields R = p/q with all five
points on the zero set.  Since a degree-2 function admits at most five
zeros, any nondegenerate fit is automatically extremal.
"""

from __future__ import annotations

import numpy as np

from .harmonic import HarmonicLens, find_zeros, is_extremal
from .polynomial import ComplexPolynomial
from .rational import RationalFunction


def fit_deg2_through(points) -> RationalFunction:
    """Degree-2 rational function whose lens vanishes at five given points."""
    pts = [complex(z) for z in points]
    if len(pts) != 5:
        raise ValueError("need exactly five points")
    rows = []
    for z in pts:
        zb = z.conjugate()
        rows.append([1.0, z, z * z, -zb, -zb * z, -zb * z * z])
    A = np.array(rows, dtype=complex)
    _, s, vh = np.linalg.svd(A)
    sol = vh[-1].conj()
    num = sol[:3]
    den = sol[3:]
    if np.linalg.norm(den) < 1e-10 * np.linalg.norm(sol):
        raise ArithmeticError("fit degenerated to a polynomial condition")
    R = RationalFunction.make(ComplexPolynomial(num), ComplexPolynomial(den))
    if R.degree != 2:
        raise ArithmeticError(f"fit collapsed to degree {R.degree}")
    return R


def random_extremal_deg2(seed: int, attempts: int = 64):
    """Search random five-point configurations until the fitted degree-2
    function carries exactly five zeros with clean audits.

    Returns (lens, census).
    """
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        pts = rng.uniform(-1.0, 1.0, size=(5, 2)) @ np.array([1.0, 1j])
        spread = min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:])
        if spread < 0.3:
            continue
        try:
            R = fit_deg2_through(pts)
        except ArithmeticError:
            continue
        lens = HarmonicLens(R)
        if max(abs(lens(z)) for z in pts) > 1e-8:
            continue
        try:
            census = find_zeros(lens)
        except ArithmeticError:
            continue
        if census.count == 5 and is_extremal(lens, census):
            return lens, census
    raise ArithmeticError(f"no extremal degree-2 instance found in {attempts} attempts")


def random_rational(seed: int, num_degree: int, den_degree: int,
                    scale: float = 1.0) -> RationalFunction:
    """Random coprime rational function with standard-normal coefficients."""
    if num_degree < 0 or den_degree < 0:
        raise ValueError("degrees must be nonnegative")
    rng = np.random.default_rng(seed)

    def draw(deg):
        c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        c[-1] += 0.5 * np.sign(c[-1].real or 1.0)   # keep the lead away from 0
        return c * scale

    return RationalFunction.make(ComplexPolynomial(draw(num_degree)),
                                 ComplexPolynomial(draw(den_degree)))


# Seed whose degree-2 fit survives the whole alignment pipeline below with
# every stage extremal; found by direct search over small seeds.
PIPELINE_SEED = 0

PIPELINE_STEPS = (
    {"action": "add_constant", "align": "nearest-zero"},
    {"action": "add_pole", "at": "nearest-critical"},
    {"action": "add_constant", "align": "nearest-zero"},
    {"action": "add_pole", "at": "nearest-critical"},
)
