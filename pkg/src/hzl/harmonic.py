"""Zero censuses for f(z) = R(z) - conj(z).

The census seeds a damped Newton iteration over a disk (regular grid, rings
around every pole, a rim ring), deduplicates and classifies the converged
points, and then audits the result with the argument principle: the winding
of f along the domain boundary has to equal the sum of zero indices minus
the total pole order inside.  A second winding comparison against the
behaviour at infinity checks that nothing escaped the rim.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from . import contour
from .contour import TWO_PI, Circle, ZeroOnContour
from .rational import RationalFunction

SENSE_TOL = 1e-6          # half-width of the singular band around |R'| = 1
RESIDUAL_TOL = 1e-10      # census acceptance: |f(z)| <= RESIDUAL_TOL * (1 + |z|)
DEDUP_TOL = 1e-6          # merge radius: DEDUP_TOL * (1 + |z|)
_NEWTON_TOL = 1e-13
_UNIT_LEAD_TOL = 1e-9     # refusal band for a unit-modulus leading linear part


class SenseClass(str, enum.Enum):
    PRESERVING = "preserving"
    REVERSING = "reversing"
    SINGULAR = "singular"


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float


@dataclass(frozen=True)
class ZeroRecord:
    z: complex
    sense: SenseClass
    index: int | None
    residual: float


@dataclass(frozen=True)
class AuditInfo:
    winding: int | None
    sum_indices: int | None
    pole_orders: int
    at_infinity: int | None
    interior_ok: bool
    complete: bool
    note: str = ""


@dataclass(frozen=True)
class ZeroCensus:
    zeros: tuple
    domain: Disk
    density: float
    audit: AuditInfo
    retries: int
    bound_ok: bool

    @property
    def count(self) -> int:
        return len(self.zeros)


def _pv(coeffs, z):
    acc = np.full(z.shape, coeffs[-1], dtype=complex) if z.ndim else coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


class HarmonicLens:
    """Callable wrapper around R holding vectorized evaluation buffers."""

    def __init__(self, function: RationalFunction):
        if not isinstance(function, RationalFunction):
            raise TypeError("HarmonicLens wraps a RationalFunction")
        self.function = function
        self._pn = np.array(function.num.coeffs or (0j,), dtype=complex)
        self._pd = np.array(function.den.coeffs, dtype=complex)
        self._qn = np.array(function.num.derivative().coeffs or (0j,), dtype=complex)
        self._qd = np.array(function.den.derivative().coeffs or (0j,), dtype=complex)

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            out = _pv(self._pn, z) / _pv(self._pd, z) - np.conj(z)
        return complex(out[()]) if scalar else out

    def deriv(self, z):
        """R'(z) evaluated pointwise via the quotient rule."""
        scalar = np.ndim(z) == 0
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            q = _pv(self._pd, z)
            out = (_pv(self._qn, z) * q - _pv(self._pn, z) * _pv(self._qd, z)) / (q * q)
        return complex(out[()]) if scalar else out

    def residual_scale(self, z):
        """Roundoff scale of evaluating f at z.

        A residual below RESIDUAL_TOL times this is indistinguishable from
        an exact zero in double precision; near a pole the numerator terms
        are large against the small denominator, so the floor grows like
        sum |p_k| |z|**k / |q(z)| even though f itself stays moderate.
        """
        scalar = np.ndim(z) == 0
        z = np.asarray(z, dtype=complex)
        az = np.abs(z)
        with np.errstate(all="ignore"):
            mag = np.abs(_pv(np.abs(self._pn), az)) / np.abs(_pv(self._pd, z))
        out = 1.0 + az + np.where(np.isfinite(mag), mag, np.inf)
        return float(out[()]) if scalar else out

    def wirtinger_det(self, z):
        """Determinant of the real Jacobian of f: |R'(z)|**2 - 1."""
        d = np.abs(self.deriv(z))
        return d * d - 1.0

    def classify(self, z):
        """(SenseClass, witness) at z; the witness is the deciding |R'(z)|."""
        m = abs(self.deriv(z))
        if abs(m - 1.0) <= SENSE_TOL:
            return SenseClass.SINGULAR, m
        return (SenseClass.PRESERVING if m > 1.0 else SenseClass.REVERSING), m


def _winding_at_infinity(R: RationalFunction):
    """Expected boundary winding once the domain encloses every zero and
    pole; None with a reason when f has no limit at infinity."""
    dn, dd = R.num.degree, R.den.degree
    if dn < 0 or dn <= dd:
        return -1, ""
    if dn == dd + 1:
        a = abs(R.num.coeffs[-1] / R.den.coeffs[-1])
        if a > 1.0 + _UNIT_LEAD_TOL:
            return 1, ""
        if a < 1.0 - _UNIT_LEAD_TOL:
            return -1, ""
        return None, "leading linear part has unit modulus; no limit at infinity"
    return dn - dd, ""


def _default_domain(R: RationalFunction) -> Disk:
    poles = R.poles()
    if poles:
        total = sum(p.order for p in poles)
        c = sum(p.z * p.order for p in poles) / total
        dmax = max(abs(p.z - c) for p in poles)
    else:
        c, dmax = 0j, 0.0
    mn = max((abs(x) for x in R.num.coeffs), default=0.0)
    md = max(abs(x) for x in R.den.coeffs)
    ratio = mn / md
    if R.num.degree == R.den.degree:
        ratio = max(ratio, abs(R.num.coeffs[-1] / R.den.coeffs[-1]))
    return Disk(c, 2.0 * (1.0 + dmax + min(ratio, 50.0)))


def _auto_density(radius: float) -> float:
    # 40 seeds per unit length, but keep the grid between 64 and 256 points
    # across the diameter so tiny domains stay resolved and huge ones cheap
    return float(min(max(40.0, 64.0 / (2 * radius)), 256.0 / (2 * radius)))


def _seed_points(lens, domain, dens, rings, mult):
    c, r = domain.center, domain.radius
    edge = int(round(2 * r * dens)) + 1
    edge = max(9, min(edge, 1025))
    xs = np.linspace(-r, r, edge)
    X, Y = np.meshgrid(xs, xs)
    g = (X + 1j * Y).ravel()
    parts = [c + g[np.abs(g) <= r]]
    for p in lens.function.poles():
        s = 1.0 + abs(p.z)
        radii = s * np.logspace(-4.0, 0.35, 15)
        radii = radii[radii <= 1.2 * r]
        if len(radii):
            ang = np.exp(1j * np.linspace(0.0, TWO_PI, 48 * mult, endpoint=False))
            parts.append((p.z + radii[:, None] * ang[None, :]).ravel())
    rim_n = int(min(4096, max(128, TWO_PI * r * dens)))
    parts.append(c + 0.985 * r * np.exp(1j * np.linspace(0.0, TWO_PI, rim_n, endpoint=False)))
    for rc, rr in rings:
        ang = np.exp(1j * np.linspace(0.0, TWO_PI, 96 * mult, endpoint=False))
        parts.append(complex(rc) + float(rr) * ang)
    return np.concatenate(parts)


def _newton(lens, seeds, center, escape, iters=80, halvings=30):
    """Damped Newton on the two real equations behind f(z) = 0.

    The step solves the local linearization a*dz + b*conj(dz) = -f with
    a = R'(z), b = -1; it is halved while |f| fails to decrease.  Returns
    the converged points.
    """
    z = np.array(seeds, dtype=complex)
    f = lens(z)
    af = np.abs(f)
    alive = np.isfinite(af)
    done = np.zeros(len(z), dtype=bool)
    for _ in range(iters):
        act = np.nonzero(alive & ~done)[0]
        if len(act) == 0:
            break
        za, fa, afa = z[act], f[act], af[act]
        rp = lens.deriv(za)
        det = np.abs(rp) ** 2 - 1.0
        ok = np.isfinite(rp) & (np.abs(det) > 1e-300)
        alive[act[~ok]] = False
        step = np.where(ok, -(np.conj(fa) + np.conj(rp) * fa) / np.where(ok, det, 1.0), 0.0)
        t = np.ones(len(act))
        zn = za + step
        fn = lens(zn)
        good = np.isfinite(fn) & (np.abs(fn) <= afa)
        bad = ~good & ok
        for _h in range(halvings):
            if not bad.any():
                break
            t[bad] *= 0.5
            zn[bad] = za[bad] + t[bad] * step[bad]
            fb = lens(zn[bad])
            fn[bad] = fb
            good[bad] = np.isfinite(fb) & (np.abs(fb) <= afa[bad])
            bad = ~good & ok
        alive[act[bad]] = False          # wedged in a local minimum of |f|
        z[act] = zn
        f[act] = fn
        af[act] = np.abs(fn)
        alive[act] &= np.abs(zn - center) <= escape
        done[act] = good & (np.abs(fn) <= _NEWTON_TOL * lens.residual_scale(zn))
    pts = z[done & alive]
    # two undamped polish steps for the survivors
    for _ in range(2):
        if len(pts) == 0:
            break
        fz = lens(pts)
        rp = lens.deriv(pts)
        det = np.abs(rp) ** 2 - 1.0
        with np.errstate(all="ignore"):
            cand = pts - (np.conj(fz) + np.conj(rp) * fz) / det
        better = np.isfinite(cand) & (np.abs(lens(cand)) <= np.abs(fz))
        pts = np.where(better, cand, pts)
    return pts


def _dedup(lens, pts, dedup_tol):
    res = np.abs(lens(pts))
    keep = np.isfinite(res) & (res <= RESIDUAL_TOL * lens.residual_scale(pts))
    pts, res = pts[keep], res[keep]
    if len(pts) == 0:
        return []
    scaled = pts / (1.0 + np.abs(pts))
    key = np.round(scaled.real, 10) + 1j * np.round(scaled.imag, 10)
    _, first = np.unique(key, return_index=True)
    pts, res = pts[first], res[first]
    reps = []
    for i in np.argsort(res):
        zi = complex(pts[i])
        tol_i = dedup_tol * (1.0 + abs(zi))
        if all(abs(zi - zr) >= tol_i for zr, _ in reps):
            reps.append((zi, float(res[i])))
    return reps


def _classify_records(lens, reps):
    records = []
    for z, res in reps:
        sense, _ = lens.classify(z)
        index = None
        if sense is SenseClass.PRESERVING:
            index = 1
        elif sense is SenseClass.REVERSING:
            index = -1
        records.append(ZeroRecord(z, sense, index, res))
    records.sort(key=lambda rec: (round(rec.z.real, 12), round(rec.z.imag, 12)))
    return records


def find_zeros(lens: HarmonicLens, domain: Disk | None = None, density: float | None = None,
               *, dedup_tol: float = DEDUP_TOL, rings=(), max_retries: int = 3,
               grow_retries: int = 4) -> ZeroCensus:
    """Audited zero census of f = R - conj over a disk.

    With no domain given, a disk wide enough for every zero and pole is
    estimated and grown whenever the boundary winding disagrees with the
    behaviour at infinity.  A mismatch in the interior audit doubles the
    seed density and retries.  `rings` adds extra seed circles
    (center, radius), useful when zeros cluster at a known scale.
    """
    R = lens.function
    if R.degree < 1:
        raise ValueError("census needs deg(R) >= 1")
    auto = domain is None
    dom = _default_domain(R) if auto else Disk(complex(domain.center), float(domain.radius))
    dens = _auto_density(dom.radius) if density is None else float(density)
    at_inf, refusal = _winding_at_infinity(R)

    attempts = 0
    grows = 0
    records: list[ZeroRecord] = []
    V = None
    sum_ind: int | None = None
    orders = 0
    interior_ok = False
    complete = False
    note = refusal
    while True:
        mult = 2 ** attempts
        seeds = _seed_points(lens, dom, dens * mult, rings, mult)
        pts = _newton(lens, seeds, dom.center, escape=3.0 * dom.radius + 10.0)
        reps = _dedup(lens, pts, dedup_tol)

        V = None
        for _ in range(6):
            inside = [(z, r) for z, r in reps if abs(z - dom.center) <= dom.radius]
            try:
                V = contour.winding(lens, Circle(dom.center, dom.radius)).value
                break
            except ZeroOnContour:
                dom = Disk(dom.center, dom.radius * 1.02937)
        records = _classify_records(lens, inside)
        orders = sum(p.order for p in R.poles() if abs(p.z - dom.center) < dom.radius)
        singular = any(rec.sense is SenseClass.SINGULAR for rec in records)
        sum_ind = None if singular else sum(rec.index for rec in records)
        if V is None:
            interior_ok = False
            complete = False
            note = (note + "; " if note else "") + "boundary winding unavailable"
            break
        interior_ok = (sum_ind is not None) and (V == sum_ind - orders)
        complete = (at_inf is not None) and (V == at_inf)
        if singular:
            note = (note + "; " if note else "") + "singular zeros present, audit indeterminate"
            break
        if not interior_ok and attempts < max_retries:
            attempts += 1
            continue
        if not complete and at_inf is not None and auto and grows < grow_retries:
            dom = Disk(dom.center, dom.radius * 1.6)
            if density is None:
                dens = _auto_density(dom.radius)
            grows += 1
            continue
        break

    deg = R.degree
    bound_ok = (
        deg >= 2 and interior_ok and complete
        and len(records) <= 5 * (deg - 1)
    )
    audit = AuditInfo(V, sum_ind, orders, at_inf, interior_ok, complete, note)
    return ZeroCensus(tuple(records), dom, dens, audit, attempts + grows, bound_ok)


def is_regular(lens: HarmonicLens, census: ZeroCensus | None = None) -> bool:
    """True when every zero has |R'| bounded away from 1 (no singular zeros)."""
    if lens.function.degree < 2:
        raise ValueError("sense regularity is defined for deg(R) >= 2")
    if census is None:
        census = find_zeros(lens)
    return all(rec.sense is not SenseClass.SINGULAR for rec in census.zeros)


def is_extremal(lens: HarmonicLens, census: ZeroCensus) -> bool:
    """Audited census, deg >= 2, and the zero count hits 5*(deg - 1)."""
    deg = lens.function.degree
    return (
        deg >= 2 and census.audit.interior_ok and census.audit.complete
        and census.count == 5 * (deg - 1)
    )


def census_to_dict(census: ZeroCensus) -> dict:
    return {
        "zeros": [
            {
                "z": [rec.z.real, rec.z.imag],
                "sense": rec.sense.value,
                "index": rec.index,
                "residual": rec.residual,
            }
            for rec in census.zeros
        ],
        "audit": {
            "winding": census.audit.winding,
            "sum_indices": census.audit.sum_indices,
            "pole_orders": census.audit.pole_orders,
            "at_infinity": census.audit.at_infinity,
            "interior_ok": census.audit.interior_ok,
            "complete": census.audit.complete,
            "note": census.audit.note,
            "poles": [],  # filled by census_to_json when the lens is known
        },
        "domain": {"center": [census.domain.center.real, census.domain.center.imag],
                   "radius": census.domain.radius},
        "density": census.density,
        "retries": census.retries,
        "bound_ok": census.bound_ok,
        "count": census.count,
    }


def census_to_json(census: ZeroCensus, lens: HarmonicLens | None = None) -> str:
    data = census_to_dict(census)
    if lens is not None:
        data["audit"]["poles"] = [
            {"z": [p.z.real, p.z.imag], "order": p.order}
            for p in lens.function.poles()
            if abs(p.z - census.domain.center) < census.domain.radius
        ]
    return json.dumps(data, sort_keys=True)


def census_from_json(text: str) -> ZeroCensus:
    data = json.loads(text)
    zeros = tuple(
        ZeroRecord(complex(*item["z"]), SenseClass(item["sense"]), item["index"],
                   item["residual"])
        for item in data["zeros"]
    )
    a = data["audit"]
    audit = AuditInfo(a["winding"], a["sum_indices"], a["pole_orders"], a["at_infinity"],
                      a["interior_ok"], a["complete"], a.get("note", ""))
    dom = Disk(complex(*data["domain"]["center"]), data["domain"]["radius"])
    return ZeroCensus(zeros, dom, data["density"], audit, data["retries"], data["bound_ok"])
