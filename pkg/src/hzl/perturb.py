"""Adding poles to f = R - conj(z) and accounting for the zeros that appear.

At a zero z0 where the first n-2 derivatives of R vanish (n >= 3), adding
eps/(z - z0) splits the zero into two rings of n zeros each, pinned between
radii sqrt(eps)/eta and eta*sqrt(eps) with eta = sqrt(n/(n-1)) whenever eps
stays below the thresholds computed here.  At other points the pole still
creates a predictable minimum number of zeros.  Reports pair the before and
after censuses so survival, creation, and destruction are explicit.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import contour
from .contour import Circle
from .harmonic import (DEDUP_TOL, SENSE_TOL, Disk, HarmonicLens, SenseClass, ZeroCensus,
                       ZeroRecord, find_zeros, is_extremal)
from .polynomial import RealPolynomial, positive_real_roots
from .rational import RationalFunction

_ZERO_TOL = 1e-8       # |f(z0)| below this (scale-aware) counts as "z0 is a zero"
_RING_FACTORS = (0.45, 0.62, 0.78, 0.9, 1.0, 1.1, 1.22, 1.45, 1.8, 2.4, 3.0)


def _max_workers(default: int = 2) -> int:
    """Parallelism cap; HZL_THREADS overrides the default."""
    raw = os.environ.get("HZL_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError as exc:
            raise ValueError("HZL_THREADS must be an integer") from exc
    return default


def _check_nc(n, c):
    if not isinstance(n, int) or n < 3:
        raise ValueError("n must be an integer >= 3")
    if c == 0:
        raise ValueError("c must be nonzero")


def eps_star(n: int, c) -> float:
    """Largest residue modulus for which the truncated local model
    c*w**(n-1) + eps/w - conj(w) still carries all 3n zeros."""
    _check_nc(n, c)
    a = abs(c)
    return (n - 2) / n * (2.0 / (n * a)) ** (2.0 / (n - 2))


def eps_sharp(n: int, c) -> float:
    """Stricter threshold that additionally pins the two new zero rings
    strictly between sqrt(eps)/eta and eta*sqrt(eps)."""
    _check_nc(n, c)
    a = abs(c)
    t2 = (1.0 / (n * a)) ** (2.0 / (n - 2)) * (n / (n - 1.0)) ** (n / (n - 2.0))
    t3 = (1.0 / (a * (n - 1.0))) ** (2.0 / (n - 2)) * ((n - 1.0) / n) ** (n / (n - 2.0))
    return min(eps_star(n, c), t2, t3)


def detect_order(R: RationalFunction, z0, cap: int = 20, tol: float = 1e-10):
    """Smallest n >= 2 with R', ..., R**(n-2) vanishing at z0 but not
    R**(n-1); returns (n, c) with c the first surviving Taylor coefficient."""
    coeffs = R.taylor(z0, cap + 1)
    scale = 1.0 + abs(coeffs[0])
    for k in range(1, cap + 1):
        if abs(coeffs[k]) > tol * scale:
            return k + 1, coeffs[k]
    raise ArithmeticError(f"no non-vanishing derivative of R at {z0} up to order {cap}")


@dataclass(frozen=True)
class PerturbationPlan:
    z0: complex
    n: int
    c: complex
    eta: float
    eps: float
    inner: float          # sqrt(eps) / eta
    mid: float            # sqrt(eps)
    outer: float          # eta * sqrt(eps)
    eps_star: float
    eps_sharp: float


def plan(f, z0, eps: float | None = None) -> PerturbationPlan:
    """Perturbation plan at a zero z0 of f = R - conj(z) with n >= 3.

    eps defaults to half of eps_sharp.  A point with non-vanishing first
    derivative is rejected and belongs to perturb_anywhere instead.
    """
    lens = f if isinstance(f, HarmonicLens) else HarmonicLens(f)
    z0 = complex(z0)
    if abs(lens(z0)) > _ZERO_TOL * (1.0 + abs(z0)):
        raise ValueError("z0 is not a zero of R - conj(z)")
    n, c = detect_order(lens.function, z0)
    if n == 2:
        raise ValueError("first derivative of R does not vanish at z0; use perturb_anywhere")
    es = eps_star(n, c)
    eh = eps_sharp(n, c)
    eps = 0.5 * eh if eps is None else float(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    eta = math.sqrt(n / (n - 1.0))
    se = math.sqrt(eps)
    return PerturbationPlan(z0, n, c, eta, eps, se / eta, se, se * eta, es, eh)


@dataclass(frozen=True)
class LocalModel:
    """The 3n zeros of c*w**(n-1) + eps/w - conj(w), grouped by radius."""
    n: int
    c: complex
    eps: float
    rho1: float
    rho2: float
    rho3: float
    ring1: tuple          # radius rho1, sense-preserving
    ring2: tuple          # radius rho2, sense-reversing
    ring3: tuple          # radius rho3, sense-preserving

    def zeros(self):
        return self.ring1 + self.ring2 + self.ring3

    def sense_modulus(self, w) -> float:
        """|d/dw of the analytic part| at w; >1 preserving, <1 reversing."""
        return abs((self.n - 1) * self.c * w ** (self.n - 2) - self.eps / w ** 2)


def local_model_zeros(n: int, c, eps: float) -> LocalModel:
    """Solve the local model exactly via its two radial polynomials.

    Radii come from a*rho**n + rho**2 - eps (one positive root, below
    sqrt(eps)) and a*rho**n - rho**2 + eps (two roots above sqrt(eps), which
    exist only when eps < eps_star).  A general complex c rotates every zero
    by exp(-i*arg(c)/n).
    """
    _check_nc(n, c)
    c = complex(c)
    a = abs(c)
    if not eps > 0:
        raise ValueError("eps must be positive")
    es = eps_star(n, c)
    if eps >= es:
        raise ValueError(f"no guarantee: eps = {eps:g} is not below eps_star = {es:g}")
    se = math.sqrt(eps)
    f_minus = RealPolynomial([-eps, 0.0, 1.0] + [0.0] * (n - 3) + [a])
    f_plus = RealPolynomial([eps, 0.0, -1.0] + [0.0] * (n - 3) + [a])
    lo_roots = positive_real_roots(f_minus, 0.0, se)
    hi = (2.0 / a) ** (1.0 / (n - 2))
    hi_roots = positive_real_roots(f_plus, se, hi * (1.0 + 1e-12))
    if len(lo_roots) != 1 or len(hi_roots) != 2:
        raise ArithmeticError(
            f"radial roots miscounted: {len(lo_roots)} below sqrt(eps), {len(hi_roots)} above"
        )
    rho1 = lo_roots[0]
    rho2, rho3 = hi_roots
    rot = cmath.exp(-1j * cmath.phase(c) / n)
    ring1 = tuple(rho1 * rot * cmath.exp(1j * (2 * k + 1) * math.pi / n) for k in range(n))
    ring2 = tuple(rho2 * rot * cmath.exp(2j * k * math.pi / n) for k in range(n))
    ring3 = tuple(rho3 * rot * cmath.exp(2j * k * math.pi / n) for k in range(n))
    model = LocalModel(n, c, eps, rho1, rho2, rho3, ring1, ring2, ring3)
    worst = max(abs(c * w ** n - abs(w) ** 2 + eps) for w in model.zeros())
    if worst > 1e-10:
        raise ArithmeticError(f"local model residual {worst:.3e} out of tolerance")
    return model


@dataclass(frozen=True)
class LinearModel:
    """Zeros of c*w + eps/w - conj(w) for real c > 0, c != 1."""
    c: float
    eps: float
    preserving: tuple     # conjugate pair on the imaginary axis
    reversing: tuple      # real pair, present only for c < 1

    def zeros(self):
        return self.preserving + self.reversing


def local_model_linear(c: float, eps: float) -> LinearModel:
    """Closed-form zeros of the first-order local model.

    c is the derivative modulus after rotating the residue to be real
    positive; c = 1 sits on the singular set and is refused.
    """
    c = float(c)
    if not c > 0:
        raise ValueError("c must be positive (rotate the model first)")
    if abs(c - 1.0) < 1e-12:
        raise ValueError("c = 1 is singular for the linear model")
    if not eps > 0:
        raise ValueError("eps must be positive")
    w = 1j * math.sqrt(eps / (1.0 + c))
    preserving = (w, -w)
    reversing = ()
    if c < 1.0:
        r = math.sqrt(eps / (1.0 - c))
        reversing = (r, -r)
    for p in preserving + reversing:
        if abs(c * p * p + eps - abs(p) ** 2) > 1e-12:
            raise ArithmeticError("linear model residual out of tolerance")
    return LinearModel(c, eps, preserving, reversing)


def higher_order_floor(order: int, index: int) -> int:
    """Minimum number of zeros created by a pole of the given order at a
    point of Poincare index +1, -1, or 0."""
    if not isinstance(order, int) or order < 1:
        raise ValueError("order must be a positive integer")
    return order + index


@dataclass(frozen=True)
class CensusDiff:
    """Before/after pairing: survivors matched by proximity and index."""
    matched: tuple
    created: tuple
    destroyed: tuple
    consumed: tuple
    pairing_radius: float
    exclusion: Disk


def census_diff(before: ZeroCensus, after: ZeroCensus, z0, *, exclusion_radius: float,
                pairing_cap: float | None = None) -> CensusDiff:
    """Pair zeros of `before` with their nearest same-index partner in
    `after`.

    The pairing radius is half the closest spacing among the before zeros
    (optionally capped); after-zeros inside the exclusion disk around z0
    are reserved for the created list, and a before-zero at z0 itself is
    reported as consumed rather than destroyed.
    """
    z0 = complex(z0)
    consumed = tuple(b for b in before.zeros if abs(b.z - z0) <= DEDUP_TOL * (1.0 + abs(z0)))
    rest = [b for b in before.zeros if b not in consumed]
    pts = [b.z for b in before.zeros]
    if len(pts) >= 2:
        rp = 0.5 * min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:])
    else:
        rp = exclusion_radius if exclusion_radius > 0 else 1.0
    if pairing_cap is not None:
        rp = min(rp, pairing_cap)
    candidates = [
        (j, a) for j, a in enumerate(after.zeros)
        if abs(a.z - z0) > exclusion_radius
    ]
    edges = sorted(
        (abs(b.z - a.z), i, j)
        for i, b in enumerate(rest)
        for j, a in candidates
        if b.index == a.index and abs(b.z - a.z) < rp
    )
    used_b: set[int] = set()
    used_a: set[int] = set()
    matched = []
    for _, i, j in edges:
        if i in used_b or j in used_a:
            continue
        used_b.add(i)
        used_a.add(j)
        matched.append((rest[i], after.zeros[j]))
    destroyed = tuple(b for i, b in enumerate(rest) if i not in used_b)
    created = tuple(a for j, a in enumerate(after.zeros) if j not in used_a)
    return CensusDiff(tuple(matched), created, destroyed, consumed, rp,
                      Disk(z0, exclusion_radius))


def _paired_census(lens, F, *, domain, density, rings, dedup_tol=DEDUP_TOL):
    def run(lns, rg):
        return find_zeros(lns, domain=domain, density=density, rings=rg,
                          dedup_tol=dedup_tol)
    with ThreadPoolExecutor(max_workers=_max_workers()) as ex:
        fut_b = ex.submit(run, lens, ())
        fut_a = ex.submit(run, F, rings)
        return fut_b.result(), fut_a.result()


def apply_pole_and_diff(lens: HarmonicLens, z0, residue, order: int = 1, *,
                        exclusion_radius: float, domain: Disk | None = None,
                        density: float | None = None, rings=(),
                        dedup_tol: float = DEDUP_TOL):
    """Add residue/(z - z0)**order, census both sides, and diff them."""
    z0 = complex(z0)
    F = HarmonicLens(lens.function.add_pole(z0, residue, order))
    if not rings:
        scale = abs(residue) ** (1.0 / (order + 1))
        rings = tuple((z0, f * scale) for f in _RING_FACTORS)
    before, after = _paired_census(lens, F, domain=domain, density=density, rings=rings,
                                   dedup_tol=dedup_tol)
    diff = census_diff(before, after, z0, exclusion_radius=exclusion_radius,
                       pairing_cap=10.0 * math.sqrt(abs(residue)))
    return F, before, after, diff


def created_near(diff: CensusDiff, z0, radius: float) -> int:
    """How many created zeros fall within `radius` of z0."""
    z0 = complex(z0)
    return sum(1 for rec in diff.created if abs(rec.z - z0) <= radius)


@dataclass(frozen=True)
class PerturbReport:
    plan: PerturbationPlan
    F: HarmonicLens
    before: ZeroCensus
    after: ZeroCensus
    diff: CensusDiff
    inner_preserving: int
    outer_reversing: int
    inner_disk_count: int
    winding_outer: int
    boundary_hits: tuple
    extremal: bool
    checks: dict
    passed: bool


def apply_and_verify(f, p: PerturbationPlan, *, domain: Disk | None = None,
                     density: float | None = None) -> PerturbReport:
    """Execute a plan as F = R + eps/(z - z0) and verify the predictions.

    Checks: at least n sense-preserving zeros in the open inner annulus, at
    least n sense-reversing in the open outer annulus, none in the closed
    inner disk, survivors matched with their index intact, and boundary
    winding -1 on the circle of radius eta*sqrt(eps).  Zeros within 1e-9 of
    an annulus boundary are flagged rather than silently binned.
    """
    lens = f if isinstance(f, HarmonicLens) else HarmonicLens(f)
    F = HarmonicLens(lens.function.add_pole(p.z0, p.eps, 1))
    return _verify_plan(lens, p, F, domain=domain, density=density)


def convex_and_verify(f, z0, eps: float, *, domain: Disk | None = None,
                      density: float | None = None) -> PerturbReport:
    """Blend toward a pole, F = (1 - eps) R + eps/(z - z0), and verify.

    Near z0 the blend looks exactly like the additive pole with the leading
    Taylor coefficient scaled by 1 - eps, so the usual plan radii and annulus
    checks carry over with c replaced by (1 - eps) c.
    """
    lens = f if isinstance(f, HarmonicLens) else HarmonicLens(f)
    z0 = complex(z0)
    if not 0.0 < eps < 1.0:
        raise ValueError("convex weight must lie strictly between 0 and 1")
    if abs(lens(z0)) > _ZERO_TOL * (1.0 + abs(z0)):
        raise ValueError("z0 is not a zero of R - conj(z)")
    n, c = detect_order(lens.function, z0)
    if n == 2:
        raise ValueError("first derivative of R does not vanish at z0; use perturb_anywhere")
    ceff = (1.0 - eps) * c
    eta = math.sqrt(n / (n - 1.0))
    se = math.sqrt(eps)
    p = PerturbationPlan(z0, n, ceff, eta, eps, se / eta, se, se * eta,
                         eps_star(n, ceff), eps_sharp(n, ceff))
    F = HarmonicLens(lens.function.convex_with_pole(z0, eps))
    return _verify_plan(lens, p, F, domain=domain, density=density)


def _verify_plan(lens: HarmonicLens, p: PerturbationPlan, F: HarmonicLens, *,
                 domain: Disk | None, density: float | None) -> PerturbReport:
    rings = tuple((p.z0, fac * p.mid) for fac in _RING_FACTORS)
    before, after = _paired_census(lens, F, domain=domain, density=density,
                                   rings=rings)
    diff = census_diff(before, after, p.z0, exclusion_radius=p.outer,
                       pairing_cap=10.0 * math.sqrt(p.eps))
    inner_pres = 0
    outer_rev = 0
    disk_count = 0
    hits = []
    for rec in after.zeros:
        d = abs(rec.z - p.z0)
        for edge in (p.inner, p.mid, p.outer):
            if abs(d - edge) <= 1e-9:
                hits.append(rec)
        if d <= p.inner:
            disk_count += 1
        elif d < p.mid:
            inner_pres += rec.sense is SenseClass.PRESERVING
        elif d < p.outer:
            outer_rev += rec.sense is SenseClass.REVERSING
    wind = contour.winding(F, Circle(p.z0, p.outer)).value
    indices_kept = all(b.index == a.index for b, a in diff.matched)
    checks = {
        "audited": (before.audit.interior_ok and before.audit.complete
                    and after.audit.interior_ok and after.audit.complete),
        "inner_preserving": inner_pres >= p.n,
        "outer_reversing": outer_rev >= p.n,
        "inner_disk_empty": disk_count == 0,
        "winding_outer": wind == -1,
        "survivors_matched": (len(diff.destroyed) == 0
                              and len(diff.matched) == before.count - 1),
        "indices_preserved": indices_kept,
    }
    return PerturbReport(
        plan=p, F=F, before=before, after=after, diff=diff,
        inner_preserving=inner_pres, outer_reversing=outer_rev,
        inner_disk_count=disk_count, winding_outer=wind,
        boundary_hits=tuple(hits), extremal=is_extremal(F, after),
        checks=checks, passed=all(checks.values()),
    )


@dataclass(frozen=True)
class AnywhereReport:
    case: str
    predicted: dict
    F: HarmonicLens
    before: ZeroCensus
    after: ZeroCensus
    diff: CensusDiff
    created_preserving: int
    created_reversing: int
    local_radius: float
    outside_before: int
    outside_after: int
    ok: bool


def perturb_anywhere(f, z0, eps: float, *, domain: Disk | None = None,
                     density: float | None = None) -> AnywhereReport:
    """Add eps/(z - z0) at an arbitrary point and compare with the
    predicted minimum creation count.

    Cases and minima: existing pole -> 0 created (totals equal); a point
    where f is nonzero -> >= 1 preserving; a sense-preserving zero -> >= 2
    preserving; a sense-reversing zero -> >= 2 preserving and 2 reversing.
    Points with |R'(z0)| = 1 are refused.
    """
    lens = f if isinstance(f, HarmonicLens) else HarmonicLens(f)
    z0 = complex(z0)
    if not eps > 0:
        raise ValueError("eps must be positive")
    R = lens.function
    nearest = []
    for pole in R.poles():
        nearest.append(abs(pole.z - z0))
    pole_hit = any(d <= 1e-9 * (1.0 + abs(z0)) for d in nearest)
    se = math.sqrt(eps)
    predicted: dict
    scales = [se]    # radii where the new zeros are expected, per case
    if pole_hit:
        case = "pole"
        predicted = {"preserving": 0, "reversing": 0, "equal_totals": True}
        r_loc = DEDUP_TOL * (1.0 + abs(z0))
    else:
        fz = lens(z0)
        if abs(fz) > _ZERO_TOL * (1.0 + abs(z0)):
            case = "nonzero"
            predicted = {"preserving": 1, "reversing": 0}
            scales = [eps / abs(fz)]
            r_loc = 10.0 * eps / abs(fz)
        else:
            m = abs(lens.deriv(z0))
            if abs(m - 1.0) <= SENSE_TOL:
                raise ValueError("unsupported case: |R'(z0)| = 1 at the target")
            if m < 1e-8:
                n, _ = detect_order(R, z0)
                case = "higher-order-zero"
                predicted = {"preserving": n, "reversing": n}
                r_loc = 1.5 * math.sqrt(n / (n - 1.0)) * se
            elif m > 1.0:
                case = "preserving-zero"
                predicted = {"preserving": 2, "reversing": 0}
                scales = [math.sqrt(eps / (1.0 + m)), se]
                r_loc = 3.0 * math.sqrt(eps / (1.0 + m))
            else:
                case = "reversing-zero"
                predicted = {"preserving": 2, "reversing": 2}
                scales = [math.sqrt(eps / (1.0 + m)), math.sqrt(eps / (1.0 - m))]
                r_loc = 3.0 * math.sqrt(eps / (1.0 - m))
    # keep the accounting disk clear of unrelated structure
    others = [d for d in nearest if d > 1e-9 * (1.0 + abs(z0))]
    if others:
        r_loc = min(r_loc, 0.45 * min(others))
    rings = tuple((z0, fac * s) for s in scales for fac in _RING_FACTORS)
    F, before, after, diff = apply_pole_and_diff(
        lens, z0, eps, 1, exclusion_radius=r_loc, domain=domain, density=density,
        rings=rings)
    created_p = sum(1 for rec in diff.created if rec.sense is SenseClass.PRESERVING)
    created_r = sum(1 for rec in diff.created if rec.sense is SenseClass.REVERSING)
    out_b = sum(1 for rec in before.zeros if abs(rec.z - z0) > r_loc)
    out_a = sum(1 for rec in after.zeros if abs(rec.z - z0) > r_loc)
    ok = (
        before.audit.interior_ok and before.audit.complete
        and after.audit.interior_ok and after.audit.complete
        and created_p >= predicted.get("preserving", 0)
        and created_r >= predicted.get("reversing", 0)
        and out_b == out_a
        and len(diff.destroyed) == 0
    )
    if predicted.get("equal_totals"):
        ok = ok and after.count == before.count
    return AnywhereReport(case, predicted, F, before, after, diff, created_p, created_r,
                          r_loc, out_b, out_a, ok)


@dataclass(frozen=True)
class SweepPoint:
    theta: float
    near_count: int
    census: ZeroCensus


@dataclass(frozen=True)
class SweepReport:
    z0: complex
    eps: float
    n: int
    eta: float
    points: tuple


def residue_sweep(f, z0, eps: float, thetas, *, density: float | None = None) -> SweepReport:
    """Census F_theta = R + eps*exp(i*theta)/(z - z0) - conj near z0.

    The census runs on the disk of radius 2*eta*sqrt(eps) around z0 for each
    angle, in parallel (HZL_THREADS caps the pool).  The near-zero count per
    angle is the headline number: rotating the residue away from the
    positive real axis makes the new zeros merge and vanish.
    """
    lens = f if isinstance(f, HarmonicLens) else HarmonicLens(f)
    z0 = complex(z0)
    if not eps > 0:
        raise ValueError("eps must be positive")
    n, _ = detect_order(lens.function, z0)
    eta = math.sqrt(n / max(n - 1.0, 1.0))
    se = math.sqrt(eps)
    dom = Disk(z0, 2.0 * eta * se)
    rings = tuple((z0, fac * se) for fac in _RING_FACTORS)

    def run(theta):
        residue = eps * cmath.exp(1j * float(theta))
        F = HarmonicLens(lens.function.add_pole(z0, residue, 1))
        census = find_zeros(F, domain=dom, density=density, rings=rings)
        return SweepPoint(float(theta), census.count, census)

    thetas = [float(t) for t in thetas]
    with ThreadPoolExecutor(max_workers=_max_workers(min(4, max(1, len(thetas))))) as ex:
        points = tuple(ex.map(run, thetas))
    return SweepReport(z0, eps, n, eta, points)


@dataclass(frozen=True)
class PipelineStage:
    action: dict
    lens: HarmonicLens
    census: ZeroCensus
    degree: int
    extremal: bool
    outside_guarantee: bool


@dataclass(frozen=True)
class PipelineReport:
    stages: tuple


def _critical_points(R: RationalFunction):
    d = R.derivative()
    if d.num.degree < 1:
        raise ValueError("R' has no finite zeros; nothing to align with")
    return d.num.roots()


def _select_zero(census: ZeroCensus, selector: str, R: RationalFunction) -> complex:
    if selector == "nearest-critical":
        crits = _critical_points(R)
        return min((rec.z for rec in census.zeros),
                   key=lambda z: min(abs(z - w) for w in crits))
    try:
        side, sense = selector.split("-")
    except ValueError:
        raise ValueError(f"unknown zero selector {selector!r}") from None
    if side not in ("leftmost", "rightmost") or sense not in ("preserving", "reversing"):
        raise ValueError(f"unknown zero selector {selector!r}")
    pool = [rec.z for rec in census.zeros if rec.sense.value == sense]
    if not pool:
        raise ValueError(f"no {sense} zeros to select from")
    key = lambda z: (z.real, z.imag)
    return min(pool, key=key) if side == "leftmost" else max(pool, key=key)


def iterate_pipeline(f, steps, *, density: float | None = None) -> PipelineReport:
    """Run a sequence of add_constant / add_pole steps with a census after
    each one.

    add_pole targets may be literal points or selectors ("leftmost-reversing",
    "rightmost-preserving", ..., "nearest-critical"); add_constant takes an
    explicit complex value or an "align" choice that shifts R so one of its
    critical points becomes a zero of R - conj(z).  A step whose eps exceeds
    eps_sharp at its target is flagged outside_guarantee but still executed.
    """
    lens = f if isinstance(f, HarmonicLens) else HarmonicLens(f)
    census = find_zeros(lens, density=density)
    stages = [PipelineStage({"action": "init"}, lens, census, lens.function.degree,
                            is_extremal(lens, census), False)]
    for step in steps:
        action = step.get("action")
        cur = stages[-1].lens
        cur_census = stages[-1].census
        outside = False
        if action == "add_constant":
            if "c" in step:
                raw = step["c"]
                c = complex(raw[0], raw[1]) if isinstance(raw, (list, tuple)) else complex(raw)
                echo = {"action": "add_constant", "c": [c.real, c.imag]}
            elif "align" in step:
                crits = _critical_points(cur.function)
                mode = step["align"]
                if mode == "leftmost":
                    w = min(crits, key=lambda z: (z.real, z.imag))
                elif mode == "rightmost":
                    w = max(crits, key=lambda z: (z.real, z.imag))
                elif mode == "nearest-zero":
                    w = min(crits, key=lambda z: min(abs(z - rec.z) for rec in cur_census.zeros))
                else:
                    raise ValueError(f"unknown align mode {mode!r}")
                c = w.conjugate() - cur.function(w)
                echo = {"action": "add_constant", "align": mode, "c": [c.real, c.imag],
                        "critical_point": [w.real, w.imag]}
            else:
                raise ValueError("add_constant needs 'c' or 'align'")
            nxt = HarmonicLens(cur.function.add_constant(c))
            census = find_zeros(nxt, density=density)
        elif action == "add_pole":
            raw = step.get("at")
            if isinstance(raw, str):
                target = _select_zero(cur_census, raw, cur.function)
            elif isinstance(raw, (list, tuple)):
                target = complex(raw[0], raw[1])
            else:
                target = complex(raw)
            eps = step.get("eps")
            try:
                n, c_lead = detect_order(cur.function, target)
            except (ArithmeticError, ValueError):
                n, c_lead = None, None
            if eps is None:
                if n is None or n < 3:
                    raise ValueError("add_pole needs an explicit eps at this target")
                eps = 0.5 * eps_sharp(n, c_lead)
            eps = float(eps)
            if n is not None and n >= 3:
                outside = eps > eps_sharp(n, c_lead)
            echo = {"action": "add_pole", "at": [target.real, target.imag], "eps": eps}
            if isinstance(raw, str):
                echo["selector"] = raw
            nxt = HarmonicLens(cur.function.add_pole(target, eps, 1))
            rings = tuple((target, fac * math.sqrt(eps)) for fac in _RING_FACTORS)
            census = find_zeros(nxt, density=density, rings=rings)
        else:
            raise ValueError(f"unknown pipeline action {action!r}")
        stages.append(PipelineStage(echo, nxt, census, nxt.function.degree,
                                    is_extremal(nxt, census), outside))
    return PipelineReport(tuple(stages))
