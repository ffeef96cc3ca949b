"""End-to-end acceptance run: twelve numbered checks, one line each.

Every check prints `criterion N: PASS/FAIL - detail` (conftest repeats the
lines in a terminal section at the end of the run), asserts its claim at the
stated tolerance, and enforces its wall-clock budget.
"""

import cmath
import math
import time

import numpy as np
import pytest

from hzl.contour import (Circle, NonConvergent, ZeroOnContour, poincare_index,
                         winding)
from hzl.harmonic import (HarmonicLens, SenseClass, find_zeros, is_extremal,
                          is_regular)
from hzl.instances import PIPELINE_SEED, random_extremal_deg2, random_rational
from hzl.perturb import (apply_and_verify, apply_pole_and_diff,
                         convex_and_verify, created_near, detect_order,
                         eps_sharp, higher_order_floor, local_model_zeros,
                         perturb_anywhere, plan, residue_sweep)
from hzl.polynomial import ComplexPolynomial
from hzl.portrait import chromatic_index
from hzl.rational import RationalFunction, rhie_base

_LINES = []


def _record(num: int, ok: bool, detail: str):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}"
    _LINES.append(line)
    print(line)
    assert ok, line


def _dmin(z0, census, lens):
    """Distance from z0 to the nearest other zero or pole."""
    others = [r.z for r in census.zeros if abs(r.z - z0) > 1e-9]
    others += [p.z for p in lens.function.poles() if abs(p.z - z0) > 1e-9]
    return min(abs(z0 - w) for w in others) if others else 1.0


def test_criterion_01_random_functions_respect_bound():
    t0 = time.time()
    combos = [(2, 2), (1, 2), (3, 3), (2, 3), (4, 4), (3, 4), (5, 5), (4, 5)]
    audited = 0
    tried = 0
    seed = 0
    violations = []
    while audited < 200 and seed < 2000:
        nd, dd = combos[audited % len(combos)]
        R = random_rational(seed, nd, dd)
        seed += 1
        tried += 1
        lens = HarmonicLens(R)
        try:
            census = find_zeros(lens)
        except ArithmeticError:
            continue
        if not (census.audit.interior_ok and census.audit.complete
                and is_regular(lens, census)):
            continue
        if census.count > 5 * (R.degree - 1):
            violations.append((seed - 1, R.degree, census.count))
        audited += 1
    dt = time.time() - t0
    ok = audited == 200 and not violations and dt < 300.0
    _record(1, ok,
            f"200 audited random functions of degree 2-5 ({tried} draws) all "
            f"satisfy count <= 5(d-1); violations={violations} "
            f"({dt:.1f}s, limit 300s)")


def test_criterion_02_pole_ring_degree_2():
    t0 = time.time()
    lens = HarmonicLens(rhie_base(2, 0.5))
    census = find_zeros(lens)
    extremal = is_extremal(lens, census)
    dt = time.time() - t0
    ok = census.count == 5 and extremal and dt < 5.0
    _record(2, ok,
            f"degree-2 pole ring: {census.count} zeros, extremal={extremal} "
            f"({dt:.2f}s, limit 5s)")


def test_criterion_03_pole_ring_degree_7():
    t0 = time.time()
    lens = HarmonicLens(rhie_base(7, 0.5))
    census = find_zeros(lens)
    dt = time.time() - t0
    ok = census.count == 22 and census.audit.complete and dt < 30.0
    _record(3, ok,
            f"degree-7 pole ring: {census.count} zeros (3d+1 = 22) "
            f"({dt:.1f}s, limit 30s)")


def test_criterion_04_convex_blend_reaches_maximum():
    t0 = time.time()
    lens = HarmonicLens(rhie_base(7, 0.7))
    rep = convex_and_verify(lens, 0.0, 0.15)
    # at ring radius 0.5 the same weight sits outside the sharp threshold
    # and the count stalls at 21; record that contrast
    narrow = HarmonicLens(rhie_base(7, 0.5).convex_with_pole(0j, 0.15))
    narrow_count = find_zeros(narrow).count
    dt = time.time() - t0
    ok = (rep.passed and rep.extremal and rep.before.count == 22
          and rep.after.count == 35 and rep.plan.eps_sharp > 0.15
          and narrow_count == 21 and dt < 60.0)
    _record(4, ok,
            f"convex blend (weight 0.15, ring 0.7): {rep.before.count} -> "
            f"{rep.after.count} zeros = 5(d-1), winding audit passed={rep.passed}, "
            f"extremal={rep.extremal}; ring 0.5 stalls at {narrow_count} "
            f"({dt:.1f}s, limit 60s)")


@pytest.fixture(scope="module")
def ring_reports():
    reports = {}
    t0 = time.time()
    for d in (3, 5, 7):
        lens = HarmonicLens(rhie_base(d, 0.5))
        reports[d] = apply_and_verify(lens, plan(lens, 0.0))
    return reports, time.time() - t0


def test_criterion_05_annulus_structure(ring_reports):
    reports, dt = ring_reports
    bad = []
    for d, rep in reports.items():
        if not (rep.inner_preserving >= d and rep.outer_reversing >= d
                and rep.inner_disk_count == 0 and rep.winding_outer == -1
                and not rep.boundary_hits):
            bad.append((d, rep.inner_preserving, rep.outer_reversing,
                        rep.inner_disk_count, rep.winding_outer))
    ok = not bad and dt < 120.0
    counts = {d: (r.inner_preserving, r.outer_reversing) for d, r in reports.items()}
    _record(5, ok,
            f"half-sharp residue at the origin, d in (3, 5, 7): "
            f"(preserving, reversing) per annulus {counts}, inner disks empty, "
            f"winding -1 on the outer circle ({dt:.1f}s, limit 120s)")


def test_criterion_06_survivors_are_conserved(ring_reports):
    reports, _ = ring_reports
    t0 = time.time()
    bad = []
    for d, rep in reports.items():
        if not (len(rep.diff.matched) == rep.before.count - 1
                and len(rep.diff.destroyed) == 0
                and rep.checks["indices_preserved"]
                and len(rep.diff.consumed) == 1):
            bad.append((d, len(rep.diff.matched), rep.before.count,
                        len(rep.diff.destroyed)))
    dt = time.time() - t0
    ok = not bad
    matched = {d: f"{len(r.diff.matched)}/{r.before.count - 1}"
               for d, r in reports.items()}
    _record(6, ok,
            f"same runs: every zero but the consumed one survives with its "
            f"index intact, none destroyed (matched {matched}, {dt:.2f}s)")


def test_criterion_07_small_derivative_example():
    t0 = time.time()
    R = RationalFunction(
        ComplexPolynomial([0.0, 0.0, 0.05, 1.0 / 6.0]),
        ComplexPolynomial([-0.1, 0.0, 0.0, 0.0, 1.0]),
    )
    lens = HarmonicLens(R)
    n, c = detect_order(R, 0.0)
    got = {}
    all_passed = True
    for eps in (0.1, 0.05, 0.01):
        rep = apply_and_verify(lens, plan(lens, 0.0, eps))
        got[eps] = created_near(rep.diff, 0.0, 0.5)
        all_passed = all_passed and rep.passed
    dt = time.time() - t0
    want = {0.1: 8, 0.05: 6, 0.01: 6}
    ok = (n == 3 and abs(c + 0.5) < 1e-9 and got == want and all_passed
          and dt < 60.0)
    _record(7, ok,
            f"cubic-order example (n={n}, c={c.real:.3g}): zeros within 0.5 of "
            f"the origin {got} vs expected {want}, all verifications passed="
            f"{all_passed} ({dt:.1f}s, limit 60s)")


def test_criterion_08_arbitrary_point_floors():
    t0 = time.time()
    need = 50
    done = {"pole": 0, "nonzero": 0, "preserving-zero": 0, "reversing-zero": 0}
    floor_fails = []
    census_skips = 0

    def floors_hold(rep):
        held = (rep.created_preserving >= rep.predicted.get("preserving", 0)
                and rep.created_reversing >= rep.predicted.get("reversing", 0)
                and rep.outside_before == rep.outside_after
                and len(rep.diff.destroyed) == 0)
        if rep.predicted.get("equal_totals"):
            held = held and rep.after.count == rep.before.count
        return held

    def tally(case, rep, tag):
        nonlocal census_skips
        audited = (rep.before.audit.interior_ok and rep.before.audit.complete
                   and rep.after.audit.interior_ok and rep.after.audit.complete)
        if not audited:
            census_skips += 1
        elif rep.case == case and floors_hold(rep):
            done[case] += 1
        else:
            floor_fails.append((case, tag, rep.case, rep.created_preserving,
                                rep.created_reversing))

    def well_conditioned(lens, census):
        # pairing the far field needs every zero clear of |R'| = 1, where
        # positions stop being Lipschitz in the perturbation
        return all(abs(abs(lens.deriv(r.z)) - 1.0) >= 0.05
                   for r in census.zeros)

    seed = 0
    while (min(done["pole"], done["nonzero"], done["preserving-zero"]) < need
           and seed < 400):
        R = random_rational(seed, 2, 3)
        seed += 1
        lens = HarmonicLens(R)
        try:
            census = find_zeros(lens)
        except ArithmeticError:
            continue
        if not (census.audit.interior_ok and census.audit.complete
                and is_regular(lens, census)
                and well_conditioned(lens, census)):
            continue
        if done["pole"] < need:
            z0 = lens.function.poles()[0].z
            try:
                tally("pole", perturb_anywhere(lens, z0, 1e-3), seed - 1)
            except ArithmeticError:
                census_skips += 1
        if done["nonzero"] < need:
            z0 = None
            for k in range(16):
                z = 0.35 * cmath.exp(2j * math.pi * k / 16)
                if (abs(lens(z)) > 0.05 * (1 + abs(z))
                        and _dmin(z, census, lens) > 0.25):
                    z0 = z
                    break
            if z0 is not None:
                eps = min(1e-3, 0.01 * abs(lens(z0)) * _dmin(z0, census, lens))
                try:
                    tally("nonzero", perturb_anywhere(lens, z0, eps), seed - 1)
                except ArithmeticError:
                    census_skips += 1
        if done["preserving-zero"] < need:
            pres = [(r.z, _dmin(r.z, census, lens)) for r in census.zeros
                    if r.sense is SenseClass.PRESERVING]
            pres = [(z, dm) for z, dm in pres if dm >= 0.15]
            if pres:
                z0 = max(pres, key=lambda t: t[1])[0]
                try:
                    tally("preserving-zero", perturb_anywhere(lens, z0, 1e-3),
                          seed - 1)
                except ArithmeticError:
                    census_skips += 1

    seed = 0
    while done["reversing-zero"] < need and seed < 200:
        try:
            lens, census = random_extremal_deg2(seed)
        except ArithmeticError:
            seed += 1
            continue
        seed += 1
        if not well_conditioned(lens, census):
            continue
        rev = [r for r in census.zeros if r.sense is SenseClass.REVERSING]
        if not rev:
            continue
        z0 = rev[0].z
        m = abs(lens.deriv(z0))
        dm = _dmin(z0, census, lens)
        eps = min(1e-3, 0.01 * (1.0 - m) * dm * dm)
        try:
            tally("reversing-zero", perturb_anywhere(lens, z0, eps), seed - 1)
        except ArithmeticError:
            census_skips += 1

    dt = time.time() - t0
    ok = (all(v >= need for v in done.values()) and not floor_fails
          and dt < 600.0)
    _record(8, ok,
            f"creation floors held on {done['pole']} pole / {done['nonzero']} "
            f"nonzero / {done['preserving-zero']} preserving / "
            f"{done['reversing-zero']} reversing targets; floor failures="
            f"{floor_fails}, census skips={census_skips} "
            f"({dt:.1f}s, limit 600s)")


def test_criterion_09_local_model_grid():
    t0 = time.time()
    bad = []
    for n in range(3, 9):
        for a in (0.25, 1.0, 128.0):
            eps = 0.5 * eps_sharp(n, a)
            model = local_model_zeros(n, a, eps)
            se = math.sqrt(eps)
            eta = math.sqrt(n / (n - 1.0))
            worst = max(abs(a * w ** n - abs(w) ** 2 + eps)
                        for w in model.zeros())
            if worst > 1e-10:
                bad.append((n, a, "residual", worst))
            if not (se / eta < model.rho1 < se < model.rho2 < se * eta
                    < model.rho3):
                bad.append((n, a, "radii", (model.rho1, model.rho2, model.rho3)))
    dt = time.time() - t0
    ok = not bad and dt < 10.0
    _record(9, ok,
            f"local model on 18 (n, |c|) combos at half-sharp residue: "
            f"residuals <= 1e-10 and radii interlace the guarantee annuli; "
            f"bad={bad} ({dt:.2f}s, limit 10s)")


def _poly_from_roots(roots):
    p = ComplexPolynomial([1.0])
    for r in roots:
        p = p * ComplexPolynomial([-r, 1.0])
    return p


def test_criterion_10_portrait_counts_agree():
    t0 = time.time()
    rng = np.random.default_rng(10)
    mismatches = []
    checked = 0
    attempts = 0
    while checked < 50 and attempts < 400:
        attempts += 1
        seed = int(rng.integers(0, 10 ** 6))
        lens = HarmonicLens(random_rational(seed, 2, 3))
        center = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        circle = Circle(center, float(rng.uniform(0.3, 1.5)))
        try:
            laps = chromatic_index(lens, circle)
            wind = winding(lens, circle).value
        except (ZeroOnContour, NonConvergent):
            continue
        if laps != wind:
            mismatches.append((seed, center, circle.radius, laps, wind))
        checked += 1

    pole_bad = []
    for m in (1, 2, 3):
        w0 = 0.3 - 0.2j
        lens = HarmonicLens(RationalFunction(
            ComplexPolynomial([1.0]), ComplexPolynomial([-w0, 1.0]) ** m))
        idx = poincare_index(lens, w0, 0.2)
        laps = chromatic_index(lens, Circle(w0, 0.2))
        if not (idx == -m and laps == -m):
            pole_bad.append((m, idx, laps))

    mult_bad = []
    pairs = 0
    attempts = 0
    while pairs < 100 and attempts < 800:
        attempts += 1
        rp = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        rq = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        if min(abs(np.abs(np.concatenate([rp, rq])) - 1.0)) < 0.05:
            continue
        p = _poly_from_roots(rp)
        q = _poly_from_roots(rq)
        circle = Circle(0j, 1.0)
        wp = winding(p, circle).value
        wq = winding(q, circle).value
        wpq = winding(lambda z: p(z) * q(z), circle).value
        inside = int(sum(1 for r in rp if abs(r) < 1.0))
        if not (wpq == wp + wq and wp == inside):
            mult_bad.append((pairs, wp, wq, wpq, inside))
        pairs += 1

    dt = time.time() - t0
    ok = (checked == 50 and not mismatches and not pole_bad
          and pairs == 100 and not mult_bad and dt < 60.0)
    _record(10, ok,
            f"quantized hue laps = winding on {checked} circles "
            f"(mismatches={mismatches}); pole index -m for m in (1, 2, 3) "
            f"by both counters (bad={pole_bad}); winding multiplicative on "
            f"{pairs} polynomial pairs (bad={mult_bad}) ({dt:.1f}s, limit 60s)")


def test_criterion_11_higher_order_pole_floors():
    t0 = time.time()
    lens, census = random_extremal_deg2(PIPELINE_SEED)
    pres = [r for r in census.zeros if r.sense is SenseClass.PRESERVING]
    rev = [r for r in census.zeros if r.sense is SenseClass.REVERSING]
    z_pres = max(pres, key=lambda r: abs(lens.deriv(r.z))).z
    z_rev = min(rev, key=lambda r: abs(lens.deriv(r.z))).z
    z_non = None
    for k in range(16):
        z = 0.35 * cmath.exp(2j * math.pi * k / 16)
        if abs(lens(z)) > 0.05 * (1 + abs(z)) and _dmin(z, census, lens) > 0.3:
            z_non = z
            break
    order = 4
    created = []
    equal = []
    negative = []
    floors = []
    clean = True
    for z0, index in ((z_pres, 1), (z_rev, -1), (z_non, 0)):
        floor = higher_order_floor(order, index)
        excl = 0.45 * _dmin(z0, census, lens)
        _, before, after, diff = apply_pole_and_diff(
            lens, z0, 1e-5, order, exclusion_radius=excl)
        # everything away from z0 pairs up, so diff.created is exactly the
        # set of new zeros
        made = len(diff.created)
        created.append(made)
        floors.append(floor)
        equal.append(made == floor)
        negative.append(sum(1 for rec in diff.created
                            if rec.sense is SenseClass.REVERSING))
        survivors = before.count - (1 if index != 0 else 0)
        clean = clean and made >= floor and len(diff.destroyed) == 0
        clean = clean and len(diff.matched) == survivors
        clean = clean and before.audit.interior_ok and after.audit.interior_ok
    dt = time.time() - t0
    ok = clean and dt < 120.0
    _record(11, ok,
            f"order-4 pole at index +1 / -1 / 0 targets created {created} "
            f"zeros vs floors {floors} (equality {equal}, negative-index "
            f"counts {negative}, nothing destroyed) ({dt:.1f}s, limit 120s)")


def test_criterion_12_residue_rotation():
    t0 = time.time()
    lens = HarmonicLens(rhie_base(3, 0.5))
    rep = residue_sweep(lens, 0.0, 1e-3, [0.0, math.pi])
    counts = [pt.near_count for pt in rep.points]
    audits = all(pt.census.audit.interior_ok for pt in rep.points)
    dt = time.time() - t0
    ok = counts == [6, 0] and audits and dt < 60.0
    _record(12, ok,
            f"rotating the residue at the origin: theta=0 keeps {counts[0]} "
            f"near zeros, theta=pi leaves {counts[1]} ({dt:.1f}s, limit 60s)")
