"""Instance constructors and the alignment pipeline they feed."""

import numpy as np
import pytest

from hzl.harmonic import HarmonicLens, is_extremal
from hzl.instances import (PIPELINE_SEED, PIPELINE_STEPS, fit_deg2_through,
                           random_extremal_deg2, random_rational)
from hzl.perturb import iterate_pipeline
from hzl.rational import coprime


def test_fit_deg2_through_interpolates():
    pts = [0.2 + 0.1j, -0.6 + 0.4j, 0.5 - 0.7j, -0.3 - 0.3j, 0.8 + 0.6j]
    R = fit_deg2_through(pts)
    assert R.degree == 2
    lens = HarmonicLens(R)
    for z in pts:
        assert abs(lens(z)) < 1e-8


def test_fit_deg2_through_point_count():
    with pytest.raises(ValueError, match="five points"):
        fit_deg2_through([0.0, 1.0, 2.0])


def test_random_extremal_deg2_seed0():
    lens, census = random_extremal_deg2(0)
    assert census.count == 5
    assert is_extremal(lens, census)
    assert census.audit.interior_ok and census.audit.complete
    lens2, census2 = random_extremal_deg2(0)
    assert np.allclose(lens.function.num.coeffs, lens2.function.num.coeffs)
    assert np.allclose(lens.function.den.coeffs, lens2.function.den.coeffs)
    assert [r.z for r in census.zeros] == [r.z for r in census2.zeros]


def test_random_rational_shape():
    R = random_rational(3, 2, 3)
    assert R.num.degree == 2
    assert R.den.degree == 3
    assert coprime(R.num, R.den)
    again = random_rational(3, 2, 3)
    assert np.array_equal(R.num.coeffs, again.num.coeffs)
    with pytest.raises(ValueError):
        random_rational(3, -1, 2)


def test_alignment_pipeline_counts():
    lens, _ = random_extremal_deg2(PIPELINE_SEED)
    report = iterate_pipeline(lens, PIPELINE_STEPS)
    stages = report.stages
    assert [st.census.count for st in stages] == [5, 5, 10, 10, 15]
    assert [st.degree for st in stages] == [2, 2, 3, 3, 4]
    assert all(st.extremal for st in stages)
    assert not any(st.outside_guarantee for st in stages)
    assert [st.action["action"] for st in stages] == [
        "init", "add_constant", "add_pole", "add_constant", "add_pole",
    ]
    # each add_constant echoes the critical point it aligned with
    assert "critical_point" in stages[1].action
    assert stages[2].action["selector"] == "nearest-critical"
