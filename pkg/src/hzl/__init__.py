"""Zeros of rational harmonic functions R(z) - conj(z) under pole perturbations."""

__version__ = "0.1.0"

from .polynomial import ComplexPolynomial, RealPolynomial, coprime, positive_real_roots
from .rational import (POLE_MARKER, Pole, RationalFunction, is_pole_value, mpw_radius,
                       rhie_base)
from .contour import (Arc, ArcPolygon, Circle, NonConvergent, Segment, ZeroOnContour,
                      annulus_sector, argument_principle_audit, encloses,
                      poincare_index, rouche_check, winding)
from .harmonic import (Disk, HarmonicLens, SenseClass, ZeroCensus, ZeroRecord,
                       census_from_json, census_to_json, find_zeros, is_extremal,
                       is_regular)
from .perturb import (CensusDiff, LinearModel, LocalModel, PerturbationPlan,
                      apply_and_verify, census_diff, convex_and_verify, detect_order, eps_sharp, eps_star,
                      higher_order_floor, iterate_pipeline, local_model_linear,
                      local_model_zeros, perturb_anywhere, plan, residue_sweep)
from .portrait import PortraitSpec, chromatic_index, render, save_png

__all__ = [
    "__version__",
    "ComplexPolynomial", "RealPolynomial", "coprime", "positive_real_roots",
    "POLE_MARKER", "Pole", "RationalFunction", "is_pole_value", "mpw_radius", "rhie_base",
    "Arc", "ArcPolygon", "Circle", "NonConvergent", "Segment", "ZeroOnContour",
    "annulus_sector", "argument_principle_audit", "encloses", "poincare_index",
    "rouche_check", "winding",
    "Disk", "HarmonicLens", "SenseClass", "ZeroCensus", "ZeroRecord",
    "census_from_json", "census_to_json", "find_zeros", "is_extremal", "is_regular",
    "CensusDiff", "LinearModel", "LocalModel", "PerturbationPlan",
    "apply_and_verify", "census_diff", "convex_and_verify", "detect_order", "eps_sharp", "eps_star",
    "higher_order_floor", "iterate_pipeline", "local_model_linear",
    "local_model_zeros", "perturb_anywhere", "plan", "residue_sweep",
    "PortraitSpec", "chromatic_index", "render", "save_png",
]
