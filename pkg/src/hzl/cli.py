"""Command-line front end.

Subcommands census a function's zeros, run a planned pole perturbation, walk
a multi-step pipeline, sweep the residue phase at a point, or render a phase
portrait.  Every run prints one JSON report to stdout with sorted keys so
identical inputs produce identical bytes.

Exit codes: 0 success, 2 a verification or audit failed (the report still
prints), 3 invalid input, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys

import re

from . import __version__, perturb, portrait
from .harmonic import Disk, HarmonicLens, census_to_json, find_zeros
from .rational import RationalFunction, rhie_base

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4


def _c2l(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _parse_point(text: str) -> complex:
    try:
        if "," in text:
            re_s, im_s = text.split(",")
            return complex(float(re_s), float(im_s))
        return complex(text)
    except ValueError as exc:
        raise ValueError(f"cannot parse point {text!r}; use RE,IM") from exc


def _parse_rhie(text: str) -> RationalFunction:
    fields = {}
    for part in text.split(","):
        key, _, val = part.partition("=")
        fields[key.strip()] = val.strip()
    try:
        d = int(fields["d"])
        r = float(fields["r"])
    except (KeyError, ValueError) as exc:
        raise ValueError("--rhie needs d=<int>,r=<float>") from exc
    return rhie_base(d, r)


def _load_function(args) -> RationalFunction:
    if getattr(args, "rhie", None):
        R = _parse_rhie(args.rhie)
        eps = getattr(args, "convex_eps", None)
        if eps is not None:
            R = R.convex_with_pole(0j, eps)
        return R
    if getattr(args, "fn", None):
        text = args.fn
        if os.path.exists(text):
            with open(text, "r", encoding="utf-8") as fh:
                text = fh.read()
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"--fn is neither a file nor valid JSON: {exc}") from exc
        return RationalFunction.from_json(payload)
    raise ValueError("no function given; use --fn or --rhie")


def _domain_from(args) -> Disk | None:
    if args.domain_center is None and args.domain_radius is None:
        return None
    if args.domain_center is None or args.domain_radius is None:
        raise ValueError("--domain-center and --domain-radius go together")
    return Disk(_parse_point(args.domain_center), float(args.domain_radius))


def _report(command: str, args, result: dict, config: dict) -> dict:
    return {
        "command": command,
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "config": config,
        "result": result,
    }


def _emit(report: dict) -> None:
    sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")


def _plan_dict(p: perturb.PerturbationPlan) -> dict:
    return {
        "z0": _c2l(p.z0), "n": p.n, "c": _c2l(p.c), "eta": p.eta, "eps": p.eps,
        "inner_radius": p.inner, "mid_radius": p.mid, "outer_radius": p.outer,
        "eps_star": p.eps_star, "eps_sharp": p.eps_sharp,
    }


def _cmd_zeros(args) -> int:
    R = _load_function(args)
    lens = HarmonicLens(R)
    census = find_zeros(lens, domain=_domain_from(args), density=args.density,
                        dedup_tol=args.dedup)
    result = json.loads(census_to_json(census, lens))
    if args.portrait:
        result["portrait"] = _portrait_out(lens, census, args.portrait)
    config = {"density": args.density, "dedup": args.dedup,
              "function": R.as_dict()}
    _emit(_report("zeros", args, result, config))
    audit_ok = census.audit.interior_ok and census.audit.complete
    return EXIT_OK if audit_ok else EXIT_VERIFY


def _portrait_out(lens, census, path) -> dict:
    dom = census.domain
    spec = portrait.PortraitSpec(center=dom.center, width=2.0 * dom.radius)
    img = portrait.render(lens, spec, census)
    portrait.save_png(img, path)
    with open(path, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    return {"path": str(path), "sha256": digest}


def _perturb_anywhere_cmd(args, lens, z0, domain) -> int:
    # the target is not a higher-order zero: arbitrary-point theorem instead
    if args.eps is None:
        raise ValueError("perturbation at this target needs an explicit --eps")
    rep = perturb.perturb_anywhere(lens, z0, args.eps, domain=domain,
                                   density=args.density)
    result = {
        "mode": "anywhere",
        "case": rep.case,
        "predicted": rep.predicted,
        "before_count": rep.before.count,
        "after_count": rep.after.count,
        "created": [_c2l(r.z) for r in rep.diff.created],
        "destroyed": [_c2l(r.z) for r in rep.diff.destroyed],
        "consumed": [_c2l(r.z) for r in rep.diff.consumed],
        "matched": len(rep.diff.matched),
        "created_preserving": rep.created_preserving,
        "created_reversing": rep.created_reversing,
        "local_radius": rep.local_radius,
        "outside_before": rep.outside_before,
        "outside_after": rep.outside_after,
        "ok": rep.ok,
    }
    if args.portrait:
        result["portraits"] = {
            "before": _portrait_out(lens, rep.before, f"{args.portrait}-before.png"),
            "after": _portrait_out(rep.F, rep.after, f"{args.portrait}-after.png"),
        }
    config = {"at": _c2l(z0), "eps": args.eps, "mode": "anywhere",
              "density": args.density, "function": lens.function.as_dict()}
    _emit(_report("perturb", args, result, config))
    return EXIT_OK if rep.ok else EXIT_VERIFY


def _cmd_perturb(args) -> int:
    R = _load_function(args)
    lens = HarmonicLens(R)
    z0 = _parse_point(args.at)
    domain = _domain_from(args)
    if args.eps_theta is not None:
        # single-angle residue rotation; observational, audited census only
        if args.eps is None:
            raise ValueError("--eps-theta needs an explicit --eps modulus")
        sweep = perturb.residue_sweep(lens, z0, args.eps, [args.eps_theta],
                                      density=args.density)
        pt = sweep.points[0]
        result = {
            "mode": "rotated-residue",
            "theta": pt.theta,
            "n": sweep.n,
            "eta": sweep.eta,
            "near_count": pt.near_count,
            "near_zeros": [_c2l(r.z) for r in pt.census.zeros],
        }
        config = {"at": _c2l(z0), "eps": args.eps, "eps_theta": args.eps_theta,
                  "density": args.density, "function": R.as_dict()}
        _emit(_report("perturb", args, result, config))
        ok = pt.census.audit.interior_ok and pt.census.audit.complete
        return EXIT_OK if ok else EXIT_VERIFY
    if args.convex:
        if args.eps is None:
            raise ValueError("--convex needs an explicit --eps weight")
        rep = perturb.convex_and_verify(lens, z0, args.eps, domain=domain,
                                        density=args.density)
        mode = "convex"
    else:
        try:
            p = perturb.plan(lens, z0, args.eps)
        except ValueError as exc:
            msg = str(exc)
            if "perturb_anywhere" not in msg and "not a zero" not in msg:
                raise
            return _perturb_anywhere_cmd(args, lens, z0, domain)
        rep = perturb.apply_and_verify(lens, p, domain=domain,
                                       density=args.density)
        mode = "additive"
    result = {
        "mode": mode,
        "plan": _plan_dict(rep.plan),
        "before_count": rep.before.count,
        "after_count": rep.after.count,
        "created": [_c2l(r.z) for r in rep.diff.created],
        "destroyed": [_c2l(r.z) for r in rep.diff.destroyed],
        "consumed": [_c2l(r.z) for r in rep.diff.consumed],
        "matched": len(rep.diff.matched),
        "inner_preserving": rep.inner_preserving,
        "outer_reversing": rep.outer_reversing,
        "inner_disk_count": rep.inner_disk_count,
        "winding_outer": rep.winding_outer,
        "boundary_hits": [_c2l(r.z) for r in rep.boundary_hits],
        "checks": rep.checks,
        "extremal": rep.extremal,
        "passed": rep.passed,
    }
    if args.near_radius is not None:
        result["near_radius"] = args.near_radius
        result["near_created"] = perturb.created_near(rep.diff, z0, args.near_radius)
    if args.portrait:
        result["portraits"] = {
            "before": _portrait_out(lens, rep.before, f"{args.portrait}-before.png"),
            "after": _portrait_out(rep.F, rep.after, f"{args.portrait}-after.png"),
        }
    config = {"at": _c2l(z0), "eps": args.eps, "mode": mode,
              "density": args.density, "function": R.as_dict()}
    _emit(_report("perturb", args, result, config))
    return EXIT_OK if rep.passed else EXIT_VERIFY


def _cmd_pipeline(args) -> int:
    R = _load_function(args)
    lens = HarmonicLens(R)
    text = args.steps
    if os.path.exists(text):
        with open(text, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        steps = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"--steps is neither a file nor valid JSON: {exc}") from exc
    if not isinstance(steps, list):
        raise ValueError("--steps must be a JSON array of actions")
    rep = perturb.iterate_pipeline(lens, steps, density=args.density)
    stages = []
    for st in rep.stages:
        stages.append({
            "action": st.action,
            "degree": st.degree,
            "count": st.census.count,
            "extremal": st.extremal,
            "outside_guarantee": st.outside_guarantee,
            "function": st.lens.function.as_dict(),
        })
    result = {"stages": stages}
    config = {"steps": steps, "density": args.density, "function": R.as_dict()}
    _emit(_report("pipeline", args, result, config))
    ok = all(st.census.audit.interior_ok and st.census.audit.complete
             for st in rep.stages)
    return EXIT_OK if ok else EXIT_VERIFY


_PI_FORM = re.compile(r"(-?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(-?\d*\.?\d+))?")


def _theta_value(part: str) -> float:
    part = part.strip()
    m = _PI_FORM.fullmatch(part)
    if m:
        head = m.group(1)
        coef = {"": 1.0, "-": -1.0}.get(head)
        if coef is None:
            coef = float(head)
        div = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / div
    return float(part)


def _parse_thetas(text: str):
    # either an integer count (evenly spaced on [0, 2pi)) or a comma list
    try:
        count = int(text)
    except ValueError:
        pass
    else:
        if count < 1:
            raise ValueError("theta count must be positive")
        return [2.0 * math.pi * k / count for k in range(count)]
    out = []
    for part in text.split(","):
        try:
            out.append(_theta_value(part))
        except ValueError as exc:
            raise ValueError(f"cannot parse theta {part.strip()!r}") from exc
    return out


def _cmd_sweep(args) -> int:
    R = _load_function(args)
    lens = HarmonicLens(R)
    z0 = _parse_point(args.at)
    thetas = _parse_thetas(args.thetas)
    rep = perturb.residue_sweep(lens, z0, args.eps, thetas, density=args.density)
    result = {
        "z0": _c2l(z0),
        "eps": rep.eps,
        "n": rep.n,
        "eta": rep.eta,
        "points": [{"theta": pt.theta, "count": pt.near_count} for pt in rep.points],
    }
    config = {"at": _c2l(z0), "eps": args.eps, "thetas": thetas,
              "density": args.density, "function": R.as_dict()}
    _emit(_report("sweep", args, result, config))
    return EXIT_OK


def _cmd_portrait(args) -> int:
    R = _load_function(args)
    lens = HarmonicLens(R)
    parts = [float(v) for v in args.window.split(",")]
    if len(parts) == 3:
        cx, cy, width = parts
        height = None
    elif len(parts) == 4:
        cx, cy, width, height = parts
    else:
        raise ValueError("--window must be CX,CY,WIDTH or CX,CY,WIDTH,HEIGHT")
    res = tuple(int(v) for v in args.res.split(","))
    if len(res) == 1:
        res = (res[0], res[0])
    if len(res) != 2:
        raise ValueError("--res must be N or NX,NY")
    spec = portrait.PortraitSpec(center=complex(cx, cy), width=width,
                                 height=height, resolution=res,
                                 markers=not args.no_markers,
                                 shading=not args.no_shading)
    census = None
    if not args.no_markers:
        census = find_zeros(lens, domain=_domain_from(args), density=args.density)
    img = portrait.render(lens, spec, census)
    portrait.save_png(img, args.out)
    with open(args.out, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    result = {
        "path": args.out,
        "sha256": digest,
        "resolution": list(spec.resolution),
        "window": [cx, cy, spec.width, spec.height],
        "zero_count": None if census is None else census.count,
    }
    config = {"window": args.window, "res": args.res,
              "markers": not args.no_markers, "shading": not args.no_shading,
              "function": R.as_dict()}
    _emit(_report("portrait", args, result, config))
    return EXIT_OK


def _add_function_args(sub):
    sub.add_argument("--fn", help="rational function as JSON text or a path to a JSON file")
    sub.add_argument("--rhie", help="pole-ring base function, as d=<int>,r=<float>")
    sub.add_argument("--convex-eps", type=float, default=None, dest="convex_eps",
                     help="blend the --rhie function with a pole at 0: (1-eps)R + eps/z")


def _add_census_args(sub):
    sub.add_argument("--density", type=float, default=None,
                     help="seed grid density per unit length (default: auto)")
    sub.add_argument("--domain-center", default=None, help="census disk center RE,IM")
    sub.add_argument("--domain-radius", type=float, default=None, help="census disk radius")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hzl",
        description="zeros of rational harmonic functions R(z) - conj(z) under pole perturbations",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sp = ap.add_subparsers(dest="command", required=True)

    z = sp.add_parser("zeros", help="census the zeros of R - conj(z)")
    _add_function_args(z)
    _add_census_args(z)
    z.add_argument("--dedup", type=float, default=1e-6, help="merge radius for duplicate zeros")
    z.add_argument("--portrait", default=None, help="also write a phase portrait PNG here")
    z.add_argument("--seed", type=int, default=None)
    z.set_defaults(fn_handler=_cmd_zeros)

    p = sp.add_parser("perturb", help="add a pole at a zero and verify the new rings")
    _add_function_args(p)
    _add_census_args(p)
    p.add_argument("--at", required=True, help="perturbation point RE,IM")
    p.add_argument("--eps", type=float, default=None,
                   help="residue (default: half of the sharp threshold)")
    p.add_argument("--convex", action="store_true",
                   help="blend (1-eps)R + eps/(z-z0) instead of adding the pole")
    p.add_argument("--eps-theta", type=_theta_value, default=None, dest="eps_theta",
                   help="rotate the residue to eps*exp(i*theta); accepts pi forms")
    p.add_argument("--near-radius", type=float, default=None, dest="near_radius",
                   help="also count created zeros within this radius of z0")
    p.add_argument("--portrait", default=None,
                   help="write before/after portraits with this path prefix")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn_handler=_cmd_perturb)

    pl = sp.add_parser("pipeline", help="run a JSON list of add_pole / add_constant steps")
    _add_function_args(pl)
    pl.add_argument("--steps", required=True, help="JSON array of steps, inline or a file path")
    pl.add_argument("--density", type=float, default=None)
    pl.add_argument("--seed", type=int, default=None)
    pl.set_defaults(fn_handler=_cmd_pipeline)

    sw = sp.add_parser("sweep", help="rotate the residue phase at a point and count zeros nearby")
    _add_function_args(sw)
    sw.add_argument("--at", required=True, help="perturbation point RE,IM")
    sw.add_argument("--eps", type=float, required=True)
    sw.add_argument("--thetas", required=True,
                    help="comma list of angles (pi allowed) or an integer count")
    sw.add_argument("--density", type=float, default=None)
    sw.add_argument("--seed", type=int, default=None)
    sw.set_defaults(fn_handler=_cmd_sweep)

    pt = sp.add_parser("portrait", help="render a phase portrait PNG")
    _add_function_args(pt)
    _add_census_args(pt)
    pt.add_argument("--window", required=True, help="CX,CY,WIDTH[,HEIGHT]")
    pt.add_argument("--res", default="600", help="pixels, N or NX,NY")
    pt.add_argument("--out", required=True, help="output PNG path")
    pt.add_argument("--no-markers", action="store_true")
    pt.add_argument("--no-shading", action="store_true")
    pt.add_argument("--seed", type=int, default=None)
    pt.set_defaults(fn_handler=_cmd_portrait)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn_handler(args)
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except ArithmeticError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
