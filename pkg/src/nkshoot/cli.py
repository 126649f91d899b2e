"""Batch command-line interface.

Every command emits a JSON run manifest with the keys "command", "params",
"results", "diagnostics", "version", "seconds"; the manifest is the single
source of truth for downstream checks, and human-readable output is derived
from it. CSV bodies are written with shortest round-trip float formatting so
identical runs are byte-identical.

Exit codes: 0 success, 1 numeric/reproduction failure, 2 usage error.
The environment variable NK_THREADS (integer) caps the worker pool used by
parameter sweeps; unset means one worker.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .errors import NkError
from .hitchin_eigen import (
    EIGEN_CSV_HEADER,
    SQRT72,
    eigen_rows,
    find_lambda_star_search,
    index_bounds,
    shoot,
    sign_portrait,
)
from .nk_background import (
    BACKGROUND_CSV_HEADER,
    DEFAULT_EPS,
    DEFAULT_TOL,
    HalfFamily,
    background_rows,
    classify_half_doubling,
    find_bstar_search,
    integrate_half,
    taylor_consistency_check,
)
from .oracles import (
    HOMOGENEOUS_S3S3,
    SINE_CONE,
    aux_identity_scan,
    corrupted,
    el_residuals,
    legendre_scan,
    printed_lambda_diagnostic,
    residual_scan,
)

BETTI_B2 = 0
BETTI_B3 = 2  # three-sphere product: H^3 has rank 2


def _pool_map():
    n = int(os.environ.get("NK_THREADS", "1") or "1")
    if n <= 1:
        return map, None
    executor = ProcessPoolExecutor(max_workers=n)
    return executor.map, executor


def _manifest(command: str, params: dict, results: dict, diagnostics: dict, seconds: float) -> dict:
    return {
        "command": command,
        "params": params,
        "results": results,
        "diagnostics": diagnostics,
        "version": __version__,
        "seconds": seconds,
    }


def _emit(manifest: dict, out: str | None) -> None:
    text = json.dumps(manifest, indent=2)
    print(text)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")


def _write_csv(path: str, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _fail(command: str, params: dict, err: NkError, t0: float, out: str | None) -> int:
    manifest = _manifest(
        command,
        params,
        {},
        {"error": type(err).__name__, "message": str(err)},
        time.perf_counter() - t0,
    )
    _emit(manifest, out)
    return 1


def _cert_dict(cert) -> dict | None:
    if cert is None:
        return None
    return {
        "eps": cert.eps,
        "t_checkpoint": cert.t_checkpoint,
        "disc_at_eps_max": cert.disc_at_eps_max,
        "disc_at_checkpoint_max": cert.disc_at_checkpoint_max,
        "factor_required": cert.factor_required,
        "passed": cert.passed,
    }


# ---------------------------------------------------------------------------
# verify-oracles


def cmd_verify_oracles(args) -> int:
    t0 = time.perf_counter()
    params = {"corrupt_lambda": bool(args.corrupt_lambda)}
    checks = {}
    passed = True

    def record(name, value, budget, ok=None):
        nonlocal passed
        ok = (value <= budget) if ok is None else ok
        checks[name] = {"value": value, "budget": budget, "pass": bool(ok)}
        passed = passed and ok

    sine = corrupted(SINE_CONE) if args.corrupt_lambda else SINE_CONE
    record("rhs_residual_sine_cone", residual_scan(sine, 100), 1e-8)
    record("rhs_residual_homogeneous", residual_scan(HOMOGENEOUS_S3S3, 100), 1e-8)

    from .mink_core import conserved
    worst = 0.0
    for curve in (sine, HOMOGENEOUS_S3S3):
        for t in curve.grid(100):
            worst = max(worst, conserved(curve.evaluator(t)).max_abs)
    record("conserved_pointwise", worst, 1e-10)

    scan = legendre_scan("as_matrix", (0.5, 13.0), 150)
    targets = (2.0, 6.0, 12.0)
    gaps = [min(abs(r - t) for r in scan.roots) if scan.roots else math.inf for t in targets]
    record("legendre_roots_gap", max(gaps), 1e-6)
    checks["legendre_scan"] = scan.as_dict()

    for curve in (SINE_CONE, HOMOGENEOUS_S3S3):
        res = el_residuals(curve)
        record(f"euler_lagrange_{curve.name}", max(res.values()), 1e-6)
        record(f"aux_identity_{curve.name}", aux_identity_scan(curve), 1e-6)

    rep_a = taylor_consistency_check("a")
    rep_b_raw = taylor_consistency_check("b", v1_corrected=False)
    rep_b = taylor_consistency_check("b")
    checks["taylor_family_a"] = {"pass": rep_a.passed, "mismatches": [m.__dict__ for m in rep_a.mismatches]}
    checks["taylor_family_b_quoted_v1"] = {
        "pass": len(rep_b_raw.mismatches) == 2,
        "mismatches": [m.__dict__ for m in rep_b_raw.mismatches],
    }
    checks["taylor_family_b_corrected"] = {"pass": rep_b.passed, "mismatches": [m.__dict__ for m in rep_b.mismatches]}
    passed = passed and rep_a.passed and rep_b.passed and len(rep_b_raw.mismatches) == 2

    # Recorded, not asserted: the quoted redundant lambda-equation carries a
    # typographical factor; its residual on the exact curves documents that.
    checks["quoted_lambda_equation_residual"] = printed_lambda_diagnostic()

    manifest = _manifest(
        "verify-oracles", params, {"passed": passed}, checks, time.perf_counter() - t0
    )
    _emit(manifest, args.out)
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# half


def cmd_half(args) -> int:
    t0 = time.perf_counter()
    params = {
        "family": args.family,
        "param": args.param,
        "eps": args.eps,
        "tol": args.tol,
        "out": args.out,
    }
    manifest_path = args.out + ".manifest.json"
    try:
        family = HalfFamily(args.family, args.param)
        half = integrate_half(family, eps=args.eps, tol=args.tol)
    except NkError as err:
        return _fail("half", params, err, t0, manifest_path)

    _write_csv(args.out, BACKGROUND_CSV_HEADER, background_rows(half.trajectory))
    results = {
        "t_star": half.t_star,
        "beta": list(half.beta),
        "doubling": classify_half_doubling(half),
        "lambda_at_star": half.state_at_star.lam,
        "mu_at_star": half.frame_at_star.mu,
    }
    diagnostics = {
        "conserved_max": half.conserved_max,
        "conserved_drift": half.conserved_drift,
        "n_steps": half.trajectory.meta["n_accepted"],
        "launch_certificate": _cert_dict(half.launch_certificate),
    }
    _emit(_manifest("half", params, results, diagnostics, time.perf_counter() - t0), manifest_path)
    return 0


# ---------------------------------------------------------------------------
# find-bstar


def cmd_find_bstar(args) -> int:
    t0 = time.perf_counter()
    lo, hi, n = args.grid
    params = {"grid": [lo, hi, int(n)], "tol": args.tol, "eps": args.eps, "ode_tol": args.ode_tol}
    map_fn, executor = _pool_map()
    try:
        search = find_bstar_search(
            grid_lo=lo, grid_hi=hi, grid_n=int(n), tol_b=args.tol,
            eps=args.eps, tol=args.ode_tol, map_fn=map_fn,
        )
    except NkError as err:
        manifest = _manifest(
            "find-bstar", params, {},
            {"error": type(err).__name__, "message": str(err),
             "grid": getattr(err, "samples", [])},
            time.perf_counter() - t0,
        )
        _emit(manifest, args.out)
        return 1
    finally:
        if executor is not None:
            executor.shutdown()

    results = {
        "b_star": search.bstar,
        "w1_at_bstar": search.w1_at_bstar,
        "w2_at_bstar": search.w2_at_bstar,
        "t_star": search.t_star,
    }
    diagnostics = {
        "bracket": list(search.bracket),
        "n_integrations": search.n_integrations,
        "grid": [[b, w1] for b, w1 in search.grid],
    }
    _emit(_manifest("find-bstar", params, results, diagnostics, time.perf_counter() - t0), args.out)
    return 0


# ---------------------------------------------------------------------------
# shoot


def cmd_shoot(args) -> int:
    t0 = time.perf_counter()
    params = {
        "family": args.family,
        "param": args.param,
        "lambda": args.lam,
        "eps": args.eps,
        "tol": args.tol,
    }
    try:
        family = HalfFamily(args.family, args.param)
        half = integrate_half(family, eps=args.eps, tol=args.tol)
        report = shoot(half, args.lam)
    except NkError as err:
        return _fail("shoot", params, err, t0, args.out)

    if args.eigen_out:
        _write_csv(args.eigen_out, EIGEN_CSV_HEADER, eigen_rows(report))
    results = report.as_dict()
    diagnostics = {
        "background_conserved_max": half.conserved_max,
        "launch_certificate": _cert_dict(half.launch_certificate),
    }
    _emit(_manifest("shoot", params, results, diagnostics, time.perf_counter() - t0), args.out)
    return 0


# ---------------------------------------------------------------------------
# index-report


def cmd_index_report(args) -> int:
    t0 = time.perf_counter()
    params = {
        "grid": list(args.grid),
        "tol_b": args.tol,
        "tol_lambda": args.tol_lambda,
        "eps": args.eps,
        "ode_tol": args.ode_tol,
        "betti": [BETTI_B2, BETTI_B3],
    }
    stage = "find-bstar"
    map_fn, executor = _pool_map()
    try:
        lo, hi, n = args.grid
        search = find_bstar_search(
            grid_lo=lo, grid_hi=hi, grid_n=int(n), tol_b=args.tol,
            eps=args.eps, tol=args.ode_tol, map_fn=map_fn,
        )
        stage = "integrate-half"
        half = integrate_half(HalfFamily("b", search.bstar), eps=args.eps, tol=args.ode_tol)
        stage = "sign-portrait"
        portrait = sign_portrait(half, [float(k) for k in range(1, 9)], map_fn=map_fn)
        stage = "find-lambda-star"
        lsearch = find_lambda_star_search(half, tol_l=args.tol_lambda)
        stage = "index-bounds"
        nu_star = lsearch.lambda_star**2 / 12.0
        hitchin_lb, einstein_lb = index_bounds([((0.0, 6.0), 1)], BETTI_B2, BETTI_B3)
        hitchin_exact, einstein_exact = index_bounds([(nu_star, 1)], BETTI_B2, BETTI_B3)
    except NkError as err:
        manifest = _manifest(
            "index-report", params, {},
            {"error": type(err).__name__, "message": str(err), "stage": stage},
            time.perf_counter() - t0,
        )
        _emit(manifest, args.out)
        return 1
    finally:
        if executor is not None:
            executor.shutdown()

    portrait_ok = all(
        row.opposite_signs_ok
        and row.maximal_orbit_relation_residual <= 1e-6
        and row.f2_h1_relation_residual <= 1e-6
        and row.xi_positive
        for row in portrait
    )
    results = {
        "b_star": search.bstar,
        "t_star": half.t_star,
        "lambda_star": lsearch.lambda_star,
        "nu_star": nu_star,
        "hitchin_lb": hitchin_lb,
        "einstein_lb": einstein_lb,
        "hitchin_lb_exact": hitchin_exact,
        "einstein_lb_exact": einstein_exact,
        "mode": "conservative",
    }
    diagnostics = {
        "w1_at_bstar": search.w1_at_bstar,
        "w2_at_bstar": search.w2_at_bstar,
        "chi_normalized_at_lambda_star": lsearch.chi_normalized_at_star,
        "conserved_max": half.conserved_max,
        "constraint_max": max(row.max_constraint_residual for row in portrait),
        "portrait": [row.as_dict() for row in portrait],
        "portrait_relations_pass": portrait_ok,
        "lambda_bracket": list(lsearch.bracket),
        "launch_certificate": _cert_dict(half.launch_certificate),
        "classification_at_lambda_star": lsearch.report_at_star.classification,
    }
    _emit(_manifest("index-report", params, results, diagnostics, time.perf_counter() - t0), args.out)
    return 0


# ---------------------------------------------------------------------------
# legendre-scan


def cmd_legendre_scan(args) -> int:
    t0 = time.perf_counter()
    variant = "as_printed" if args.variant == "printed" else "as_matrix"
    params = {"variant": args.variant, "range": list(args.range), "n": args.n}
    try:
        scan = legendre_scan(variant, tuple(args.range), args.n)
    except (NkError, ValueError) as err:
        manifest = _manifest(
            "legendre-scan", params, {},
            {"error": type(err).__name__, "message": str(err)},
            time.perf_counter() - t0,
        )
        _emit(manifest, args.out)
        return 1
    results = scan.as_dict()
    diagnostics = {
        "endpoint_functionals": {
            "chi": "chi at the equator detects even-degree modes",
            "xi": "xi at the equator detects odd-degree modes",
        },
    }
    _emit(_manifest("legendre-scan", params, results, diagnostics, time.perf_counter() - t0), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def _positive_float(value: str) -> float:
    x = float(value)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return x


def _triple(value: str) -> tuple:
    parts = value.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected lo,hi,n, got {value!r}")
    return (float(parts[0]), float(parts[1]), int(parts[2]))


def _pair(value: str) -> tuple:
    parts = value.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected lo,hi, got {value!r}")
    return (float(parts[0]), float(parts[1]))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nkshoot",
        description="Cohomogeneity-one nearly Kähler backgrounds and the spectral shooting pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-oracles", help="run every closed-form cross-check")
    p.add_argument("--corrupt-lambda", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_verify_oracles)

    p = sub.add_parser("half", help="integrate one nearly Kähler half to its maximal-volume orbit")
    p.add_argument("--family", required=True, choices=("a", "b"))
    p.add_argument("--param", required=True, type=_positive_float)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--out", required=True, help="CSV path; manifest goes to PATH.manifest.json")
    p.set_defaults(fn=cmd_half)

    p = sub.add_parser("find-bstar", help="locate the last axis crossing of the beta curve below b=1")
    p.add_argument("--grid", type=_triple, default=(0.05, 0.999, 200))
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--ode-tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_find_bstar)

    p = sub.add_parser("shoot", help="one eigen shoot over a half at fixed spectral parameter")
    p.add_argument("--family", default="b", choices=("a", "b"))
    p.add_argument("--param", required=True, type=_positive_float)
    p.add_argument("--lambda", dest="lam", required=True, type=_positive_float)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--eigen-out", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_shoot)

    p = sub.add_parser("index-report", help="full pipeline: b*, sign portrait, lambda*, index bounds")
    p.add_argument("--grid", type=_triple, default=(0.05, 0.999, 200))
    p.add_argument("--tol", type=float, default=1e-8, help="bisection tolerance for b*")
    p.add_argument("--tol-lambda", type=float, default=1e-8)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--ode-tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_index_report)

    p = sub.add_parser("legendre-scan", help="sine-cone spectral scan")
    p.add_argument("--variant", default="matrix", choices=("printed", "matrix"))
    p.add_argument("--range", type=_pair, default=(0.5, 10.0))
    p.add_argument("--n", type=int, default=120)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_legendre_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
