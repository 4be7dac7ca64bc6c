"""Command-line entry point.

Subcommands cover the full pipeline: single-model diagnostics (`spectrum`),
duality checks (`duality`), plan-driven grids (`sweep`), finite-size scaling
(`scaling`), Lyapunov exponents (`le`) and the Rydberg-array model
(`rydberg`).  Exit codes: 0 success, 1 computation failure, 2 usage error.
Argument parsing rejects unknown flags; semantic validation happens before
any matrix is built.  QUASIDUAL_OUTDIR sets the default output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import diagnostics as diag_mod
from . import duality as dual_mod
from . import lyapunov as lyap_mod
from . import rydberg as ryd_mod
from .models import Boundary, ModelSpec, fibonacci_tau
from .models import build_hamiltonian
from .spectra import diagonalize
from .sweep import SweepPlan, csv_params, run_sweep

_FAMILIES = ("power-law", "exponential", "offdiag-aah", "diagonal-aah", "dual-power")


def _outdir(args) -> Path:
    base = args.out if getattr(args, "out", None) else os.environ.get("QUASIDUAL_OUTDIR", ".")
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _build_spec(parser, args) -> ModelSpec:
    """ModelSpec from common model flags; parser.error on inconsistent input."""
    boundary = Boundary(args.boundary)
    tau = fibonacci_tau(args.fib_u)
    family = args.family
    limit = getattr(args, "limit", "none")
    if family == "dual-power":
        # nearest-neighbor chain with the surviving exponent given as --a
        if args.a is None:
            parser.error("--a is required for family dual-power")
        family, limit = "power-law", "a-infinity"
        args.b = args.a
    if family in ("power-law", "exponential"):
        a, b = args.a, args.b
        if limit == "a-infinity":
            a = None
        elif limit == "b-infinity":
            b = None
        if a is None and limit != "a-infinity":
            parser.error(f"--a is required for family {family}")
        if b is None and limit != "b-infinity":
            parser.error(f"--b is required for family {family} (or set --limit b-infinity)")
        if args.d is None:
            parser.error("--d is required for power-law/exponential families")
        builder = ModelSpec.power_law if family == "power-law" else ModelSpec.exponential
        return builder(a, b, args.d, tau, boundary=boundary)
    if family == "offdiag-aah":
        a = 1.0 if args.a is None else args.a
        b = 1.0 if args.b is None else args.b
        return ModelSpec.off_diagonal_aah(a, b, tau, boundary=boundary)
    if family == "diagonal-aah":
        return ModelSpec.diagonal_aah(args.t, args.V, tau, boundary=boundary)
    parser.error(f"unknown family {family}")


def _add_model_flags(sub, with_limit=True):
    sub.add_argument("--family", required=True, choices=_FAMILIES)
    sub.add_argument("--a", type=float, help="distance-kernel parameter (paper symbol a)")
    sub.add_argument("--b", type=float, help="modulation-kernel parameter (paper symbol b)")
    sub.add_argument("--d", type=int, help="maximum hopping range")
    sub.add_argument("--t", type=float, default=1.0, help="diagonal-AAH hopping")
    sub.add_argument("--V", type=float, default=0.0, help="diagonal-AAH potential")
    sub.add_argument("--fib-u", type=int, required=True,
                     help="Fibonacci index u; tau = Fib(u-1)/Fib(u), N = Fib(u)")
    sub.add_argument("--boundary", default="periodic", choices=("periodic", "open"))
    if with_limit:
        sub.add_argument("--limit", default="none",
                         choices=("none", "a-infinity", "b-infinity"))
    sub.add_argument("--out", help="output directory (default $QUASIDUAL_OUTDIR or .)")


def _cmd_spectrum(parser, args) -> int:
    spec = _build_spec(parser, args)
    outdir = _outdir(args)
    result = diagonalize(build_hamiltonian(spec))
    thresholds = diag_mod.ClassificationThresholds.from_calibration()
    diags = diag_mod.diagnose_spectrum(result, thresholds)
    params = csv_params(spec)
    stem = f"spectrum_{args.family}_u{args.fib_u}"
    path = outdir / f"{stem}_states.csv"
    diag_mod.write_state_csv(path, params, diags)
    written = [path]
    if args.spacings:
        spath = outdir / f"{stem}_spacings.csv"
        diag_mod.write_spacings_csv(spath, spec.size,
                                    diag_mod.even_odd_spacings(result.eigenvalues))
        written.append(spath)
    if args.edges:
        epath = outdir / f"{stem}_edges.json"
        edge_set = diag_mod.detect_mobility_edges(diags)
        diag_mod.write_edges_json(epath, params, edge_set, spec.tau, 2.0 / spec.size)
        written.append(epath)
    for p in written:
        print(p)
    return 0


def _cmd_duality(parser, args) -> int:
    if args.family == "diagonal-aah":
        parser.error("the diagonal-AAH calibration model is outside the duality family")
    tau = fibonacci_tau(args.fib_u)
    if args.family == "offdiag-aah":
        specA = ModelSpec.off_diagonal_aah(args.a, args.b, tau)
        specB = ModelSpec.off_diagonal_aah(args.b, args.a, tau)
    else:
        if args.a is None or args.b is None or args.d is None:
            parser.error("duality needs --a, --b and --d")
        builder = ModelSpec.power_law if args.family in ("power-law", "dual-power") \
            else ModelSpec.exponential
        specA = builder(args.a, args.b, args.d, tau)
        specB = builder(args.b, args.a, args.d, tau)
    report = dual_mod.check_duality(specA, specB, conjugation=not args.no_conjugation)
    payload = dual_mod.report_to_dict(report, {"a": args.a, "b": args.b, "d": args.d})
    if args.out:
        outdir = _outdir(args)
        path = outdir / f"duality_u{args.fib_u}.json"
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
        print(path)
    else:
        json.dump(payload, sys.stdout, indent=1)
        print()
    return 0


def _resolve_plan(parser, name: str) -> SweepPlan:
    path = Path(name)
    if path.exists():
        return SweepPlan.load(path)
    candidate = resources.files("quasidual").joinpath(f"plans/{name}.json")
    if candidate.is_file():
        return SweepPlan.from_json(candidate.read_text())
    parser.error(f"plan {name!r} not found (no such file, not a packaged plan)")


def _cmd_sweep(parser, args) -> int:
    plan = _resolve_plan(parser, args.plan)
    if args.output:
        plan.output = args.output
    manifest = run_sweep(plan)
    failed = [r["index"] for r in manifest["results"] if r["status"] != "ok"]
    print(Path(plan.output) / f"{plan.name}_manifest.json")
    if failed:
        print(f"warning: {len(failed)} gridpoints failed: {failed}", file=sys.stderr)
    return 0


def _cmd_scaling(parser, args) -> int:
    model = {"family": "power-law" if args.family == "dual-power" else args.family,
             "d": args.d, "boundary": "periodic"}
    limit = getattr(args, "limit", "none")
    if args.family == "dual-power":
        if args.a is None:
            parser.error("--a is required for family dual-power")
        limit = "a-infinity"
        model["b"] = args.a
    elif args.a is not None:
        model["a"] = args.a
    if args.b is not None and args.family != "dual-power":
        model["b"] = args.b
    if limit != "none":
        model["limit"] = limit
    plan = SweepPlan(
        name=args.name, kind="scaling", model=model, fib_u=args.fib_u,
        output=str(_outdir(args)), diagnostics=["mfd"],
        eigenvector_cap=args.eigenvector_cap,
    )
    manifest = run_sweep(plan)
    print(Path(plan.output) / f"{plan.name}_scaling.json")
    failed = [r["index"] for r in manifest["results"] if r["status"] != "ok"]
    if failed:
        print(f"warning: {len(failed)} sizes failed: {failed}", file=sys.stderr)
        return 1
    return 0


def _cmd_le(parser, args) -> int:
    spec = _build_spec(parser, args)
    if not spec.is_nearest_neighbor:
        parser.error("Lyapunov exponents need a nearest-neighbor model "
                     "(dual-power, offdiag-aah or diagonal-aah)")
    outdir = _outdir(args)
    result = diagonalize(build_hamiltonian(spec), compute_vectors=False)
    results = lyap_mod.lyapunov_spectrum(spec, result.eigenvalues)
    params = csv_params(spec)
    # for the a-infinity chain the surviving exponent sits in the modulation slot
    exponent = params["b"] if params["a"] == "inf" else params["a"]
    path = outdir / f"le_{args.family}_u{args.fib_u}.csv"
    lyap_mod.write_lyapunov_csv(path, {"N": params["N"], "a": exponent,
                                       "d": params["d"]}, results)
    print(path)
    return 0


def _parse_d_list(parser, text: str) -> list[int]:
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        parser.error(f"cannot parse d list {text!r}; use '2..10' or '2,3,5'")


def _cmd_rydberg(parser, args) -> int:
    tau = fibonacci_tau(args.fib_u)
    spec = ryd_mod.RydbergModelSpec(scale=args.A, tau=tau, d=args.d)
    outdir = _outdir(args)
    wrote = []
    if args.compare:
        d_values = _parse_d_list(parser, args.compare)
        rows = ryd_mod.compare_to_ideal(spec, d_values)
        path = outdir / f"rydberg_compare_u{args.fib_u}.json"
        ryd_mod.write_comparison_json(path, rows)
        wrote.append(path)
    if args.quench_site is not None:
        n0 = args.quench_site
        if not 1 <= n0 <= spec.n_sites:
            parser.error(f"--quench-site must be in 1..{spec.n_sites}")
        initial = np.zeros(spec.n_sites)
        initial[n0 - 1] = 1.0
        result = ryd_mod.quench_model(spec, initial)
        long_path = outdir / f"rydberg_quench_u{args.fib_u}_site{n0}.csv"
        summary_path = outdir / f"rydberg_quench_u{args.fib_u}_site{n0}_summary.csv"
        ryd_mod.write_quench_csv(long_path, summary_path, result)
        wrote += [long_path, summary_path]
    if not wrote:
        parser.error("nothing to do: pass --compare and/or --quench-site")
    for p in wrote:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasidual",
        description="Self-dual quasiperiodic chains: spectra, duality, localization diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="diagonalize one model and write per-state diagnostics")
    _add_model_flags(sp)
    sp.add_argument("--spacings", action="store_true", help="also write even-odd spacings CSV")
    sp.add_argument("--edges", action="store_true", help="also write mobility-edge JSON")

    du = sub.add_parser("duality", help="check H(a,b) against H(b,a)")
    _add_model_flags(du, with_limit=False)
    du.add_argument("--no-conjugation", action="store_true",
                    help="skip the dense-transform conjugation residual")

    sw = sub.add_parser("sweep", help="run a plan file over a parameter grid")
    sw.add_argument("--plan", required=True, help="plan path or packaged plan name (e.g. fig1a)")
    sw.add_argument("--output", help="override the plan output directory")

    sc = sub.add_parser("scaling", help="mean-FD finite-size scaling fit over a size ladder")
    sc.add_argument("--family", required=True, choices=_FAMILIES)
    sc.add_argument("--a", type=float)
    sc.add_argument("--b", type=float)
    sc.add_argument("--d", type=int, required=True)
    sc.add_argument("--limit", default="none", choices=("none", "a-infinity", "b-infinity"))
    sc.add_argument("--fib-u", type=int, nargs="+", required=True)
    sc.add_argument("--name", default="scaling")
    sc.add_argument("--eigenvector-cap", type=int, default=10946)
    sc.add_argument("--out")

    le = sub.add_parser("le", help="transfer-matrix Lyapunov exponents at the eigenenergies")
    _add_model_flags(le)

    ry = sub.add_parser("rydberg", help="dipolar Rydberg chain: range comparison and quenches")
    ry.add_argument("--A", type=float, default=1.0, help="dipolar prefactor")
    ry.add_argument("--d", type=int, default=3)
    ry.add_argument("--fib-u", type=int, required=True)
    ry.add_argument("--compare", help="d list to compare, e.g. '2..10'")
    ry.add_argument("--quench-site", type=int, help="1-based site of the initial excitation")
    ry.add_argument("--out")
    return parser


_HANDLERS = {
    "spectrum": _cmd_spectrum,
    "duality": _cmd_duality,
    "sweep": _cmd_sweep,
    "scaling": _cmd_scaling,
    "le": _cmd_le,
    "rydberg": _cmd_rydberg,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = _HANDLERS[args.command]
    try:
        return handler(parser, args)
    except SystemExit:
        raise
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
