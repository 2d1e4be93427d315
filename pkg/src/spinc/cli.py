"""Command-line entry point.

Every command prints one JSON run report on stdout and exits with 0 when all
of its checks pass, 1 when a check fails and 2 on usage or input errors.
"""

import argparse
import json
import math
import sys
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from . import calibration, fieldio, forms, harmonic, lattice, squaring, topology, verify
from .clifford import PAIRS
from .errors import SpincError

SCHEMA = "spinc.report/1"

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "command", "config", "seeds", "results", "verdicts", "passed"],
    "properties": {
        "schema": {"const": SCHEMA},
        "command": {"type": "string"},
        "config": {"type": "object"},
        "seeds": {"type": "array", "items": {"type": "integer"}},
        "results": {"type": "object"},
        "verdicts": {"type": "object", "additionalProperties": {"type": "boolean"}},
        "passed": {"type": "boolean"},
    },
    "additionalProperties": False,
}


class InputError(Exception):
    pass


def _clean(value):
    """JSON-ready copy: arrays to lists, numpy scalars to Python, non-finite to None."""
    if is_dataclass(value) and not isinstance(value, type):
        return _clean(asdict(value))
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [_clean(value.real), _clean(value.imag)]
    return value


def make_report(command, config, seeds, results, verdicts):
    verdicts = {k: bool(v) for k, v in verdicts.items()}
    return {
        "schema": SCHEMA,
        "command": command,
        "config": _clean(config),
        "seeds": [int(s) for s in seeds],
        "results": _clean(results),
        "verdicts": verdicts,
        "passed": all(verdicts.values()),
    }


def dump_report(report):
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False)


def _int_list(text, count=None):
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if count is not None and len(values) != count:
        raise argparse.ArgumentTypeError(f"expected {count} integers, got {len(values)}")
    return values


def _flux(text):
    return _int_list(text, 6)


def _load(path, kinds):
    try:
        archive = fieldio.load(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if archive.kind not in kinds:
        raise InputError(f"{path}: expected a {' or '.join(kinds)} archive, found {archive.kind}")
    return archive


def _pair(phi_path, links_path):
    phi_arc = _load(phi_path, ("spinor+",))
    links_arc = _load(links_path, ("links",))
    if phi_arc.dims != links_arc.dims or tuple(phi_arc.periods) != tuple(links_arc.periods):
        raise InputError("spinor and link archives live on different grids")
    grid = lattice.LatticeGrid(links_arc.dims, links_arc.periods)
    flux = links_arc.extra.get("flux")
    conn = lattice.U1Connection(grid, links_arc.values(), tuple(flux) if flux else None)
    return conn, phi_arc.values()


# -- commands ---------------------------------------------------------------


def cmd_calibrate_sigma(args):
    seeds = [args.seed + t for t in range(args.trials)]
    trials = [calibration.calibrate(s, n=args.grid) for s in seeds]
    kappas = [t.kappa for t in trials]
    eps = {t.eps for t in trials}
    spread = max(kappas) - min(kappas)
    results = {
        "trials": trials,
        "kappa": float(np.mean(kappas)),
        "eps": trials[0].eps,
        "kappa_spread": spread,
        "max_residual": max(t.residual for t in trials),
        "max_rel_residual": max(t.rel_residual for t in trials),
        "frozen": {"kappa": squaring.IDENTITY_KAPPA, "eps": squaring.IDENTITY_EPS},
    }
    verdicts = {
        "eps_consistent": len(eps) == 1,
        "kappa_spread_below_1e-6": spread < 1e-6,
        "residual_below_1e-8": results["max_residual"] < 1e-8,
        "matches_frozen_convention": abs(results["kappa"] - squaring.IDENTITY_KAPPA) < 1e-6
        and eps == {squaring.IDENTITY_EPS},
    }
    config = {"grid": args.grid, "trials": args.trials}
    return make_report("calibrate-sigma", config, seeds, results, verdicts)


def cmd_verify_algebra(args):
    checks = verify.algebra_suite(args.seed, args.samples)
    results = {"checks": [c.as_dict() for c in checks]}
    verdicts = {c.name: c.passed for c in checks}
    return make_report("verify-algebra", {"samples": args.samples}, [args.seed], results, verdicts)


def cmd_verify_identity(args):
    sizes = args.grid
    residuals, orders = verify.identity_study(sizes, args.seed)
    const = verify.constant_identity_residual(min(sizes))
    results = {
        "table": [{"n": n, "residual": r} for n, r in zip(sizes, residuals)],
        "orders": orders,
        "constant_residual": const,
    }
    verdicts = {
        "order_in_range": bool(orders) and all(1.7 <= o <= 2.3 for o in orders),
        "constant_exact": const <= 1e-14,
    }
    return make_report("verify-identity", {"grid": sizes}, [args.seed], results, verdicts)


def cmd_solve(args):
    grid = lattice.LatticeGrid.cubic(args.grid)
    conn = lattice.flux_connection(grid, args.flux)
    count = 1 + args.deflate
    phis, reports = harmonic.solve_kernel(
        conn, count, tol=args.tol, seed=args.seed, maxiter=args.maxiter, shift=args.shift
    )
    results = {"flux": args.flux, "flux_measured": lattice.flux_integers(conn), "modes": []}
    for k, (phi, rep) in enumerate(zip(phis, reports)):
        row = asdict(rep)
        row["site_variance"] = harmonic.site_variance(harmonic.align_global_phase(phi))
        results["modes"].append(row)
    if args.out:
        out = Path(args.out)
        for k, phi in enumerate(phis):
            path = out if k == 0 else out.with_name(f"{out.stem}.{k}{out.suffix}")
            fieldio.save(path, fieldio.FieldArchive("spinor+", phi, grid.periods, {"seed": args.seed + k}))
        results["written"] = [str(out)] + [
            str(out.with_name(f"{out.stem}.{k}{out.suffix}")) for k in range(1, count)
        ]
    if args.links_out:
        fieldio.save(args.links_out, fieldio.FieldArchive("links", conn.links, grid.periods, {"flux": list(args.flux)}))
    verdicts = {f"mode{k}_converged": rep.converged for k, rep in enumerate(reports)}
    config = {"grid": args.grid, "flux": args.flux, "tol": args.tol, "deflate": args.deflate, "shift": args.shift}
    return make_report("solve", config, [args.seed + k for k in range(count)], results, verdicts)


def cmd_pipeline(args):
    conn, phi = _pair(args.phi, args.links)
    if args.kahler:
        rep = harmonic.kahler_pipeline(conn, phi, parallel_tol=args.tol)
    else:
        rep = harmonic.symplectic_pipeline(conn, phi)
    verdicts = {
        "nowhere_zero": rep.nowhere_zero,
        "harmonic": rep.dirac_rel_residual < args.tol,
        "transversal": rep.transversality_norm < args.tol,
        "closed": rep.closedness_residual < args.tol,
    }
    if args.kahler:
        verdicts["parallel"] = bool(rep.parallel)
    config = {"phi": str(args.phi), "links": str(args.links), "tol": args.tol, "kahler": args.kahler}
    return make_report("pipeline", config, [], {"report": rep}, verdicts)


def cmd_degrees(args):
    alpha = _load(args.alpha, ("sdform",)).values()
    if args.ref:
        ref = _load(args.ref, ("sdform",)).values()
        if ref.shape != alpha.shape:
            raise InputError("reference field has a different grid")
    else:
        ref = forms.OMEGA[0] @ forms.OMEGA.T / 2.0  # constant omega_1 in coefficients
    cmp = topology.c1_equal(alpha, ref)
    results = {
        "degrees": dict(zip(["%d%d" % p for p in PAIRS], cmp.degrees)),
        "reference_degrees": dict(zip(["%d%d" % p for p in PAIRS], cmp.reference_degrees)),
        "degree_vector": cmp.degrees,
        "reference_vector": cmp.reference_degrees,
        "slice_independent": cmp.slice_independent,
    }
    verdicts = {"c1_equal": cmp.equal}
    config = {"alpha": str(args.alpha), "ref": str(args.ref) if args.ref else "constant omega_1"}
    return make_report("degrees", config, [], results, verdicts)


def _gauge_quantities(conn, phi):
    out = {
        "sigma": squaring.sigma(phi),
        "identity_residual": lattice.identity_residual(conn, phi),
        "pipeline": harmonic.symplectic_pipeline(conn, phi),
    }
    try:
        out["flux"] = lattice.flux_integers(conn)
    except SpincError as exc:
        out["flux"] = str(exc)
    return out


def cmd_gauge_check(args):
    conn, phi = _pair(args.phi, args.links)
    rng = np.random.default_rng(args.seed)
    base = _gauge_quantities(conn, phi)
    base_res = base["pipeline"].residuals()
    worst = {"sigma": 0.0, "identity_residual": 0.0, "pipeline": 0.0}
    flux_ok = degrees_ok = True
    for _ in range(args.transforms):
        s = lattice.random_gauge(conn.grid, rng)
        conn2, phi2 = lattice.gauge_apply(s, conn, phi)
        q = _gauge_quantities(conn2, phi2)
        worst["sigma"] = max(worst["sigma"], float(np.max(np.abs(q["sigma"] - base["sigma"]))))
        worst["identity_residual"] = max(
            worst["identity_residual"], abs(q["identity_residual"] - base["identity_residual"])
        )
        res = q["pipeline"].residuals()
        for key, val in base_res.items():
            worst["pipeline"] = max(worst["pipeline"], abs(res[key] - val) / max(1.0, abs(val)))
        flux_ok &= q["flux"] == base["flux"]
        degrees_ok &= q["pipeline"].degree_vector == base["pipeline"].degree_vector
    results = {
        "max_deviation": worst,
        "flux": base["flux"],
        "degree_vector": base["pipeline"].degree_vector,
        "identity_residual": base["identity_residual"],
    }
    verdicts = {
        "sigma_invariant": worst["sigma"] <= args.tol,
        "identity_residual_invariant": worst["identity_residual"] <= args.tol,
        "pipeline_invariant": worst["pipeline"] <= args.tol,
        "flux_invariant": flux_ok,
        "degrees_invariant": degrees_ok,
    }
    config = {"phi": str(args.phi), "links": str(args.links), "transforms": args.transforms, "tol": args.tol}
    return make_report("gauge-check", config, [args.seed], results, verdicts)


def cmd_make_alpha(args):
    shape = (args.grid,) * 4
    n = topology.winding_sphere_map(shape, tuple(args.plane), args.degree)
    fieldio.save(args.out, fieldio.FieldArchive("sdform", n, extra={"plane": args.plane, "degree": args.degree}))
    results = {"written": str(args.out), "degree_vector": topology.degree_vector(n)}
    config = {"grid": args.grid, "plane": args.plane, "degree": args.degree}
    return make_report("make-alpha", config, [], results, {"written": True})


def build_parser():
    parser = argparse.ArgumentParser(prog="spinc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate-sigma", help="fit the squaring-map normalisation spectrally")
    p.add_argument("--grid", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=5)
    p.set_defaults(func=cmd_calibrate_sigma)

    p = sub.add_parser("verify-algebra", help="Clifford, forms and squaring-map invariants")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_verify_algebra)

    p = sub.add_parser("verify-identity", help="convergence of the Dirac identity residual")
    p.add_argument("--grid", type=_int_list, default=[8, 16, 32])
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_verify_identity)

    p = sub.add_parser("solve", help="lowest modes of the Dirac operator of a flux connection")
    p.add_argument("--grid", type=int, required=True)
    p.add_argument("--flux", type=_flux, default=[0] * 6)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--deflate", type=int, default=0)
    p.add_argument("--maxiter", type=int, default=100)
    p.add_argument("--shift", type=float, default=harmonic.DEFAULT_SHIFT)
    p.add_argument("--out", type=Path)
    p.add_argument("--links-out", type=Path)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("pipeline", help="symplectic (or Kähler) diagnostics of a stored pair")
    p.add_argument("--phi", type=Path, required=True)
    p.add_argument("--links", type=Path, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--kahler", action="store_true")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("degrees", help="2-torus degrees and the c1 comparison")
    p.add_argument("--alpha", type=Path, required=True)
    p.add_argument("--ref", type=Path)
    p.set_defaults(func=cmd_degrees)

    p = sub.add_parser("gauge-check", help="invariance of all diagnostics under random gauge transforms")
    p.add_argument("--phi", type=Path, required=True)
    p.add_argument("--links", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--transforms", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_gauge_check)

    p = sub.add_parser("make-alpha", help="write a winding self-dual form archive")
    p.add_argument("--grid", type=int, required=True)
    p.add_argument("--plane", type=lambda t: _int_list(t, 2), default=[0, 1])
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_make_alpha)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except (InputError, SpincError, ValueError) as exc:
        print(f"spinc {args.command}: {exc}", file=sys.stderr)
        return 2
    print(dump_report(report))
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
