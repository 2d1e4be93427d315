"""Acceptance criteria, each at its stated tolerance.

Every test records a PASS/FAIL line that is printed in the pytest terminal
summary (section "acceptance criteria").
"""

import json
import time

import numpy as np
import pytest

from spinc import cli, harmonic, lattice, squaring, topology, verify
from spinc.clifford import PAIRS
from spinc.lattice import LatticeGrid

from oracles import brute_force_degree


def cli_report(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    return code, json.loads(capsys.readouterr().out)


def test_1_algebra_suite(record):
    t0 = time.perf_counter()
    checks = verify.algebra_suite(seed=0, samples=1000)
    elapsed = time.perf_counter() - t0
    wanted = {"clifford.anticommutation", "clifford.skew_adjoint", "clifford.volume_split",
              "clifford.asd_annihilates_plus"}
    names = {c.name for c in checks}
    strict = all(c.tol <= 1e-12 for c in checks if c.name in wanted)
    ok = wanted <= names and strict and all(c.passed for c in checks) and elapsed < 5.0
    worst = max(checks, key=lambda c: c.error / max(c.tol, 1e-300))
    record("1", ok, f"{len(checks)} checks, worst {worst.name}={worst.error:.2e}, {elapsed:.3f}s")
    assert wanted <= names and strict
    assert all(c.passed for c in checks), [c.as_dict() for c in checks if not c.passed]
    assert elapsed < 5.0


def test_2_sigma_laws(record):
    rng = np.random.default_rng(2)
    phi = rng.normal(size=(1000, 2)) + 1j * rng.normal(size=(1000, 2))
    from spinc import forms
    s = squaring.sigma(phi)
    beta = forms.sd_to_two_form(s)
    r = np.sum(np.abs(phi) ** 2, axis=-1)
    theta = rng.uniform(0, 2 * np.pi, size=(1000, 1))
    errors = {
        "self_dual": float(np.max(np.abs(forms.asd_project(beta)))),
        "phase": float(np.max(np.abs(squaring.sigma(np.exp(1j * theta) * phi) - s) / np.maximum(1, r)[:, None])),
        "norm": float(np.max(np.abs(forms.two_form_norm(beta) - np.sqrt(2) * r) / np.maximum(1, r))),
        "volume": float(np.max(np.abs(forms.wedge22(beta, beta) - 2 * r ** 2) / np.maximum(1, r ** 2))),
        "roundtrip": float(np.max(np.abs(squaring.sigma(squaring.pointwise_preimage(s)) - s))
                           / np.max(np.abs(s))),
    }
    tols = {"self_dual": 0.0, "phase": 1e-12, "norm": 1e-12, "volume": 1e-12, "roundtrip": 1e-10}
    ok = all(errors[k] <= tols[k] for k in tols)
    record("2", ok, ", ".join(f"{k}={v:.1e}" for k, v in errors.items()))
    for k in tols:
        assert errors[k] <= tols[k], k


def test_3_calibration(record, capsys):
    code, rep = cli_report(capsys, "calibrate-sigma", "--grid", 16, "--seed", 0, "--trials", 5)
    res = rep["results"]
    ok = (code == 0 and res["kappa_spread"] < 1e-6 and res["max_residual"] < 1e-8
          and len({t["eps"] for t in res["trials"]}) == 1 and len(res["trials"]) == 5)
    record("3", ok, f"kappa={res['kappa']:.12f} eps={res['eps']:+d} spread={res['kappa_spread']:.1e} "
                    f"max residual={res['max_residual']:.1e}")
    assert ok


def test_4_identity_convergence(record, capsys):
    t0 = time.perf_counter()
    code, rep = cli_report(capsys, "verify-identity", "--grid", "8,16,32", "--seed", 7)
    elapsed = time.perf_counter() - t0
    res = rep["results"]
    orders = res["orders"]
    ok = (code == 0 and all(1.7 <= o <= 2.3 for o in orders) and res["constant_residual"] <= 1e-14
          and elapsed < 120)
    table = ", ".join(f"N={row['n']}: {row['residual']:.3g}" for row in res["table"])
    record("4", ok, f"{table}; orders {', '.join(f'{o:.2f}' for o in orders)}; "
                    f"constant {res['constant_residual']:.1e}; {elapsed:.1f}s")
    assert ok


def _gauge_quantities(conn, phi):
    pipe = harmonic.symplectic_pipeline(conn, phi)
    return {
        "sigma": squaring.sigma(phi),
        "identity": lattice.identity_residual(conn, phi),
        "flux": lattice.flux_integers(conn),
        "degrees": pipe.degree_vector,
        "pipeline": pipe.residuals(),
    }


def test_5_gauge_invariance(record):
    grid = LatticeGrid.cubic(8)
    smooth, phi = verify.smooth_pair(grid, 5)
    conn = smooth * lattice.flux_connection(grid, (1, 0, -2, 0, 1, 0))
    rng = np.random.default_rng(55)
    base = _gauge_quantities(conn, phi)
    worst = 0.0
    exact = True
    for _ in range(10):
        conn2, phi2 = lattice.gauge_apply(lattice.random_gauge(grid, rng), conn, phi)
        q = _gauge_quantities(conn2, phi2)
        worst = max(worst, float(np.max(np.abs(q["sigma"] - base["sigma"]))),
                    abs(q["identity"] - base["identity"]) / max(1.0, base["identity"]))
        for k, v in base["pipeline"].items():
            worst = max(worst, abs(q["pipeline"][k] - v) / max(1.0, abs(v)))
        exact &= q["flux"] == base["flux"] and q["degrees"] == base["degrees"]
    ok = worst <= 1e-10 and exact
    record("5", ok, f"10 transforms, worst deviation {worst:.1e}, flux {base['flux']}, degrees {base['degrees']}")
    assert exact and worst <= 1e-10


def test_6_flat_harmonic_solve(record):
    grid = LatticeGrid.cubic(8)
    conn = lattice.trivial_connection(grid)
    phis, reps = harmonic.solve_kernel(conn, 2, tol=1e-10, seed=0)
    variances = [harmonic.site_variance(harmonic.align_global_phase(p)) for p in phis]
    overlap = abs(lattice.l2_inner(grid, phis[0], phis[1]))
    means = np.stack([p.reshape(-1, 2).mean(axis=0) for p in phis])
    independent = abs(np.linalg.det(means)) > 1e-3
    ok = (all(r.converged and r.dirac_rel_residual < 1e-8 for r in reps) and independent
          and all(v < 1e-6 for v in variances) and overlap < 1e-8)
    record("6", ok, f"dirac rel {[f'{r.dirac_rel_residual:.1e}' for r in reps]}, "
                    f"site variance {[f'{v:.1e}' for v in variances]}, overlap {overlap:.1e}")
    assert ok


def test_7_kahler_pipeline(record):
    grid = LatticeGrid.cubic(8)
    conn = lattice.trivial_connection(grid)
    phi, rep = harmonic.solve_smallest(conn, tol=1e-10, seed=0)
    kp = harmonic.kahler_pipeline(conn, phi)
    ref = topology.c1_equal(squaring.sigma(phi), [1.0, 0.0, 0.0])
    # the same chain on an exactly constant spinor is exactly closed
    const = np.broadcast_to(phi.reshape(-1, 2).mean(axis=0), grid.shape + (2,))
    exact = harmonic.kahler_pipeline(conn, const)
    ok = (kp.parallel and kp.sigma_deviation < 1e-10 and kp.closedness_residual <= 1e-14
          and exact.closedness_residual == 0.0 and kp.acs_defect < 1e-10
          and kp.conformal_factor_variance < 1e-12 and ref.equal and kp.degree_vector == (0,) * 6)
    record("7", ok, f"sigma deviation {kp.sigma_deviation:.1e}, |d sigma| {kp.closedness_residual:.1e} "
                    f"(constant: {exact.closedness_residual}), acs {kp.acs_defect:.1e}, "
                    f"conformal var {kp.conformal_factor_variance:.1e}, degrees {kp.degree_vector}")
    assert ok


def test_8_symplectic_corollary(record):
    t0 = time.perf_counter()
    sizes = [8, 16, 32]
    rows = verify.harmonic_form_study(sizes, seed=0, tol=1e-12)
    elapsed = time.perf_counter() - t0
    closed = [r["pipeline"].closedness_residual for r in rows]
    corollary = [r["pipeline"].corollary_residual for r in rows]
    control = [r["control"].corollary_residual for r in rows]
    harm = all(r["solve"].converged and r["solve"].dirac_rel_residual < 1e-8 and r["pipeline"].nowhere_zero
               for r in rows)
    o_closed = verify.observed_orders(sizes, closed)
    o_cor = verify.observed_orders(sizes, corollary)
    ratios = [c / h for c, h in zip(control, corollary)]
    ok = harm and min(o_closed + o_cor) >= 1.7 and min(ratios) >= 10
    record("8", ok, f"|d sigma| {[f'{v:.3g}' for v in closed]} orders {[f'{o:.2f}' for o in o_closed]}; "
                    f"corollary {[f'{v:.3g}' for v in corollary]} orders {[f'{o:.2f}' for o in o_cor]}; "
                    f"control/harmonic >= {min(ratios):.0f}; {elapsed:.0f}s")
    assert harm
    assert min(o_closed) >= 1.7 and min(o_cor) >= 1.7
    assert min(ratios) >= 10


def test_9_degrees(record):
    shape = (8, 8, 8, 8)
    mismatches = []
    for plane in PAIRS:
        for d in range(-2, 3):
            n = topology.winding_sphere_map(shape, plane, d)
            got = topology.degree_2torus(n, plane)
            oracle = brute_force_degree(d, 8, refine=4)
            expected = [0] * 6
            expected[PAIRS.index(plane)] = d
            if not (got == d and abs(oracle - d) < 1e-6 and topology.degree_vector(n) == tuple(expected)
                    and topology.slice_independent(n)):
                mismatches.append((plane, d, got, oracle))
    omega1 = np.broadcast_to([1.0, 0, 0], shape + (3,))
    grid = LatticeGrid.cubic(8)
    rng = np.random.default_rng(9)
    wiggle = lattice.trig_field(grid, rng, 2, kmax=1)
    wiggle *= 0.5 / np.max(np.linalg.norm(wiggle, axis=-1))
    spinor = wiggle + np.array([1.0, 0.0])
    verdicts = [
        topology.c1_equal(omega1, omega1).equal is True,
        topology.c1_equal(squaring.sigma(spinor), omega1).equal is True,
        topology.c1_equal(topology.winding_sphere_map(shape, (0, 1), 1), omega1).equal is False,
    ]
    ok = not mismatches and all(verdicts)
    record("9", ok, f"30 winding fields, {len(mismatches)} mismatches vs 4x L'Huilier oracle; "
                    f"c1_equal verdicts {verdicts}")
    assert not mismatches, mismatches
    assert all(verdicts)


EVEN_FLUXES = [(0, 0, 0, 0, 0, 0), (2, 0, 0, 0, 0, 2), (2, 2, 0, 0, 0, 0), (0, 2, 0, 0, -2, 0)]


def test_10_index_against_derived_formula(record):
    studies = [harmonic.index_study(f, 4) for f in EVEN_FLUXES]
    studies += [harmonic.index_study(f, 6) for f in EVEN_FLUXES[:2]]
    ok = all(s.index == s.formula for s in studies)
    record("10", ok, "; ".join(f"N={s.sites} k={s.flux}: ker={s.kernel} coker={s.cokernel} "
                               f"index={s.index} formula={s.formula}" for s in studies))
    assert ok


@pytest.mark.xfail(strict=True, reason="naive lattice operator: doublers cancel the continuum index")
def test_10b_index_against_continuum(record):
    studies = [harmonic.index_study(f, 4) for f in EVEN_FLUXES[1:3]]
    ok = all(s.index == s.continuum_index for s in studies)
    record("10.b", ok, "continuum Pfaffian " + ", ".join(
        f"k={s.flux}: lattice {s.index} vs {s.continuum_index}" for s in studies) + " (expected fail)")
    assert ok
