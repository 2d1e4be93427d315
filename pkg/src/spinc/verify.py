"""Reusable verification suites behind the ``verify-*`` commands."""

from dataclasses import asdict, dataclass

import numpy as np

from . import clifford, forms, harmonic, lattice, squaring


@dataclass
class Check:
    name: str
    error: float
    tol: float

    @property
    def passed(self):
        return bool(np.isfinite(self.error) and self.error <= self.tol)

    def as_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _random_spinors(rng, n):
    return rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))


def algebra_suite(seed=0, samples=1000):
    """Clifford, exterior-algebra and squaring-map invariants on seeded random data."""
    rng = np.random.default_rng(seed)
    checks = []
    g = clifford.gamma_matrices()
    eye4 = np.eye(4)

    anti = max(
        np.abs(g[m] @ g[n] + g[n] @ g[m] + 2 * (m == n) * eye4).max() for m in range(4) for n in range(4)
    )
    checks.append(Check("clifford.anticommutation", float(anti), 0.0))

    v = rng.normal(size=(samples, 4))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    phi = _random_spinors(rng, samples)
    psi = _random_spinors(rng, samples)
    twice = clifford.gamma_vec_back(v, clifford.gamma_vec(v, phi)) + phi
    checks.append(Check("clifford.unit_square", float(np.abs(twice).max()), 1e-14))

    w = rng.normal(size=(samples, 4))
    skew = clifford.inner(clifford.gamma_vec(w, phi), psi) + clifford.inner(phi, clifford.gamma_vec_back(w, psi))
    checks.append(Check("clifford.skew_adjoint", float(np.abs(skew).max()), 1e-12))

    vol = g[0] @ g[1] @ g[2] @ g[3]
    vol_err = max(np.abs(vol[:2, :2] + np.eye(2)).max(), np.abs(vol[2:, 2:] - np.eye(2)).max())
    checks.append(Check("clifford.volume_split", float(vol_err), 1e-15))

    asd = max(np.abs(clifford.gamma_2form(forms.OMEGA_BAR[k], phi)).max() for k in range(3))
    sd_minus = max(np.abs(clifford.gamma_2form_minus(forms.OMEGA[k], psi)).max() for k in range(3))
    checks.append(Check("clifford.asd_annihilates_plus", float(asd), 1e-12))
    checks.append(Check("clifford.sd_annihilates_minus", float(sd_minus), 1e-12))

    blocks = [np.tensordot(forms.OMEGA[k], clifford.SIGMA_PLUS, axes=1) for k in range(3)]
    sq = max(np.abs(b @ b + 4 * np.eye(2)).max() for b in blocks)
    checks.append(Check("clifford.sd_square", float(sq), 1e-14))
    quat = np.abs(blocks[0] @ blocks[1] - 2 * clifford.EPS_QUAT * blocks[2]).max()
    checks.append(Check("clifford.quaternion_relation", float(quat), 1e-14))

    beta = rng.normal(size=(samples, 6))
    checks.append(Check("forms.star_involution", float(np.abs(forms.hodge_star2(forms.hodge_star2(beta)) - beta).max()), 0.0))
    sd = forms.sd_to_two_form(forms.sd_project(beta))
    asdp = forms.asd_project(beta)
    checks.append(Check("forms.projector_sum", float(np.abs(sd + asdp - beta).max()), 1e-14))
    pyth = np.abs(np.sum(beta ** 2, 1) - np.sum(sd ** 2, 1) - np.sum(asdp ** 2, 1)).max()
    checks.append(Check("forms.pythagoras", float(pyth), 1e-12))
    beta2 = rng.normal(size=(samples, 6))
    wedge = np.abs(forms.wedge22(beta, forms.hodge_star2(beta2)) - np.sum(beta * beta2, 1)).max()
    checks.append(Check("forms.wedge_star_inner", float(wedge), 1e-12))

    s = squaring.sigma(phi)
    s_form = forms.sd_to_two_form(s)
    checks.append(Check("sigma.self_dual", float(np.abs(forms.hodge_star2(s_form) - s_form).max()), 1e-14))
    theta = rng.uniform(0, 2 * np.pi, size=(samples, 1))
    checks.append(Check("sigma.phase_invariance", float(np.abs(squaring.sigma(np.exp(1j * theta) * phi) - s).max()), 1e-12))
    r = clifford.norm2(phi)
    # relative to max(1, value) so the tolerance does not depend on the sample scale
    norm_err = np.abs(forms.two_form_norm(s_form) - np.sqrt(2) * r) / np.maximum(1.0, r)
    vol_err = np.abs(forms.wedge22(s_form, s_form) - 2 * r ** 2) / np.maximum(1.0, r ** 2)
    checks.append(Check("sigma.norm_law", float(norm_err.max()), 1e-12))
    checks.append(Check("sigma.volume_law", float(vol_err.max()), 1e-12))
    checks.append(Check("sigma.clifford_route", float(np.abs(squaring.sigma_clifford(phi) - s).max()), 1e-12))
    back = squaring.sigma(squaring.pointwise_preimage(s))
    checks.append(Check("sigma.preimage_roundtrip", float(np.abs(back - s).max()), 1e-10))
    return checks


def smooth_pair(grid, seed, kmax=1, amplitude=1.0):
    """Seeded smooth (phi, A) for refinement studies: same continuum data on every grid."""
    rng = np.random.default_rng(seed)
    spinor = lattice.TrigPolynomial(rng, 2, kmax, periods=grid.periods)
    potential = lattice.TrigPolynomial(rng, 4, kmax, real=True, scale=amplitude, periods=grid.periods)
    phi = spinor.on_grid(grid) + np.array([1.0, 0.25])
    return lattice.connection_from_potential(grid, potential), phi


def observed_orders(sizes, values):
    """Convergence orders log(r_i / r_{i+1}) / log(N_{i+1} / N_i)."""
    out = []
    for (n0, r0), (n1, r1) in zip(zip(sizes, values), zip(sizes[1:], values[1:])):
        if r0 > 0 and r1 > 0:
            out.append(float(np.log(r0 / r1) / np.log(n1 / n0)))
        else:
            out.append(float("nan"))
    return out


def identity_study(sizes, seed):
    residuals = []
    for n in sizes:
        grid = lattice.LatticeGrid.cubic(n)
        conn, phi = smooth_pair(grid, seed)
        residuals.append(lattice.identity_residual(conn, phi))
    return residuals, observed_orders(sizes, residuals)


def constant_identity_residual(n=8):
    grid = lattice.LatticeGrid.cubic(n)
    phi = np.broadcast_to(np.array([0.6 + 0.2j, -0.3 + 0.5j]), grid.shape + (2,)).copy()
    return lattice.identity_residual(lattice.trivial_connection(grid), phi)


_TP = 2 * np.pi


def rotating_gauge_gradient(x):
    """``-d theta`` for a fixed smooth theta mixing frequencies 1 and 2.

    Sampled as links this connection is not exactly flat on the lattice
    (frequency-dependent midpoint errors), while its continuum limit is pure
    gauge, so ``exp(i theta) * const`` is a continuum parallel spinor.
    """
    x0, x1, x2, x3 = (x[..., i] for i in range(4))
    out = np.empty(x.shape)
    out[..., 0] = 0.6 * _TP * np.cos(_TP * x0) * np.cos(2 * _TP * x1) + 0.3 * _TP * np.cos(_TP * (x0 + 2 * x2))
    out[..., 1] = -1.2 * _TP * np.sin(_TP * x0) * np.sin(2 * _TP * x1)
    out[..., 2] = -0.8 * _TP * np.sin(2 * _TP * x2) * np.sin(_TP * x3) + 0.6 * _TP * np.cos(_TP * (x0 + 2 * x2))
    out[..., 3] = 0.4 * _TP * np.cos(2 * _TP * x2) * np.cos(_TP * x3)
    return -out


def harmonic_form_study(sizes, seed=0, tol=1e-12):
    """Solve for a harmonic spinor of the rotating-gauge connection on each grid.

    Returns per-grid pipeline reports plus the non-harmonic control residuals.
    """
    rows = []
    for n in sizes:
        grid = lattice.LatticeGrid.cubic(n)
        conn = lattice.connection_from_potential(grid, rotating_gauge_gradient)
        phi, rep = harmonic.solve_smallest(conn, tol=tol, seed=seed)
        pipe = harmonic.symplectic_pipeline(conn, phi)
        control = smooth_pair(grid, seed + 1)[1]
        control /= lattice.l2_norm(grid, control)
        neg = harmonic.symplectic_pipeline(conn, control)
        rows.append({"n": n, "solve": rep, "pipeline": pipe, "control": neg})
    return rows
