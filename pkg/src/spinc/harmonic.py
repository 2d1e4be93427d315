"""Harmonic and parallel spinors, and the Kähler / symplectic pipelines."""

from dataclasses import dataclass, field

import numpy as np

from . import clifford, lattice
from .errors import AntipodalEdge, DegenerateForm, NonIntegerDegree, NotConverged, ZeroField
from .forms import acs_from_sd, conformal_factor, sd_to_two_form
from .squaring import DEFAULT_KAPPA, IDENTITY_KAPPA, sigma
from .topology import degree_vector, sphere_map

DEFAULT_SHIFT = 1e-8
NOWHERE_ZERO_REL = 1e-6


@dataclass
class SolveReport:
    rayleigh: float
    dirac_rel_residual: float
    eigen_residual: float
    iterations: int
    converged: bool
    cg_iterations: int = 0
    history: list = field(default_factory=list)


def _project_out(grid, x, basis):
    # modified Gram-Schmidt against an orthonormal basis
    for b in basis:
        x = x - lattice.l2_inner(grid, x, b) * b
    return x


def _normalise(grid, x):
    nrm = lattice.l2_norm(grid, x)
    if nrm == 0.0:
        raise ZeroField("start vector vanishes after deflation")
    return x / nrm


def conjugate_gradient(apply, b, tol, maxiter):
    """Plain CG for a Hermitian positive definite ``apply``; returns (x, iterations)."""
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rr = np.vdot(r, r).real
    stop = (tol ** 2) * np.vdot(b, b).real
    it = 0
    while rr > stop and it < maxiter:
        ap = apply(p)
        alpha = rr / np.vdot(p, ap).real
        x += alpha * p
        r -= alpha * ap
        rr_new = np.vdot(r, r).real
        p = r + (rr_new / rr) * p
        rr = rr_new
        it += 1
    return x, it


def start_vector(grid, seed, kind="smooth"):
    """Deterministic start vector.

    ``smooth`` draws a random trigonometric polynomial with modes |k| <= 1,
    which carries no weight on the momentum-pi doubler modes of the central
    difference operator; ``random`` draws independent Gaussians per site.
    """
    rng = np.random.default_rng(seed)
    if kind == "smooth":
        return lattice.trig_field(grid, rng, 2, kmax=1)
    if kind == "random":
        return rng.normal(size=grid.shape + (2,)) + 1j * rng.normal(size=grid.shape + (2,))
    raise ValueError(f"unknown start kind {kind!r}")


def solve_smallest(
    conn,
    tol=1e-10,
    maxiter=100,
    seed=0,
    deflate=(),
    shift=DEFAULT_SHIFT,
    start="smooth",
    cg_tol=1e-10,
    cg_maxiter=20000,
    sector=None,
    strict=False,
    vector_tol=None,
):
    """Lowest eigenvector of D^dagger D by shifted inverse power iteration.

    Each step solves ``(D^dagger D + shift) y = x`` by conjugate gradients and
    re-orthogonalises against the (orthonormal) fields in ``deflate``.  The
    iteration stops once the Rayleigh quotient changes by less than ``tol``
    relative to ``max(rayleigh, shift)`` and the eigen-residual
    ``|D^dagger D phi - rayleigh phi|``, measured against the stencil bound
    ``(sum_mu 1/h_mu)^2``, is below ``sqrt(tol)``.

    Every eigenvalue of the naive lattice operator is (at least) four-fold
    degenerate because of the doubler symmetries; ``sector=(s01, s23)``
    restricts the iteration to one joint eigenspace of two commuting
    symmetries (see :func:`spinc.lattice.sector_projection`), which makes the
    lowest mode unique up to phase for generic links.

    Rayleigh quotients converge quadratically in the eigenvector error, so
    the default test pins the vector only to about ``sqrt(tol)``; pass
    ``vector_tol`` to also demand ``eigen_residual < vector_tol`` when the
    field itself (not just the eigenvalue) is compared across runs.

    Returns the unit-L2 field and a :class:`SolveReport`.  With ``strict``
    a non-converged run raises :class:`NotConverged` instead.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    grid = conn.grid
    basis = [np.asarray(b, dtype=complex) for b in deflate]
    for b in basis:
        lattice._check_field(grid, b, 2)

    def normal(v):
        return lattice.dirac_normal(conn, v)

    def restrict(v):
        if sector is not None:
            v = lattice.sector_projection(grid, v, sector)
        return _project_out(grid, v, basis)

    def shifted(v):
        return restrict(normal(v) + shift * v)

    scale = sum(1.0 / h for h in grid.spacing) ** 2
    x = _normalise(grid, restrict(start_vector(grid, seed, start)))
    lam = float(lattice.l2_inner(grid, normal(x), x).real)
    history = [lam]
    converged = False
    cg_total = 0
    it = 0
    eig_res = np.inf
    for it in range(1, maxiter + 1):
        y, k = conjugate_gradient(shifted, x, cg_tol, cg_maxiter)
        cg_total += k
        x = _normalise(grid, restrict(y))
        nx = normal(x)
        lam_new = float(lattice.l2_inner(grid, nx, x).real)
        history.append(lam_new)
        eig_res = lattice.l2_norm(grid, nx - lam_new * x) / scale
        change = abs(lam_new - lam)
        lam = lam_new
        vector_ok = vector_tol is None or eig_res < vector_tol
        if change <= tol * max(abs(lam), shift) and eig_res < np.sqrt(tol) and vector_ok:
            converged = True
            break

    dx = lattice.dirac(conn, x)
    report = SolveReport(
        rayleigh=max(lam, 0.0),
        dirac_rel_residual=lattice.l2_norm(grid, dx) / lattice.l2_norm(grid, x),
        eigen_residual=float(eig_res),
        iterations=it,
        converged=converged,
        cg_iterations=cg_total,
        history=history,
    )
    if strict and not converged:
        raise NotConverged("inverse iteration did not converge", report)
    return x, report


def solve_kernel(conn, count, **kwargs):
    """``count`` mutually orthogonal low modes, each found with deflation."""
    found, reports = [], []
    seed = kwargs.pop("seed", 0)
    for k in range(count):
        phi, rep = solve_smallest(conn, seed=seed + k, deflate=found, **kwargs)
        found.append(phi)
        reports.append(rep)
    return found, reports


def align_global_phase(phi):
    """Multiply by the unit constant making the field's total sum real positive."""
    z = np.sum(phi[..., 0]) if abs(np.sum(phi[..., 0])) > abs(np.sum(phi[..., 1])) else np.sum(phi[..., 1])
    if z == 0:
        return phi
    return phi * (np.conj(z) / abs(z))


def site_variance(phi):
    """Mean squared deviation of the field from its site average."""
    phi = np.asarray(phi)
    mean = phi.reshape(-1, phi.shape[-1]).mean(axis=0)
    return float(np.mean(clifford.norm2(phi - mean)))


def is_parallel(conn, phi, tol=1e-8):
    """Return ``(flag, defect)`` with ``defect = |nabla phi| / |phi|`` in L2."""
    grid = conn.grid
    nrm = lattice.l2_norm(grid, phi)
    if nrm == 0.0:
        raise ZeroField("parallel test needs a nonzero field")
    total = sum(lattice.l2_norm(grid, lattice.cov_deriv(conn, phi, mu)) ** 2 for mu in range(4))
    defect = float(np.sqrt(total) / nrm)
    return defect < tol, defect


@dataclass
class PipelineReport:
    dirac_rel_residual: float
    transversality_norm: float
    min_modulus: float
    mean_modulus: float
    nowhere_zero: bool
    closedness_residual: float
    corollary_residual: float
    acs_defect: float | None = None
    degree_vector: tuple | None = None
    degree_error: str | None = None
    # Kähler-only fields
    parallel: bool | None = None
    parallel_defect: float | None = None
    sigma_deviation: float | None = None
    conformal_factor_variance: float | None = None

    def residuals(self):
        """The gauge-invariant numeric fields, keyed by name."""
        names = (
            "dirac_rel_residual",
            "transversality_norm",
            "min_modulus",
            "closedness_residual",
            "corollary_residual",
            "acs_defect",
            "parallel_defect",
            "sigma_deviation",
            "conformal_factor_variance",
        )
        return {k: getattr(self, k) for k in names if getattr(self, k) is not None}


def corollary_form(conn, phi):
    """``2 d*sigma(phi) + <nabla phi, i phi>``, which vanishes for harmonic nowhere-zero phi."""
    grid = conn.grid
    return 2.0 * lattice.dstar2(grid, sd_to_two_form(sigma(phi, IDENTITY_KAPPA))) + lattice.inner_one_form(conn, phi)


def symplectic_pipeline(conn, phi, nowhere_zero_rel=NOWHERE_ZERO_REL):
    """Symplectic diagnostics of the pair (A, phi): harmonicity, transversality, closedness, degrees."""
    grid = conn.grid
    phi = lattice._check_field(grid, np.asarray(phi, dtype=complex), 2)
    nrm = lattice.l2_norm(grid, phi)
    dirac_rel = lattice.l2_norm(grid, lattice.dirac(conn, phi)) / nrm if nrm > 0 else 0.0
    transverse = lattice.inner_one_form(conn, phi)
    modulus = np.sqrt(clifford.norm2(phi))
    min_mod = float(modulus.min())
    mean_mod = float(modulus.mean())
    nowhere_zero = bool(mean_mod > 0 and min_mod > nowhere_zero_rel * mean_mod)
    alpha = sigma(phi, DEFAULT_KAPPA)
    closed = lattice.l2_norm(grid, lattice.d2(grid, sd_to_two_form(alpha)))
    report = PipelineReport(
        dirac_rel_residual=float(dirac_rel),
        transversality_norm=lattice.l2_norm(grid, transverse),
        min_modulus=min_mod,
        mean_modulus=mean_mod,
        nowhere_zero=nowhere_zero,
        closedness_residual=closed,
        corollary_residual=lattice.l2_norm(grid, corollary_form(conn, phi)),
    )
    if nowhere_zero:
        j = acs_from_sd(alpha)
        report.acs_defect = float(np.max(np.linalg.norm(j @ j + np.eye(4), axis=(-2, -1))))
        try:
            report.degree_vector = degree_vector(sphere_map(alpha))
        except (AntipodalEdge, NonIntegerDegree, DegenerateForm) as exc:
            report.degree_error = str(exc)
    return report


def kahler_pipeline(conn, phi, parallel_tol=1e-8, nowhere_zero_rel=NOWHERE_ZERO_REL):
    """Kähler diagnostics: the symplectic report plus parallelism and constancy."""
    report = symplectic_pipeline(conn, phi, nowhere_zero_rel)
    flag, defect = is_parallel(conn, phi, parallel_tol)
    report.parallel = bool(flag)
    report.parallel_defect = defect
    alpha = sigma(np.asarray(phi, dtype=complex), DEFAULT_KAPPA)
    mean = alpha.reshape(-1, 3).mean(axis=0)
    report.sigma_deviation = float(np.max(np.abs(alpha - mean)))
    if report.nowhere_zero:
        report.conformal_factor_variance = float(np.var(conformal_factor(alpha)))
    return report


def pfaffian_flux(flux):
    """k01 k23 - k02 k13 + k03 k12: the continuum index of the twisted Dirac operator."""
    k01, k02, k03, k12, k13, k23 = flux
    return k01 * k23 - k02 * k13 + k03 * k12


def lattice_index_formula(flux):
    """Index of the naive lattice operator predicted from its doublers.

    Each of the 16 momentum corners ``n`` contributes ``(-1)^|n|`` times the
    continuum index, and the signs cancel; the operator is also a square
    matrix, so its kernel and cokernel always have equal dimension.
    """
    corners = [sum(bits) for bits in np.ndindex(2, 2, 2, 2)]
    return int(sum((-1) ** c for c in corners) * pfaffian_flux(flux))


def dense_dirac(conn):
    """D^A as a dense matrix on the flattened (site, component) index."""
    grid = conn.grid
    n = grid.n_sites * 2
    mat = np.empty((n, n), dtype=complex)
    e = np.zeros(n, dtype=complex)
    for j in range(n):
        e[j] = 1.0
        mat[:, j] = lattice.dirac(conn, e.reshape(grid.shape + (2,))).ravel()
        e[j] = 0.0
    return mat


@dataclass
class IndexStudy:
    flux: tuple
    sites: int
    kernel: int
    cokernel: int
    index: int
    formula: int
    continuum_index: int
    gap: float


def index_study(flux, n, threshold=1e-8):
    """Brute-force kernel and cokernel dimensions of D^A for a flux connection on n^4."""
    grid = lattice.LatticeGrid.cubic(n)
    conn = lattice.flux_connection(grid, flux)
    mat = dense_dirac(conn)
    sv_d = np.linalg.svd(mat, compute_uv=False)
    sv_adj = np.linalg.svd(mat.conj().T, compute_uv=False)
    kernel = int(np.sum(sv_d < threshold))
    cokernel = int(np.sum(sv_adj < threshold))
    above = np.sort(sv_d[sv_d >= threshold])
    return IndexStudy(
        flux=tuple(flux),
        sites=n,
        kernel=kernel,
        cokernel=cokernel,
        index=kernel - cokernel,
        formula=lattice_index_formula(flux),
        continuum_index=pfaffian_flux(flux),
        gap=float(above[0]) if above.size else float("nan"),
    )
