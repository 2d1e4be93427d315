"""Periodic 4D lattice: fields, U(1) links, covariant differences, Dirac operator.

Site arrays have shape (N0, N1, N2, N3, ...) with the component axis last.
Connections are stored as link phases ``u(x, mu)`` in an array of shape
(N0, N1, N2, N3, 4); ``u(x, mu)`` transports from ``x + mu`` to ``x`` so that

    (nabla_mu phi)(x) = [u(x, mu) phi(x + mu) - conj(u(x - mu, mu)) phi(x - mu)] / (2 h_mu)

approximates ``(d + iA) phi`` when ``u(x, mu) = exp(i h_mu A_mu(x + h_mu/2))``.
"""

from dataclasses import dataclass, field

import numba
import numpy as np

from . import clifford
from .clifford import PAIRS
from .errors import NonQuantizedFlux, ShapeMismatch
from .forms import sd_to_two_form
from .squaring import IDENTITY_EPS, IDENTITY_KAPPA, sigma

THREE_FORM_TRIPLES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))
FLUX_TOL = 1e-6


@dataclass(frozen=True)
class LatticeGrid:
    shape: tuple
    periods: tuple = (1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        periods = tuple(float(p) for p in self.periods)
        if len(shape) != 4 or len(periods) != 4:
            raise ValueError("a lattice grid has exactly four axes")
        for n in shape:
            if n < 4 or n % 2:
                raise ValueError(f"sites per axis must be even and >= 4, got {n}")
        if any(p <= 0 for p in periods):
            raise ValueError("periods must be positive")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "periods", periods)

    @classmethod
    def cubic(cls, n, period=1.0):
        return cls((n,) * 4, (period,) * 4)

    @property
    def spacing(self):
        return tuple(p / n for p, n in zip(self.periods, self.shape))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def n_sites(self):
        return int(np.prod(self.shape))

    def coords(self):
        """Coordinate arrays x^0..x^3 of all sites (each of grid shape)."""
        axes = [np.arange(n) * h for n, h in zip(self.shape, self.spacing)]
        return np.meshgrid(*axes, indexing="ij")

    def points(self, offset=(0.0, 0.0, 0.0, 0.0)):
        """Site coordinates stacked along a trailing axis, optionally shifted."""
        return np.stack([x + o for x, o in zip(self.coords(), offset)], axis=-1)


@dataclass
class U1Connection:
    grid: LatticeGrid
    links: np.ndarray
    flux: tuple | None = field(default=None)

    def __post_init__(self):
        self.links = np.asarray(self.links, dtype=complex)
        if self.links.shape != self.grid.shape + (4,):
            raise ShapeMismatch(
                f"links have shape {self.links.shape}, expected {self.grid.shape + (4,)}"
            )
        if not np.allclose(np.abs(self.links), 1.0, rtol=0, atol=1e-12):
            raise ValueError("link variables must have unit modulus")

    def __mul__(self, other):
        """Pointwise product of link phases (tensor product of line bundles)."""
        if not isinstance(other, U1Connection):
            return NotImplemented
        if other.grid != self.grid:
            raise ShapeMismatch("connections live on different grids")
        flux = None
        if self.flux is not None and other.flux is not None:
            flux = tuple(a + b for a, b in zip(self.flux, other.flux))
        return U1Connection(self.grid, self.links * other.links, flux)


def trivial_connection(grid):
    return U1Connection(grid, np.ones(grid.shape + (4,), dtype=complex), (0,) * 6)


def connection_from_potential(grid, potential):
    """Links ``exp(i h_mu A_mu)`` sampled at link midpoints.

    ``potential`` is either a real :class:`TrigPolynomial` with four
    components or a callable mapping points (..., 4) to 1-form values
    (..., 4).  It must be periodic on the torus.
    """
    h = grid.spacing
    phases = np.empty(grid.shape + (4,))
    for mu in range(4):
        offset = [0.0] * 4
        offset[mu] = 0.5 * h[mu]
        if isinstance(potential, TrigPolynomial):
            a = potential.on_grid(grid, offset)
        else:
            a = np.asarray(potential(grid.points(offset)), dtype=float)
        phases[..., mu] = h[mu] * a[..., mu]
    return U1Connection(grid, np.exp(1j * phases))


def flux_connection(grid, flux):
    """Constant-curvature connection with integer fluxes ``k_{mu nu}``.

    ``flux`` lists k01, k02, k03, k12, k13, k23.  Each plaquette of the
    (mu, nu) plane carries the phase ``2 pi k_{mu nu} / (N_mu N_nu)``; the
    transition twist sits on the last ``mu`` layer.
    """
    flux = tuple(int(k) for k in flux)
    if len(flux) != 6:
        raise ValueError("need six flux integers")
    idx = np.meshgrid(*[np.arange(n) for n in grid.shape], indexing="ij")
    phase = np.zeros(grid.shape + (4,))
    for k, (mu, nu) in zip(flux, PAIRS):
        if k == 0:
            continue
        n_mu, n_nu = grid.shape[mu], grid.shape[nu]
        phase[..., nu] += 2 * np.pi * k * idx[mu] / (n_mu * n_nu)
        last = idx[mu] == n_mu - 1
        phase[..., mu] -= np.where(last, 2 * np.pi * k * idx[nu] / n_nu, 0.0)
    return U1Connection(grid, np.exp(1j * phase), flux)


def random_connection(grid, rng, amplitude=np.pi):
    """Links with independent phases uniform in [-amplitude, amplitude]."""
    phase = rng.uniform(-amplitude, amplitude, size=grid.shape + (4,))
    return U1Connection(grid, np.exp(1j * phase))


def random_gauge(grid, rng):
    return np.exp(2j * np.pi * rng.uniform(size=grid.shape))


class TrigPolynomial:
    """Random trigonometric polynomial on the torus with modes ``|k_mu| <= kmax``.

    Coefficients are drawn once from ``rng``; the polynomial can then be
    sampled on any grid (and any shifted copy of it) so that refinement
    studies see the same continuum function.
    """

    def __init__(self, rng, components, kmax=1, real=False, scale=1.0, periods=(1.0,) * 4):
        size = 2 * kmax + 1
        shape = (size,) * 4 + (components,)
        self.coef = (rng.normal(size=shape) + 1j * rng.normal(size=shape)) * (scale / size ** 2)
        self.kmax = kmax
        self.real = real
        self.periods = tuple(float(p) for p in periods)

    def _factors(self, grid, offset):
        ks = np.arange(-self.kmax, self.kmax + 1)
        out = []
        for mu in range(4):
            x = np.arange(grid.shape[mu]) * grid.spacing[mu] + offset[mu]
            out.append(np.exp(2j * np.pi * np.outer(x, ks) / self.periods[mu]))
        return out

    def on_grid(self, grid, offset=(0.0, 0.0, 0.0, 0.0)):
        e0, e1, e2, e3 = self._factors(grid, offset)
        vals = np.einsum("abcdC,ia,jb,kc,ld->ijklC", self.coef, e0, e1, e2, e3, optimize=True)
        return 2.0 * vals.real if self.real else vals

    def __call__(self, grid, offset=(0.0, 0.0, 0.0, 0.0)):
        return self.on_grid(grid, offset)


def trig_field(grid, rng, components, kmax=1, real=False, scale=1.0):
    """Sample a fresh :class:`TrigPolynomial` on the grid."""
    return TrigPolynomial(rng, components, kmax, real, scale, grid.periods).on_grid(grid)


def _check_field(grid, f, ncomp=None):
    f = np.asarray(f)
    if f.shape[:4] != grid.shape or (ncomp is not None and f.shape[4:] != (ncomp,)):
        raise ShapeMismatch(f"field of shape {f.shape} does not match grid {grid.shape}")
    return f


def fwd(f, mu):
    """f(x + mu)"""
    return np.roll(f, -1, axis=mu)


def bwd(f, mu):
    """f(x - mu)"""
    return np.roll(f, 1, axis=mu)


def l2_inner(grid, f, g):
    """Volume-weighted Hermitian product of two fields (sum over all components)."""
    return grid.cell_volume * np.sum((np.asarray(f) * np.conj(g)).ravel())


def l2_norm(grid, f):
    f = np.asarray(f)
    return float(np.sqrt(grid.cell_volume * np.sum((f.real ** 2 + f.imag ** 2).ravel())))


def _back_links(conn):
    # conj(u(x - mu, mu)) for all mu, cached on the connection
    cached = conn.__dict__.get("_back")
    if cached is None or cached[0] is not conn.links:
        back = np.conj(np.stack([bwd(conn.links[..., mu], mu) for mu in range(4)], axis=-1))
        back = np.ascontiguousarray(back)
        conn.__dict__["_back"] = (conn.links, back)
        return back
    return cached[1]


def cov_deriv(conn, phi, mu):
    grid = conn.grid
    phi = _check_field(grid, phi)
    u = conn.links[..., mu]
    ub = _back_links(conn)[..., mu]
    if phi.ndim > 4:
        u = u[..., None]
        ub = ub[..., None]
    return (u * fwd(phi, mu) - ub * bwd(phi, mu)) / (2.0 * grid.spacing[mu])


def cov_grad(conn, phi):
    return [cov_deriv(conn, phi, mu) for mu in range(4)]


def _apply_blocks(grads, adjoint):
    # T_0 = 1, T_1 = i sigma_z, T_2 = i sigma_x, T_3 = i sigma_y; adjoint uses -T_mu^*
    g0, g1, g2, g3 = grads
    a = g0[..., 0] + 1j * g1[..., 0] + 1j * g2[..., 1] + g3[..., 1]
    b = g0[..., 1] - 1j * g1[..., 1] + 1j * g2[..., 0] - g3[..., 0]
    if adjoint:
        a = -g0[..., 0] + 1j * g1[..., 0] + 1j * g2[..., 1] + g3[..., 1]
        b = -g0[..., 1] - 1j * g1[..., 1] + 1j * g2[..., 0] - g3[..., 0]
    return np.stack([a, b], axis=-1)


@numba.njit(cache=True)
def _dirac_kernel(links, back, phi, inv2h, adjoint):
    n0, n1, n2, n3 = phi.shape[:4]
    out = np.empty_like(phi)
    sg = -1.0 if adjoint else 1.0
    for i0 in range(n0):
        p0, m0 = (i0 + 1) % n0, (i0 - 1) % n0
        for i1 in range(n1):
            p1, m1 = (i1 + 1) % n1, (i1 - 1) % n1
            for i2 in range(n2):
                p2, m2 = (i2 + 1) % n2, (i2 - 1) % n2
                for i3 in range(n3):
                    p3, m3 = (i3 + 1) % n3, (i3 - 1) % n3
                    u = links[i0, i1, i2, i3]
                    ub = back[i0, i1, i2, i3]
                    g0a = (u[0] * phi[p0, i1, i2, i3, 0] - ub[0] * phi[m0, i1, i2, i3, 0]) * inv2h[0]
                    g0b = (u[0] * phi[p0, i1, i2, i3, 1] - ub[0] * phi[m0, i1, i2, i3, 1]) * inv2h[0]
                    g1a = (u[1] * phi[i0, p1, i2, i3, 0] - ub[1] * phi[i0, m1, i2, i3, 0]) * inv2h[1]
                    g1b = (u[1] * phi[i0, p1, i2, i3, 1] - ub[1] * phi[i0, m1, i2, i3, 1]) * inv2h[1]
                    g2a = (u[2] * phi[i0, i1, p2, i3, 0] - ub[2] * phi[i0, i1, m2, i3, 0]) * inv2h[2]
                    g2b = (u[2] * phi[i0, i1, p2, i3, 1] - ub[2] * phi[i0, i1, m2, i3, 1]) * inv2h[2]
                    g3a = (u[3] * phi[i0, i1, i2, p3, 0] - ub[3] * phi[i0, i1, i2, m3, 0]) * inv2h[3]
                    g3b = (u[3] * phi[i0, i1, i2, p3, 1] - ub[3] * phi[i0, i1, i2, m3, 1]) * inv2h[3]
                    out[i0, i1, i2, i3, 0] = sg * g0a + 1j * g1a + 1j * g2b + g3b
                    out[i0, i1, i2, i3, 1] = sg * g0b - 1j * g1b + 1j * g2a - g3a
    return out


def _dirac_fast(conn, phi, adjoint):
    phi = np.ascontiguousarray(_check_field(conn.grid, phi, 2), dtype=complex)
    inv2h = np.array([0.5 / h for h in conn.grid.spacing])
    return _dirac_kernel(conn.links, _back_links(conn), phi, inv2h, adjoint)


def dirac(conn, phi):
    """D^A: W+ fields -> W- fields, ``sum_mu gamma(e^mu) nabla_mu``."""
    return _dirac_fast(conn, phi, False)


def dirac_adjoint(conn, psi):
    """Formal adjoint of :func:`dirac` (W- -> W+)."""
    return _dirac_fast(conn, psi, True)


def dirac_stencil(conn, phi, adjoint=False):
    """Array-level evaluation of D (or its adjoint); reference for the compiled kernel."""
    _check_field(conn.grid, phi, 2)
    return _apply_blocks(cov_grad(conn, phi), adjoint=adjoint)


def dirac_normal(conn, phi):
    return dirac_adjoint(conn, dirac(conn, phi))


def central_diff(f, mu, h):
    return (fwd(f, mu) - bwd(f, mu)) / (2.0 * h)


def _antisym(beta):
    m = np.zeros(beta.shape[:-1] + (4, 4))
    for p, (i, j) in enumerate(PAIRS):
        m[..., i, j] = beta[..., p]
        m[..., j, i] = -beta[..., p]
    return m


def d0(grid, f):
    f = _check_field(grid, np.asarray(f, dtype=float))
    return np.stack([central_diff(f, mu, grid.spacing[mu]) for mu in range(4)], axis=-1)


def d1(grid, eta):
    eta = _check_field(grid, np.asarray(eta, dtype=float), 4)
    h = grid.spacing
    return np.stack(
        [central_diff(eta[..., j], i, h[i]) - central_diff(eta[..., i], j, h[j]) for i, j in PAIRS],
        axis=-1,
    )


def d2(grid, beta):
    """Exterior derivative of a 2-form field; components (012, 013, 023, 123)."""
    beta = _check_field(grid, np.asarray(beta, dtype=float), 6)
    b = _antisym(beta)
    h = grid.spacing
    comps = []
    for i, j, k in THREE_FORM_TRIPLES:
        comps.append(
            central_diff(b[..., j, k], i, h[i])
            - central_diff(b[..., i, k], j, h[j])
            + central_diff(b[..., i, j], k, h[k])
        )
    return np.stack(comps, axis=-1)


def dstar2(grid, beta):
    """Codifferential of a 2-form field: (d*beta)_nu = -sum_mu D_mu beta_{mu nu}."""
    beta = _check_field(grid, np.asarray(beta, dtype=float), 6)
    b = _antisym(beta)
    h = grid.spacing
    return np.stack(
        [-sum(central_diff(b[..., mu, nu], mu, h[mu]) for mu in range(4)) for nu in range(4)],
        axis=-1,
    )


def dstar1(grid, eta):
    eta = _check_field(grid, np.asarray(eta, dtype=float), 4)
    h = grid.spacing
    return -sum(central_diff(eta[..., mu], mu, h[mu]) for mu in range(4))


def inner_one_form(conn, phi):
    """The real 1-form ``nu -> Re <nabla_nu phi, i phi>``."""
    phi = _check_field(conn.grid, phi, 2)
    iphi = 1j * phi
    return np.stack(
        [clifford.real_inner(cov_deriv(conn, phi, mu), iphi) for mu in range(4)], axis=-1
    )


def identity_terms(conn, phi, kappa=IDENTITY_KAPPA, eps=IDENTITY_EPS):
    """Both sides of ``|phi|^2 D phi = eps * (2 d*sigma(phi) + <nabla phi, i phi>) . (i phi)``."""
    grid = conn.grid
    phi = _check_field(grid, phi, 2)
    lhs = clifford.norm2(phi)[..., None] * dirac(conn, phi)
    tau = 2.0 * dstar2(grid, sd_to_two_form(sigma(phi, kappa))) + inner_one_form(conn, phi)
    rhs = eps * clifford.gamma_vec(tau, 1j * phi)
    return lhs, rhs


def identity_residual(conn, phi, kappa=IDENTITY_KAPPA, eps=IDENTITY_EPS):
    lhs, rhs = identity_terms(conn, phi, kappa, eps)
    return l2_norm(conn.grid, lhs - rhs)


def gauge_apply(s, conn, phi=None):
    """Act with the gauge transformation ``s`` on the pair (A, phi).

    ``phi -> s phi`` and ``u(x, mu) -> s(x) u(x, mu) conj(s(x + mu))``.
    Returns the new connection, and the new field when ``phi`` is given.
    """
    s = np.asarray(s, dtype=complex)
    if s.shape != conn.grid.shape:
        raise ShapeMismatch(f"gauge transform of shape {s.shape} on grid {conn.grid.shape}")
    links = np.empty_like(conn.links)
    for mu in range(4):
        links[..., mu] = s * conn.links[..., mu] * np.conj(fwd(s, mu))
    new = U1Connection(conn.grid, links, conn.flux)
    if phi is None:
        return new
    phi = _check_field(conn.grid, phi)
    return new, s.reshape(s.shape + (1,) * (phi.ndim - 4)) * phi


def doubler_symmetry(grid, phi, plane):
    """Site-diagonal symmetry of the naive Dirac operator for the axis pair ``plane``.

    ``(S phi)(x) = (-1)^(n_a + n_b) tau phi(x)`` where ``n`` are site indices and
    ``tau`` is the Bloch axis matching the pair: ``tau_b`` for ``(0, b)`` and
    the remaining spatial axis for two spatial directions.  These commute
    with ``D^dagger D`` for every U(1) connection, which is why its spectrum
    comes in degenerate multiplets.
    """
    a, b = sorted(plane)
    if a == b or not (0 <= a < 4 and 0 <= b < 4):
        raise ValueError(f"bad axis pair {plane!r}")
    axis = b if a == 0 else ({1, 2, 3} - {a, b}).pop()
    idx = np.meshgrid(*[np.arange(n) for n in grid.shape], indexing="ij")
    sign = np.where((idx[a] + idx[b]) % 2 == 0, 1.0, -1.0)
    phi = _check_field(grid, phi, 2)
    return sign[..., None] * np.einsum("ab,...b->...a", clifford.TAU[axis - 1], phi)


def sector_projection(grid, phi, sector):
    """Project onto the joint eigenspace ``S_01 = sector[0]``, ``S_23 = sector[1]``."""
    s01, s23 = sector
    phi = 0.5 * (phi + s01 * doubler_symmetry(grid, phi, (0, 1)))
    return 0.5 * (phi + s23 * doubler_symmetry(grid, phi, (2, 3)))


def plaquette_angles(conn, mu, nu):
    """Principal-branch angles of the (mu, nu) plaquettes at every site."""
    u = conn.links
    p = u[..., mu] * fwd(u[..., nu], mu) * np.conj(fwd(u[..., mu], nu)) * np.conj(u[..., nu])
    return np.angle(p)


def flux_slices(conn, plane):
    """Plaquette-angle sums / 2 pi over every parallel slice of ``plane``."""
    mu, nu = plane
    return plaquette_angles(conn, mu, nu).sum(axis=(mu, nu)) / (2 * np.pi)


def flux_integers(conn):
    """Integer fluxes over the six coordinate 2-tori, ordered (01, .., 23)."""
    out = []
    for plane in PAIRS:
        sums = flux_slices(conn, plane)
        rounded = np.rint(sums)
        defect = float(np.max(np.abs(sums - rounded)))
        if defect > FLUX_TOL:
            raise NonQuantizedFlux(f"plane {plane}: flux misses an integer by {defect:.3g}")
        if np.any(rounded != rounded.flat[0]):
            raise NonQuantizedFlux(f"plane {plane}: flux differs between slices")
        out.append(int(rounded.flat[0]))
    return tuple(out)
