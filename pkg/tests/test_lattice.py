import numpy as np
import pytest

from spinc import clifford, forms, lattice, squaring
from spinc.errors import NonQuantizedFlux, ShapeMismatch
from spinc.lattice import LatticeGrid


@pytest.fixture
def grid():
    return LatticeGrid((4, 6, 4, 8), (1.0, 1.5, 0.7, 2.0))


def rand_spinor(grid, rng):
    return rng.normal(size=grid.shape + (2,)) + 1j * rng.normal(size=grid.shape + (2,))


def test_grid_validation():
    with pytest.raises(ValueError):
        LatticeGrid((4, 4, 4, 5))
    with pytest.raises(ValueError):
        LatticeGrid((2, 4, 4, 4))
    with pytest.raises(ValueError):
        LatticeGrid((4, 4, 4))
    g = LatticeGrid.cubic(8)
    assert g.spacing == (0.125,) * 4 and g.n_sites == 8 ** 4


def test_connection_validation(grid):
    with pytest.raises(ShapeMismatch):
        lattice.U1Connection(grid, np.ones((4, 4, 4, 4, 4)))
    with pytest.raises(ValueError):
        lattice.U1Connection(grid, 2 * np.ones(grid.shape + (4,)))


def test_l2_norm_is_volume_weighted(grid):
    one = np.ones(grid.shape + (2,), dtype=complex)
    assert lattice.l2_norm(grid, one) ** 2 == pytest.approx(2 * 1.0 * 1.5 * 0.7 * 2.0)


def test_cov_deriv_constant_and_plane_wave(grid):
    conn = lattice.trivial_connection(grid)
    phi0 = np.array([0.3 + 1j, -2.0])
    const = np.broadcast_to(phi0, grid.shape + (2,))
    for mu in range(4):
        assert np.array_equal(lattice.cov_deriv(conn, const, mu), np.zeros_like(const))
    x0 = grid.coords()[0]
    wave = np.exp(2j * np.pi * x0 / grid.periods[0])[..., None] * phi0
    h = grid.spacing[0]
    symbol = 1j * np.sin(2 * np.pi * h / grid.periods[0]) / h
    assert np.allclose(lattice.cov_deriv(conn, wave, 0), symbol * wave, atol=1e-12)


def test_cov_deriv_approximates_d_plus_iA():
    # constant potential a along axis 1: nabla_1 of a constant field ~ i a phi
    g = LatticeGrid.cubic(16)
    a = 2 * np.pi * 3
    conn = lattice.connection_from_potential(g, lambda p: np.broadcast_to([0, a, 0, 0], p.shape))
    phi = np.ones(g.shape + (2,), dtype=complex)
    h = g.spacing[1]
    assert np.allclose(lattice.cov_deriv(conn, phi, 1), 1j * np.sin(a * h) / h * phi)


def test_dirac_plane_wave(grid):
    conn = lattice.trivial_connection(grid)
    phi0 = np.array([1.0, 0.5j])
    x0 = grid.coords()[0]
    wave = np.exp(2j * np.pi * x0 / grid.periods[0])[..., None] * phi0
    h = grid.spacing[0]
    k = np.sin(2 * np.pi * h / grid.periods[0]) / h
    out = lattice.dirac(conn, wave)
    assert np.allclose(out, 1j * k * clifford.gamma_vec(np.array([1.0, 0, 0, 0]), wave), atol=1e-12)
    ratio = lattice.l2_norm(grid, out) / lattice.l2_norm(grid, wave)
    assert ratio == pytest.approx(abs(k), rel=1e-12)
    const = np.broadcast_to(phi0, grid.shape + (2,))
    assert np.array_equal(lattice.dirac(conn, const), np.zeros_like(const))


def test_dirac_adjoint(grid, rng):
    conn = lattice.random_connection(grid, rng)
    phi, psi = rand_spinor(grid, rng), rand_spinor(grid, rng)
    lhs = lattice.l2_inner(grid, lattice.dirac(conn, phi), psi)
    rhs = lattice.l2_inner(grid, phi, lattice.dirac_adjoint(conn, psi))
    assert abs(lhs - rhs) < 1e-12 * lattice.l2_norm(grid, phi) * lattice.l2_norm(grid, psi) * 100


def test_dirac_adjoint_against_dense(rng):
    g = LatticeGrid.cubic(4)
    conn = lattice.random_connection(g, rng)
    from spinc.harmonic import dense_dirac
    mat = dense_dirac(conn)
    psi = rand_spinor(g, rng)
    assert np.allclose(lattice.dirac_adjoint(conn, psi).ravel(), mat.conj().T @ psi.ravel(), atol=1e-12)


def test_compiled_kernel_matches_stencil(grid, rng):
    conn = lattice.random_connection(grid, rng)
    phi = rand_spinor(grid, rng)
    for adjoint in (False, True):
        fast = lattice.dirac_adjoint(conn, phi) if adjoint else lattice.dirac(conn, phi)
        ref = lattice.dirac_stencil(conn, phi, adjoint=adjoint)
        assert np.allclose(fast, ref, atol=1e-12)


def test_dirac_is_gamma_of_cov_grad(grid, rng):
    conn = lattice.random_connection(grid, rng)
    phi = rand_spinor(grid, rng)
    expected = sum(
        clifford.gamma_vec(np.eye(4)[mu], lattice.cov_deriv(conn, phi, mu)) for mu in range(4)
    )
    assert np.allclose(lattice.dirac(conn, phi), expected, atol=1e-12)


def test_shape_mismatch(grid, rng):
    conn = lattice.trivial_connection(grid)
    bad = np.zeros((4, 4, 4, 4, 2), dtype=complex)
    for fn in (lambda: lattice.dirac(conn, bad), lambda: lattice.cov_deriv(conn, bad, 0),
               lambda: lattice.inner_one_form(conn, bad), lambda: lattice.identity_residual(conn, bad)):
        with pytest.raises(ShapeMismatch):
            fn()


def test_dstar2_examples():
    g = LatticeGrid.cubic(8)
    assert np.array_equal(lattice.dstar2(g, np.ones(g.shape + (6,))), np.zeros(g.shape + (4,)))
    x0 = g.coords()[0]
    beta = np.zeros(g.shape + (6,))
    beta[..., 0] = np.cos(2 * np.pi * x0)
    h = g.spacing[0]
    out = lattice.dstar2(g, beta)
    expected = 2 * np.pi * np.sin(2 * np.pi * x0) * np.sin(2 * np.pi * h) / (2 * np.pi * h)
    assert np.allclose(out[..., 1], expected, atol=1e-12)
    assert np.allclose(out[..., [0, 2, 3]], 0, atol=1e-12)


def test_d2_examples(rng):
    g = LatticeGrid.cubic(8)
    assert np.array_equal(lattice.d2(g, np.ones(g.shape + (6,))), np.zeros(g.shape + (4,)))
    x2 = g.coords()[2]
    beta = np.zeros(g.shape + (6,))
    beta[..., 0] = np.cos(2 * np.pi * x2)
    h = g.spacing[2]
    out = lattice.d2(g, beta)
    assert np.allclose(out[..., 0], -np.sin(2 * np.pi * x2) * np.sin(2 * np.pi * h) / h, atol=1e-12)
    assert np.allclose(out[..., 1:], 0, atol=1e-12)


def test_d_squared_vanishes(grid, rng):
    eta = rng.normal(size=grid.shape + (4,))
    assert np.max(np.abs(lattice.d2(grid, lattice.d1(grid, eta)))) < 1e-12 * np.max(np.abs(eta)) / min(grid.spacing) ** 2
    f = rng.normal(size=grid.shape)
    assert np.max(np.abs(lattice.d1(grid, lattice.d0(grid, f)))) < 1e-10


def test_codifferential_adjointness(grid, rng):
    beta = rng.normal(size=grid.shape + (6,))
    eta = rng.normal(size=grid.shape + (4,))
    lhs = lattice.l2_inner(grid, lattice.dstar2(grid, beta), eta)
    rhs = lattice.l2_inner(grid, beta, lattice.d1(grid, eta))
    assert abs(lhs - rhs) < 1e-12 * abs(lhs) + 1e-10
    f = rng.normal(size=grid.shape)
    lhs = lattice.l2_inner(grid, lattice.dstar1(grid, eta), f)
    rhs = lattice.l2_inner(grid, eta, lattice.d0(grid, f))
    assert abs(lhs - rhs) < 1e-12 * abs(lhs) + 1e-10


def test_inner_one_form_examples():
    g = LatticeGrid.cubic(8)
    conn = lattice.trivial_connection(g)
    phi0 = np.array([0.6, 0.8j])
    const = np.broadcast_to(phi0, g.shape + (2,))
    assert np.array_equal(lattice.inner_one_form(conn, const), np.zeros(g.shape + (4,)))
    x0 = g.coords()[0]
    wave = np.exp(2j * np.pi * x0)[..., None] * phi0
    h = g.spacing[0]
    out = lattice.inner_one_form(conn, wave)
    # +d theta |phi0|^2 with this library's real inner product, discrete symbol sin(2 pi h)/h
    assert np.allclose(out[..., 0], np.sin(2 * np.pi * h) / h, atol=1e-12)
    assert np.allclose(out[..., 1:], 0, atol=1e-12)


def test_identity_residual_constant_is_exactly_zero():
    g = LatticeGrid.cubic(8)
    conn = lattice.trivial_connection(g)
    phi = np.broadcast_to(np.array([0.4 - 0.2j, 1.1]), g.shape + (2,))
    assert lattice.identity_residual(conn, phi) == 0.0


def test_gauge_identity_and_composition(grid, rng):
    conn = lattice.random_connection(grid, rng)
    phi = rand_spinor(grid, rng)
    c1, p1 = lattice.gauge_apply(np.ones(grid.shape), conn, phi)
    assert np.array_equal(c1.links, conn.links) and np.array_equal(p1, phi)
    s1, s2 = lattice.random_gauge(grid, rng), lattice.random_gauge(grid, rng)
    ca, pa = lattice.gauge_apply(s2, *lattice.gauge_apply(s1, conn, phi))
    cb, pb = lattice.gauge_apply(s2 * s1, conn, phi)
    assert np.allclose(ca.links, cb.links, atol=1e-14) and np.allclose(pa, pb, atol=1e-14)
    with pytest.raises(ShapeMismatch):
        lattice.gauge_apply(np.ones((4, 4, 4, 4)), conn)


def test_gauge_covariance_of_operators(grid, rng):
    conn = lattice.random_connection(grid, rng)
    phi = rand_spinor(grid, rng)
    s = lattice.random_gauge(grid, rng)
    conn2, phi2 = lattice.gauge_apply(s, conn, phi)
    sc = s[..., None]
    for mu in range(4):
        assert np.allclose(lattice.cov_deriv(conn2, phi2, mu), sc * lattice.cov_deriv(conn, phi, mu), atol=1e-13)
    assert np.allclose(lattice.dirac(conn2, phi2), sc * lattice.dirac(conn, phi), atol=1e-13 * 100)
    assert np.allclose(lattice.dirac_adjoint(conn2, phi2), sc * lattice.dirac_adjoint(conn, phi), atol=1e-12)
    assert np.allclose(lattice.inner_one_form(conn2, phi2), lattice.inner_one_form(conn, phi), atol=1e-12)
    r1, r2 = lattice.identity_residual(conn, phi), lattice.identity_residual(conn2, phi2)
    assert abs(r1 - r2) <= 1e-10 * max(1.0, r1)


def test_flux_examples(rng):
    g = LatticeGrid.cubic(6)
    assert lattice.flux_integers(lattice.trivial_connection(g)) == (0,) * 6
    conn = lattice.flux_connection(g, (2, 0, 0, 0, 0, 0))
    assert lattice.flux_integers(conn) == (2, 0, 0, 0, 0, 0)
    gauged = lattice.gauge_apply(lattice.random_gauge(g, rng), conn)
    assert lattice.flux_integers(gauged) == (2, 0, 0, 0, 0, 0)


@pytest.mark.parametrize("flux", [(1, -1, 0, 2, 0, -3), (0, 0, 3, 0, 1, 0), (-2, 1, 1, 1, 1, 1)])
def test_flux_roundtrip_and_slices(flux):
    g = LatticeGrid((6, 8, 6, 4))
    conn = lattice.flux_connection(g, flux)
    assert lattice.flux_integers(conn) == flux
    for plane, k in zip(lattice.PAIRS, flux):
        assert np.allclose(lattice.flux_slices(conn, plane), k, atol=1e-10)


def test_smooth_potential_has_zero_flux(rng):
    g = LatticeGrid.cubic(8)
    pot = lattice.TrigPolynomial(rng, 4, kmax=1, real=True)
    conn = lattice.connection_from_potential(g, pot)
    assert lattice.flux_integers(conn) == (0,) * 6


def test_single_twisted_link_still_integer():
    # every link borders two plaquettes of a slice with opposite orientation
    g = LatticeGrid.cubic(4)
    links = np.ones(g.shape + (4,), dtype=complex)
    links[0, 0, 0, 0, 0] = np.exp(0.3j)
    assert lattice.flux_integers(lattice.U1Connection(g, links)) == (0,) * 6


def test_rough_links_give_slice_dependent_flux(rng):
    g = LatticeGrid.cubic(4)
    conn = lattice.random_connection(g, rng, amplitude=np.pi)
    with pytest.raises(NonQuantizedFlux, match="slices"):
        lattice.flux_integers(conn)


def test_trig_polynomial_sampling_matches_direct_sum(rng):
    g = LatticeGrid((4, 4, 6, 4), (1.0, 2.0, 1.0, 0.5))
    pot = lattice.TrigPolynomial(rng, 2, kmax=1, periods=g.periods)
    pts = g.points((0.1, 0, 0, 0.05))
    ks = np.array(list(np.ndindex(3, 3, 3, 3))) - 1
    phase = np.exp(2j * np.pi * np.einsum("...m,km->...k", pts, ks / np.array(g.periods)))
    coef = pot.coef.reshape(-1, 2)
    assert np.allclose(pot.on_grid(g, (0.1, 0, 0, 0.05)), phase @ coef, atol=1e-12)


def test_doubler_symmetries_commute_with_normal_operator(rng):
    g = LatticeGrid.cubic(4)
    conn = lattice.random_connection(g, rng)
    phi = rand_spinor(g, rng)
    for plane in lattice.PAIRS:
        a = lattice.doubler_symmetry(g, lattice.dirac_normal(conn, phi), plane)
        b = lattice.dirac_normal(conn, lattice.doubler_symmetry(g, phi, plane))
        assert np.allclose(a, b, atol=1e-10)
