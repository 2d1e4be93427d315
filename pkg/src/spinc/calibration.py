"""Continuum calibration of the squaring-map normalisation.

Random trigonometric pairs (phi, A) are sampled on a grid and every derivative
is taken spectrally, so for band-limited data the continuum identity

    |phi|^2 D^A phi = eps * i (2 d*sigma_kappa(phi) + <nabla^A phi, i phi>) . phi

is evaluated to round-off.  Writing ``sigma_kappa = 2 kappa * bloch`` the right
hand side is linear in ``(4 kappa eps, eps)``; a two-column least-squares fit
recovers both numbers.  Nothing here touches the finite-difference stencils in
:mod:`spinc.lattice`, which keeps the calibration an independent check of them.
"""

from dataclasses import dataclass

import numpy as np

from . import clifford
from .squaring import sigma

AXES = (0, 1, 2, 3)


@dataclass
class CalibrationResult:
    kappa: float
    eps: int
    eps_raw: float
    residual: float
    rel_residual: float
    seed: int
    grid: int


def _spectral_derivative(f, mu, n):
    k = 2j * np.pi * np.fft.fftfreq(n, 1.0 / n)
    shape = [1] * f.ndim
    shape[mu] = n
    return np.fft.ifftn(np.fft.fftn(f, axes=AXES) * k.reshape(shape), axes=AXES)


def _trig(rng, n, components, kmax, real):
    size = 2 * kmax + 1
    coef = rng.normal(size=(size,) * 4 + (components,)) + 1j * rng.normal(size=(size,) * 4 + (components,))
    coef /= size ** 2
    modes = np.zeros((n,) * 4 + (components,), dtype=complex)
    ks = np.arange(-kmax, kmax + 1) % n
    modes[np.ix_(ks, ks, ks, ks)] = coef
    vals = np.fft.ifftn(modes, axes=AXES) * n ** 4
    return 2.0 * vals.real if real else vals


def _sd_matrix(s):
    """Antisymmetric 4x4 components beta_{mu nu} of sum_k s_k omega_k."""
    b = np.zeros(s.shape[:-1] + (4, 4))
    for k, pairs in enumerate((((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2)))):
        for i, j in pairs:
            b[..., i, j] += s[..., k]
            b[..., j, i] -= s[..., k]
    return b


def identity_columns(phi, potential, n):
    """LHS and the two right-hand-side columns, all spectral.

    Returns ``(lhs, u, v)`` with ``u = i (d* bloch(phi)) . phi`` and
    ``v = i <nabla phi, i phi> . phi`` so that the identity reads
    ``lhs = 4 kappa eps u + eps v``.
    """
    nabla = [
        _spectral_derivative(phi, mu, n) + 1j * potential[..., mu, None] * phi for mu in range(4)
    ]
    dirac = sum(np.einsum("ab,...b->...a", clifford.T_BLOCKS[mu], nabla[mu]) for mu in range(4))
    lhs = clifford.norm2(phi)[..., None] * dirac
    b = _sd_matrix(sigma(phi, 0.5))
    dstar = np.stack(
        [-sum(_spectral_derivative(b[..., mu, nu], mu, n).real for mu in range(4)) for nu in range(4)],
        axis=-1,
    )
    transverse = np.stack([clifford.real_inner(nabla[mu], 1j * phi) for mu in range(4)], axis=-1)
    u = clifford.gamma_vec(dstar, 1j * phi)
    v = clifford.gamma_vec(transverse, 1j * phi)
    return lhs, u, v


def calibrate(seed, n=16, kmax=1):
    """Fit (kappa, eps) for one random band-limited pair on an n^4 grid."""
    rng = np.random.default_rng(seed)
    phi = _trig(rng, n, 2, kmax, real=False) + np.array([1.0, 0.0])
    potential = _trig(rng, n, 4, kmax, real=True)
    lhs, u, v = identity_columns(phi, potential, n)
    m = np.stack([u.ravel(), v.ravel()], axis=1)
    coef, *_ = np.linalg.lstsq(m, lhs.ravel(), rcond=None)
    eps_raw = float(coef[1].real)
    eps = 1 if eps_raw >= 0 else -1
    kappa = float(coef[0].real) / (4.0 * eps)
    resid = lhs - eps * (4.0 * kappa * u + v)
    weight = n ** -4
    residual = float(np.sqrt(weight * clifford.norm2(resid).sum()))
    scale = float(np.sqrt(weight * clifford.norm2(lhs).sum()))
    return CalibrationResult(
        kappa=kappa,
        eps=eps,
        eps_raw=eps_raw,
        residual=residual,
        rel_residual=residual / scale,
        seed=int(seed),
        grid=int(n),
    )
