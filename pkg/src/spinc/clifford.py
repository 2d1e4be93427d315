"""Clifford algebra of oriented Euclidean R^4 acting on W = W+ (+) W-.

Everything here is pointwise and vectorised: spinors are arrays whose last
axis has length 2, covectors have a last axis of length 4 and 2-forms a last
axis of length 6 ordered (01, 02, 03, 12, 13, 23).  Leading axes broadcast,
so the same functions act on single points and on whole lattice fields.

Conventions (frozen):

* ``v . v = -|v|^2``;
* gamma_mu maps W+ -> W- by ``T_mu`` and W- -> W+ by ``-T_mu^*``, with
  ``T_0 = 1`` and ``(T_1, T_2, T_3) = i (sigma_z, sigma_x, sigma_y)``;
* the volume element ``gamma_0 gamma_1 gamma_2 gamma_3`` is ``-1`` on W+,
  so self-dual forms act on W+ and anti-self-dual forms annihilate it;
* ``gamma(omega_k) = -2i tau_k`` on W+ with ``tau = (sigma_z, sigma_x, sigma_y)``,
  hence ``gamma(omega_1) gamma(omega_2) = 2 gamma(omega_3)`` (sign +1).
"""

import numpy as np

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
ID2 = np.eye(2, dtype=complex)

# Bloch axes: tau_k is the Hermitian matrix with gamma(omega_k) = -2i tau_k on W+.
TAU = np.stack([PAULI_Z, PAULI_X, PAULI_Y])

# W+ -> W- blocks of gamma_0..gamma_3
T_BLOCKS = np.stack([ID2, 1j * PAULI_Z, 1j * PAULI_X, 1j * PAULI_Y])
T_BLOCKS.setflags(write=False)

PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

# sign of the quaternion relation gamma(w1) gamma(w2) = 2 * EPS_QUAT * gamma(w3)
EPS_QUAT = 1


def gamma_matrices():
    """Full 4x4 gamma matrices acting on (phi+, phi-) column vectors."""
    g = np.zeros((4, 4, 4), dtype=complex)
    for mu in range(4):
        g[mu, 2:, :2] = T_BLOCKS[mu]
        g[mu, :2, 2:] = -T_BLOCKS[mu].conj().T
    return g


def _two_form_blocks():
    plus = np.empty((6, 2, 2), dtype=complex)
    minus = np.empty((6, 2, 2), dtype=complex)
    for p, (i, j) in enumerate(PAIRS):
        ti, tj = T_BLOCKS[i], T_BLOCKS[j]
        # gamma_i gamma_j restricted to W+ and to W-
        plus[p] = -ti.conj().T @ tj
        minus[p] = -ti @ tj.conj().T
    return plus, minus


SIGMA_PLUS, SIGMA_MINUS = _two_form_blocks()


def _apply(mats, s):
    return np.einsum("...ab,...b->...a", mats, s)


def gamma_vec(v, phi):
    """Clifford product of a real covector with a positive spinor (W+ -> W-)."""
    v = np.asarray(v, dtype=float)
    phi = np.asarray(phi, dtype=complex)
    m = np.tensordot(v, T_BLOCKS, axes=([-1], [0]))
    return _apply(m, phi)


def gamma_vec_back(v, psi):
    """Clifford product of a real covector with a negative spinor (W- -> W+)."""
    v = np.asarray(v, dtype=float)
    psi = np.asarray(psi, dtype=complex)
    back = -np.conj(np.swapaxes(T_BLOCKS, -1, -2))
    m = np.tensordot(v, back, axes=([-1], [0]))
    return _apply(m, psi)


def gamma_2form(beta, phi):
    """Action of a 2-form on W+: sum_{i<j} beta_ij gamma_i gamma_j."""
    beta = np.asarray(beta, dtype=float)
    m = np.tensordot(beta, SIGMA_PLUS, axes=([-1], [0]))
    return _apply(m, np.asarray(phi, dtype=complex))


def gamma_2form_minus(beta, psi):
    """Action of a 2-form on W-."""
    beta = np.asarray(beta, dtype=float)
    m = np.tensordot(beta, SIGMA_MINUS, axes=([-1], [0]))
    return _apply(m, np.asarray(psi, dtype=complex))


def inner(s, t):
    """Hermitian product, linear in ``s`` and conjugate-linear in ``t``."""
    return np.sum(np.asarray(s) * np.conj(t), axis=-1)


def real_inner(s, t):
    return np.real(inner(s, t))


def norm2(s):
    s = np.asarray(s)
    return np.sum(s.real ** 2 + s.imag ** 2, axis=-1)
