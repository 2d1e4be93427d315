"""Pointwise exterior algebra of oriented Euclidean R^4.

Storage conventions: 2-forms are arrays with a trailing axis of six
components ordered (01, 02, 03, 12, 13, 23); the e^i ^ e^j are orthonormal,
so ``|omega_k| = sqrt(2)``.  Self-dual forms are stored by their three
coefficients in the basis

    omega_1 = e01 + e23,  omega_2 = e02 + e31,  omega_3 = e03 + e12.
"""

import numpy as np

from .clifford import PAIRS
from .errors import DegenerateForm

SQRT2 = np.sqrt(2.0)

OMEGA = np.array(
    [
        [1, 0, 0, 0, 0, 1],
        [0, 1, 0, 0, -1, 0],
        [0, 0, 1, 1, 0, 0],
    ],
    dtype=float,
)
OMEGA_BAR = np.array(
    [
        [1, 0, 0, 0, 0, -1],
        [0, 1, 0, 0, 1, 0],
        [0, 0, 1, -1, 0, 0],
    ],
    dtype=float,
)

# *: components (b01, b02, b03, b12, b13, b23) -> (b23, -b13, b12, b03, -b02, b01)
_STAR_PERM = np.array([5, 4, 3, 2, 1, 0])
_STAR_SIGN = np.array([1.0, -1.0, 1.0, 1.0, -1.0, 1.0])


def basis_two_form(i, j):
    """The 2-form e^i ^ e^j as a 6-vector (``i != j``, any order)."""
    out = np.zeros(6)
    if i < j:
        out[PAIRS.index((i, j))] = 1.0
    else:
        out[PAIRS.index((j, i))] = -1.0
    return out


def hodge_star2(beta):
    beta = np.asarray(beta, dtype=float)
    return beta[..., _STAR_PERM] * _STAR_SIGN


def sd_project(beta):
    """Self-dual part of ``beta`` as coefficients on (omega_1, omega_2, omega_3)."""
    beta = np.asarray(beta, dtype=float)
    return 0.5 * beta @ OMEGA.T


def asd_project(beta):
    """Anti-self-dual part of ``beta`` as a full 6-component 2-form."""
    beta = np.asarray(beta, dtype=float)
    return 0.5 * (beta - hodge_star2(beta))


def sd_to_two_form(s):
    return np.asarray(s, dtype=float) @ OMEGA


def two_form_norm(beta):
    return np.linalg.norm(np.asarray(beta, dtype=float), axis=-1)


def sd_norm(s):
    """Norm of a self-dual form given by its omega-coefficients."""
    return SQRT2 * np.linalg.norm(np.asarray(s, dtype=float), axis=-1)


def wedge22(beta, delta):
    """Coefficient of e0123 in beta ^ delta."""
    b = np.asarray(beta, dtype=float)
    d = np.asarray(delta, dtype=float)
    return (
        b[..., 0] * d[..., 5]
        - b[..., 1] * d[..., 4]
        + b[..., 2] * d[..., 3]
        + b[..., 3] * d[..., 2]
        - b[..., 4] * d[..., 1]
        + b[..., 5] * d[..., 0]
    )


def two_form_matrix(beta):
    """Antisymmetric 4x4 matrix M with M[i, j] = beta_ij."""
    beta = np.asarray(beta, dtype=float)
    m = np.zeros(beta.shape[:-1] + (4, 4))
    for p, (i, j) in enumerate(PAIRS):
        m[..., i, j] = beta[..., p]
        m[..., j, i] = -beta[..., p]
    return m


def _degeneracy_tol(norms, tol):
    if tol is None:
        return 1e-10 * float(np.max(norms, initial=0.0))
    return tol


def acs_from_sd(alpha, tol=None):
    """Almost-complex structure determined by a nowhere-zero self-dual form.

    ``alpha`` holds omega-coefficients (trailing axis 3).  Returns ``J`` with
    trailing shape (4, 4) such that ``J e_i = sharp(iota_{e_i} alpha_hat)``
    where ``alpha_hat = sqrt(2) alpha / |alpha|``.  ``J^2 = -1`` and
    ``alpha(v, J v) > 0`` for ``v != 0``.

    The default ``tol`` is ``1e-10`` times the largest ``|alpha|`` present.
    """
    alpha = np.asarray(alpha, dtype=float)
    norms = sd_norm(alpha)
    tol = _degeneracy_tol(norms, tol)
    bad = norms <= tol
    if np.any(bad):
        site = tuple(int(i) for i in np.argwhere(np.atleast_1d(bad))[0])
        raise DegenerateForm(f"self-dual form vanishes (|alpha| <= {tol:g})", site=site)
    unit = SQRT2 * alpha / norms[..., None]
    m = two_form_matrix(sd_to_two_form(unit))
    # column i of J is the vector with components (iota_{e_i} alpha)_j = alpha_ij
    return np.swapaxes(m, -1, -2)


def conformal_factor(alpha):
    """Scale ``c`` with ``|alpha| / c**2 = sqrt(2)``.

    Rescaling lengths by ``c`` divides 2-form norms by ``c**2``, so ``alpha``
    becomes a unit fundamental form (norm sqrt(2)) for the rescaled metric.
    """
    alpha = np.asarray(alpha, dtype=float)
    norms = sd_norm(alpha)
    if np.any(norms <= 0.0):
        raise DegenerateForm("conformal factor undefined where alpha = 0")
    return np.sqrt(norms / SQRT2)
