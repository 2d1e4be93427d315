"""The squaring map sigma: W+ -> Lambda+ and its inverses.

``sigma(phi) = kappa * sum_k <i gamma(omega_k) phi, phi> omega_k`` (real part
of the Hermitian product).  With the default ``kappa = 1/2`` this is the Bloch
vector of ``phi``: ``sigma(phi) = |phi|^2 (n_1 omega_1 + n_2 omega_2 + n_3 omega_3)``.

The Dirac identity ``|phi|^2 D phi = eps * i (2 d*sigma(phi) + <nabla phi, i phi>) . phi``
only balances for one normalisation of sigma.  The continuum calibration
(:mod:`spinc.calibration`) pins it at ``kappa = 1/8`` with ``eps = +1`` for the
Clifford conventions of :mod:`spinc.clifford`; those values are frozen below and
used wherever the identity is evaluated.
"""

from dataclasses import dataclass

import numpy as np

from . import clifford
from .errors import DegenerateForm, AntipodalEdge, NonIntegerDegree
from .forms import OMEGA, sd_norm

DEFAULT_KAPPA = 0.5
IDENTITY_KAPPA = 0.125
IDENTITY_EPS = 1


def sigma(phi, kappa=DEFAULT_KAPPA):
    """Self-dual form (omega-coefficients) of a positive spinor or spinor field."""
    phi = np.asarray(phi, dtype=complex)
    a, b = phi[..., 0], phi[..., 1]
    ab = np.conj(a) * b
    bloch_vec = np.stack(
        [a.real ** 2 + a.imag ** 2 - b.real ** 2 - b.imag ** 2, 2 * ab.real, 2 * ab.imag],
        axis=-1,
    )
    return 2.0 * kappa * bloch_vec


def sigma_clifford(phi, kappa=DEFAULT_KAPPA):
    """``sigma`` evaluated literally through the Clifford action of omega_k.

    Slower than :func:`sigma`; kept as an independent route for cross-checks.
    """
    phi = np.asarray(phi, dtype=complex)
    comps = [
        clifford.real_inner(1j * clifford.gamma_2form(OMEGA[k], phi), phi) for k in range(3)
    ]
    return kappa * np.stack(comps, axis=-1)


@dataclass
class BlochData:
    r: np.ndarray
    n: np.ndarray  # NaN where r == 0


def bloch(phi):
    phi = np.asarray(phi, dtype=complex)
    r = clifford.norm2(phi)
    s = sigma(phi, DEFAULT_KAPPA)
    with np.errstate(invalid="ignore", divide="ignore"):
        n = np.where(np.asarray(r)[..., None] > 0, s / np.asarray(r)[..., None], np.nan)
    return BlochData(r=r, n=n)


def pointwise_preimage(alpha, tol=None, kappa=DEFAULT_KAPPA):
    """Spinor(s) ``phi`` with ``sigma(phi, kappa) = alpha``.

    The phase is fixed by making the first component real and non-negative,
    or the second one when the first vanishes.
    """
    alpha = np.asarray(alpha, dtype=float)
    norms = sd_norm(alpha)
    if tol is None:
        tol = 1e-10 * float(np.max(norms, initial=0.0))
    bad = norms <= tol
    if np.any(bad):
        site = tuple(int(i) for i in np.argwhere(np.atleast_1d(bad))[0])
        raise DegenerateForm(f"no preimage for a vanishing form (|alpha| <= {tol:g})", site=site)
    b = alpha / (2.0 * kappa)
    r = np.linalg.norm(b, axis=-1)
    n = b / r[..., None]
    n1 = np.clip(n[..., 0], -1.0, 1.0)
    up = np.sqrt(0.5 * (1.0 + n1))
    down = np.sqrt(0.5 * (1.0 - n1))
    phase = np.exp(1j * np.arctan2(n[..., 2], n[..., 1]))
    second = np.where(up > 0, down * phase, down)
    root = np.sqrt(r)
    return np.stack([root * up, root * second], axis=-1).astype(complex)


@dataclass
class ObstructionReport:
    """Why a global, discretely continuous preimage could not be built."""

    degrees: tuple | None
    max_phase_jump: float
    site: tuple
    direction: int
    degree_error: str | None = None


def _align_phases(phi):
    """Greedy phase continuation along the lexicographic spanning tree."""
    phi = phi.copy()
    for axis in range(4):
        index = (slice(None),) * (axis + 1) + (0,) * (3 - axis)
        sub = phi[index]
        prev = sub.take(np.arange(sub.shape[axis] - 1), axis=axis)
        cur = sub.take(np.arange(1, sub.shape[axis]), axis=axis)
        z = clifford.inner(prev, cur)
        mod = np.abs(z)
        p = np.where(mod > 0, z / np.where(mod > 0, mod, 1.0), 1.0)
        theta = np.cumprod(p, axis=axis)
        lead = np.ones_like(sub.take([0], axis=axis)[..., 0])
        theta = np.concatenate([lead, theta], axis=axis)
        phi[index] = sub * theta[..., None]
    return phi


def phase_jumps(phi):
    """|arg <phi(x), phi(x + mu)>| for each direction; shape (4, N0, .., N3)."""
    jumps = []
    for mu in range(4):
        z = clifford.inner(phi, np.roll(phi, -1, axis=mu))
        jumps.append(np.abs(np.angle(z)))
    return np.stack(jumps)


def field_preimage(alpha_field, tol=None, kappa=DEFAULT_KAPPA):
    """Global spinor field squaring to ``alpha_field``, or an ObstructionReport.

    ``alpha_field`` has shape (N0, N1, N2, N3, 3).  On success the returned
    field satisfies ``sigma(phi) = alpha`` at every site and all nearest
    neighbour phase jumps are below pi/2.
    """
    from .topology import degree_vector, sphere_map

    alpha_field = np.asarray(alpha_field, dtype=float)
    phi = pointwise_preimage(alpha_field, tol=tol, kappa=kappa)
    phi = _align_phases(phi)
    jumps = phase_jumps(phi)
    worst = float(jumps.max())
    residual = float(np.max(np.abs(sigma(phi, kappa) - alpha_field)))
    scale = max(1.0, float(np.max(np.abs(alpha_field))))
    if worst < np.pi / 2 and residual <= 1e-8 * scale:
        return phi

    where = np.unravel_index(int(np.argmax(jumps)), jumps.shape)
    degrees, err = None, None
    try:
        degrees = degree_vector(sphere_map(alpha_field, tol=tol))
    except (AntipodalEdge, NonIntegerDegree) as exc:
        err = str(exc)
    return ObstructionReport(
        degrees=degrees,
        max_phase_jump=worst,
        site=tuple(int(i) for i in where[1:]),
        direction=int(where[0]),
        degree_error=err,
    )
