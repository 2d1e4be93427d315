"""Sphere maps of nowhere-zero self-dual forms and their 2-torus degrees.

A nowhere-zero self-dual form ``alpha`` defines ``n = alpha / |alpha|``, a map
from the torus to S^2 (directions in the omega basis).  Its degrees over the
six coordinate 2-tori are the computable stand-in for the first Chern class
of the associated almost-complex structure; two forms are declared to have
equal c1 when their degree vectors agree.
"""

from dataclasses import dataclass

import numpy as np

from .clifford import PAIRS
from .errors import AntipodalEdge, DegenerateForm, NonIntegerDegree
from .forms import sd_norm

ANTIPODAL_TOL = 1e-9
INTEGER_TOL = 1e-3


def sphere_map(alpha_field, tol=None):
    alpha_field = np.asarray(alpha_field, dtype=float)
    norms = sd_norm(alpha_field)
    if tol is None:
        tol = 1e-10 * float(np.max(norms, initial=0.0))
    bad = norms <= tol
    if np.any(bad):
        site = tuple(int(i) for i in np.argwhere(np.atleast_1d(bad))[0])
        raise DegenerateForm(f"self-dual form vanishes at site {site}", site=site)
    return alpha_field / np.linalg.norm(alpha_field, axis=-1, keepdims=True)


def triangle_solid_angle(a, b, c):
    """Signed solid angle of the spherical triangle (a, b, c) of unit vectors."""
    num = np.einsum("...i,...i->...", a, np.cross(b, c))
    den = 1.0 + np.einsum("...i,...i->...", a, b) + np.einsum("...i,...i->...", b, c) \
        + np.einsum("...i,...i->...", c, a)
    return 2.0 * np.arctan2(num, den)


def _plane_layout(n, plane):
    mu, nu = plane
    if not (0 <= mu < 4 and 0 <= nu < 4 and mu != nu):
        raise ValueError(f"bad plane {plane!r}")
    others = [ax for ax in range(4) if ax not in (mu, nu)]
    return np.transpose(n, others + [mu, nu, 4]), others


def _check_antipodal(a, b):
    if np.any(1.0 + np.einsum("...i,...i->...", a, b) < ANTIPODAL_TOL):
        raise AntipodalEdge("adjacent sphere-map images are antipodal; refine the grid")


def slice_degree_sums(n, plane):
    """Total solid angle / 4pi for every parallel slice of ``plane``.

    Returns an array indexed by the two remaining axes (in increasing order).
    """
    m, _ = _plane_layout(np.asarray(n, dtype=float), plane)
    a = m
    b = np.roll(m, -1, axis=-3)
    d = np.roll(m, -1, axis=-2)
    c = np.roll(b, -1, axis=-2)
    for p, q in ((a, b), (b, c), (c, d), (d, a), (a, c)):
        _check_antipodal(p, q)
    omega = triangle_solid_angle(a, b, c) + triangle_solid_angle(a, c, d)
    return omega.sum(axis=(-2, -1)) / (4.0 * np.pi)


def _round_degrees(sums):
    rounded = np.rint(sums)
    defect = float(np.max(np.abs(sums - rounded), initial=0.0))
    if defect > INTEGER_TOL:
        raise NonIntegerDegree(f"degree sum misses an integer by {defect:.3g}")
    return rounded.astype(int), defect


def degree_2torus(n, plane, base=(0, 0, 0, 0), return_defect=False):
    """Degree of the sphere map restricted to one coordinate 2-torus.

    ``plane = (mu, nu)`` with orientation dx^mu ^ dx^nu; the torus passes
    through the site ``base`` (only its two coordinates off the plane matter).
    """
    mu, nu = plane
    sums = slice_degree_sums(n, plane)
    others = [ax for ax in range(4) if ax not in (mu, nu)]
    value = sums[base[others[0]], base[others[1]]]
    deg, defect = _round_degrees(np.asarray(value))
    if return_defect:
        return int(deg), defect
    return int(deg)


def degree_vector(n, base=(0, 0, 0, 0)):
    """Degrees over the six planes ordered (01, 02, 03, 12, 13, 23)."""
    return tuple(degree_2torus(n, plane, base) for plane in PAIRS)


def all_slice_degrees(n):
    """Integer degrees over every slice of every plane, keyed by plane."""
    return {plane: _round_degrees(slice_degree_sums(n, plane))[0] for plane in PAIRS}


def slice_independent(n):
    return all(np.all(d == d.flat[0]) for d in all_slice_degrees(n).values())


@dataclass
class C1Comparison:
    equal: bool
    degrees: tuple
    reference_degrees: tuple
    slice_independent: bool


def c1_equal(alpha_field, reference, tol=None):
    """Compare degree data of ``alpha_field`` with a reference self-dual form.

    ``reference`` is either a field of the same shape or a single constant
    self-dual form (3 coefficients).
    """
    alpha_field = np.asarray(alpha_field, dtype=float)
    reference = np.broadcast_to(np.asarray(reference, dtype=float), alpha_field.shape)
    n = sphere_map(alpha_field, tol)
    n_ref = sphere_map(reference, tol)
    independent = slice_independent(n) and slice_independent(n_ref)
    d = degree_vector(n)
    d_ref = degree_vector(n_ref)
    return C1Comparison(
        equal=bool(d == d_ref and independent),
        degrees=d,
        reference_degrees=d_ref,
        slice_independent=independent,
    )


def winding_sphere_map(shape, plane, degree, mass=1.0):
    """Smooth nowhere-vanishing map T^4 -> S^2 of given degree over ``plane``.

    The map depends only on the two coordinates of ``plane``; it is a
    lattice-skyrmion texture ``(sin u, sin v, mass + cos u + cos v)`` with the
    ``u`` frequency multiplied by ``|degree|`` and ``v`` reversed for negative
    degree.  Degree 0 gives the constant north pole.  ``shape`` is the grid
    shape (N0, N1, N2, N3); coordinates are taken on the unit torus.
    """
    mu, nu = plane
    out = np.zeros(tuple(shape) + (3,))
    if degree == 0:
        out[..., 2] = 1.0
        return out
    idx = np.meshgrid(*[np.arange(s) / s for s in shape], indexing="ij")
    # the +1 texture has degree -1 in the (u, v) orientation for 0 < mass < 2
    sign = -1 if degree > 0 else 1
    u = 2 * np.pi * abs(degree) * idx[mu]
    v = 2 * np.pi * sign * idx[nu]
    vec = np.stack([np.sin(u), np.sin(v), mass + np.cos(u) + np.cos(v)], axis=-1)
    return vec / np.linalg.norm(vec, axis=-1, keepdims=True)
