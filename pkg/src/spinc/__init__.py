"""Spin-c geometry on the flat 4-torus: squaring map, lattice Dirac operator,
self-dual forms and their degree data."""

from .clifford import gamma_vec, gamma_vec_back, gamma_2form, inner, real_inner
from .forms import acs_from_sd, conformal_factor, hodge_star2, sd_project, asd_project, wedge22
from .squaring import sigma, bloch, pointwise_preimage, field_preimage, ObstructionReport
from .lattice import (
    LatticeGrid,
    U1Connection,
    cov_deriv,
    dirac,
    dstar2,
    d2,
    inner_one_form,
    identity_residual,
    gauge_apply,
    flux_integers,
)
from .harmonic import solve_smallest, is_parallel, symplectic_pipeline, kahler_pipeline
from .topology import sphere_map, degree_2torus, degree_vector, c1_equal

__version__ = "0.1.0"
