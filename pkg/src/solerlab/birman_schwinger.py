"""Birman-Schwinger matrices for l_- in angular sectors.

With z = 1/(2m) - kappa^2, the operator l_- - z equals -Delta/(2m) + kappa^2
- u^(2k), so bound states and threshold singularities of l_- are read off

    M(kappa) = -1 + B(kappa),   B(kappa) = u^k (-Delta/(2m) + kappa^2)^(-1) u^k,

which is discretised by Nystrom quadrature with the exact free kernel of
each sector. In sector l (spherical harmonics of degree l; for n = 1 the
even and odd parts) and with q = sqrt(2m) kappa,

    (-Delta + q^2)^(-1)(r, r') = (r r')^(-(n-2)/2) I_nu(q r<) K_nu(q r>),
    nu = l + (n-2)/2,

with respect to the measure r'^(n-1) dr'. At kappa = 0 this reduces to
(r r')^(-(n-2)/2) (r</r>)^nu / (2 nu), available when nu > 0.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy.special import ive, kve

from .errors import ConfigurationError
from .numerics import RadialGrid


def sector_order(n, ell):
    return ell + (n - 2) / 2.0


def sectors_for(n):
    """Angular sectors relevant for bound states of l_- near threshold."""
    return (0, 1) if n == 1 else (0, 1, 2)


def free_kernel(n, ell, q, r, rp):
    """(-Delta + q^2)^(-1) kernel in sector ``ell``; q may be complex with Re q >= 0."""
    nu = sector_order(n, ell)
    r = np.asarray(r)[:, None]
    rp = np.asarray(rp)[None, :]
    lo = np.minimum(r, rp)
    hi = np.maximum(r, rp)
    pref = (r * rp) ** (-(n - 2) / 2.0)
    if q == 0:
        if nu <= 0:
            raise ConfigurationError(
                f"zero-energy kernel undefined in sector l={ell} for n={n}")
        return pref * (lo / hi) ** nu / (2 * nu)
    # scaled Bessel functions: I(x) K(y) = ive(x) kve(y) exp(x - y)
    return pref * ive(nu, q * lo) * kve(nu, q * hi) * np.exp(q * (lo - hi))


def default_bs_grid(n, k, h=0.05):
    """Radial grid reaching where u^(2k) has dropped below 1e-16 of its peak."""
    r_max = min(max(30.0, 18.5 / k), 120.0)
    return RadialGrid(n, r_max, int(round(r_max / h)), "staggered")


@dataclass(frozen=True)
class BSOperator:
    """Symmetrised Nystrom matrix of B(kappa) in one sector."""

    n: int
    ell: int
    kappa: complex
    grid: RadialGrid
    matrix: np.ndarray = field(repr=False)
    weight_vec: np.ndarray = field(repr=False)

    @property
    def M(self):
        return self.matrix - np.eye(self.matrix.shape[0])


def bs_matrix(gs, ell, kappa, grid=None):
    """Nystrom matrix sqrt(w_i) u^k(r_i) [2m G(r_i, r_j)] u^k(r_j) sqrt(w_j)."""
    if grid is None:
        grid = default_bs_grid(gs.n, gs.k)
    r = grid.nodes
    v = gs(r) ** gs.k * np.sqrt(grid.weights)
    q = np.sqrt(2 * gs.m) * kappa
    G = 2 * gs.m * free_kernel(gs.n, ell, q, r, r)
    return BSOperator(gs.n, ell, kappa, grid, v[:, None] * G * v[None, :], v)


def bs_eigenvalues(gs, ell, kappa, grid=None):
    """Eigenvalues of the (real symmetric, for real kappa) B(kappa), descending."""
    B = bs_matrix(gs, ell, kappa, grid).matrix
    return la.eigvalsh(B)[::-1]


def count_below(gs, ell, kappa, grid=None):
    """Number of eigenvalues of l_- in this sector strictly below 1/(2m) - kappa^2."""
    return int(np.sum(bs_eigenvalues(gs, ell, kappa, grid) > 1.0))


def smallest_singular_value(gs, ell, kappa, grid=None):
    M = bs_matrix(gs, ell, kappa, grid).M
    return float(la.svdvals(M)[-1])


def weighted_resolvent(gs, ell, z, grid=None):
    """u^k (l_- - z)^(-1) u^k in one sector, as B (1 - B)^(-1)."""
    kappa = np.sqrt(complex(1.0 / (2 * gs.m) - z))
    if kappa.real < 0:
        kappa = -kappa
    if kappa.imag == 0:
        kappa = kappa.real
    op = bs_matrix(gs, ell, kappa, grid)
    B = op.matrix
    return op, la.solve((np.eye(B.shape[0]) - B).T, B.T).T
