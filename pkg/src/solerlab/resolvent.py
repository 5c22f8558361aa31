"""Weighted free resolvents, their continuation across the real axis, and F_{N,rho}.

The free resolvent (-Delta - zeta^2)^(-1) has the explicit kernels

    1D:  G(x, y) = i exp(i zeta |x - y|) / (2 zeta),
    3D:  G(x, y) = exp(i zeta |x - y|) / (4 pi |x - y|),

square integrable for Im zeta > 0. Sandwiched between the weights
exp(-mu <x>), <x> = (1 + x^2)^(1/2), both stay bounded for Im zeta > -mu,
which is the analytic continuation used when an eigenvalue sits inside
the continuous spectrum.

Kernels are discretised either with the trapezoid rule or, for highly
oscillatory kernels (|zeta| h not small), with Filon weights: the density
is interpolated by hat functions and exp(i zeta |x - y|) is integrated
exactly against each hat.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse.linalg as spla
from scipy import integrate

from .errors import DomainError, FitError, Unsupported
from .numerics import Grid1D, RadialGrid, circle_nodes

ZETA_EXCLUSION = 1e-3


def japanese(x):
    """<x> = sqrt(1 + x^2)."""
    return np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)


# ---------------------------------------------------------------------------
# Filon weights
# ---------------------------------------------------------------------------

def _hat_off(t):
    """2 (1 - cos t) / t^2, the hat integral of exp(i zeta s) away from the node."""
    t = np.asarray(t, dtype=complex)
    small = np.abs(t) < 1e-2
    ts = np.where(small, 1.0, t)
    exact = 2 * (1 - np.cos(ts)) / ts ** 2
    series = 1 - t ** 2 / 12 + t ** 4 / 360
    return np.where(small, series, exact)


def _hat_on(t):
    """2 (1 + i t - exp(i t)) / t^2, the hat integral of exp(i zeta |s|) at its node."""
    t = np.asarray(t, dtype=complex)
    small = np.abs(t) < 1e-2
    ts = np.where(small, 1.0, t)
    exact = 2 * (1 + 1j * ts - np.exp(1j * ts)) / ts ** 2
    series = 1 + 1j * t / 3 - t ** 2 / 12 - 1j * t ** 3 / 60
    return np.where(small, series, exact)


def oscillatory_weights(zeta, nodes):
    """W with (W f)_i ~ int exp(i zeta |x_i - y|) f(y) dy on a uniform grid.

    Also returns the signed version for int sign(x_i - y) exp(i zeta |x_i - y|) f(y) dy.
    End nodes carry full hats; densities are assumed to vanish there.
    """
    nodes = np.asarray(nodes, dtype=float)
    h = nodes[1] - nodes[0]
    idx = np.arange(nodes.size)
    d = np.abs(idx[:, None] - idx[None, :])
    t = zeta * h
    phase = np.exp(1j * zeta * h * d)
    W = h * phase * _hat_off(t)
    np.fill_diagonal(W, h * _hat_on(t))
    S = h * np.sign(idx[:, None] - idx[None, :]) * phase * _hat_off(t)
    return W, S


def kernel_matrices_1d(zeta, nodes, quadrature="filon"):
    """Discrete (-d^2/dx^2 - zeta^2)^(-1) and d/dx of it, acting on nodal values.

    The derivative kernel is -sign(x - y) exp(i zeta |x - y|) / 2.
    """
    nodes = np.asarray(nodes, dtype=float)
    if quadrature == "filon":
        W, S = oscillatory_weights(zeta, nodes)
    elif quadrature == "trapezoid":
        h = nodes[1] - nodes[0]
        w = np.full(nodes.size, h)
        w[[0, -1]] *= 0.5
        diff = nodes[:, None] - nodes[None, :]
        E = np.exp(1j * zeta * np.abs(diff))
        W, S = E * w[None, :], np.sign(diff) * E * w[None, :]
    else:
        raise Unsupported(f"unknown quadrature {quadrature!r}")
    return 1j / (2 * zeta) * W, -0.5 * S


# ---------------------------------------------------------------------------
# weighted resolvents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightedResolvent:
    """Symmetrised matrix of e^(-mu<x>) G_zeta e^(-mu<y>) on a grid.

    ``kernel[i, j] = sqrt(w_i) e^(-mu<x_i>) G(x_i, x_j) e^(-mu<x_j>) sqrt(w_j)``
    (for radial grids, w includes the surface measure), so the spectral
    norm of ``kernel`` is the L^2 operator norm of the weighted resolvent.
    """

    mu: float
    zeta: complex
    grid: object
    kernel: np.ndarray = field(repr=False)

    @property
    def norm(self):
        return spectral_norm(self.kernel)

    def apply(self, f):
        """Unweighted action (-Delta - zeta^2)^(-1) f at the grid nodes."""
        x = self.grid.nodes
        root = np.sqrt(self._measure())
        e = np.exp(-self.mu * japanese(x))
        return (self.kernel @ (root * f / e)) / (root * e)

    def _measure(self):
        if isinstance(self.grid, RadialGrid):
            return 4 * np.pi * self.grid.weights
        return self.grid.weights


def _check_strip(zeta, mu, delta):
    zeta = complex(zeta)
    if zeta.imag <= -mu:
        raise DomainError(f"Im zeta = {zeta.imag:.3g} below the continuation strip Im zeta > -mu = {-mu}")
    if abs(zeta) <= delta:
        raise DomainError(f"|zeta| = {abs(zeta):.3g} within the exclusion radius {delta}")
    return zeta


def resolvent_kernel_1d(zeta, mu, grid, quadrature="trapezoid", delta=ZETA_EXCLUSION):
    """Weighted 1D free resolvent, continued to Im zeta > -mu."""
    zeta = _check_strip(zeta, mu, delta)
    x = grid.nodes
    if quadrature == "trapezoid":
        G = 1j / (2 * zeta) * np.exp(1j * zeta * np.abs(x[:, None] - x[None, :]))
        s = np.sqrt(grid.weights) * np.exp(-mu * japanese(x))
        K = s[:, None] * G * s[None, :]
    else:
        # Filon weights already integrate against hats of width h
        R, _ = kernel_matrices_1d(zeta, x, quadrature)
        e = np.exp(-mu * japanese(x))
        h = np.sqrt(grid.spacing)
        K = (h * e)[:, None] * R * (e / h)[None, :]
    return WeightedResolvent(mu, zeta, grid, K)


def radial_kernel_3d(zeta, r, rp):
    """Angular average of exp(i zeta |x - y|) / (4 pi |x - y|) over the sphere |y| = r'."""
    r = np.asarray(r, dtype=float)[:, None]
    rp = np.asarray(rp, dtype=float)[None, :]
    lo, hi = np.minimum(r, rp), np.maximum(r, rp)
    return np.sin(zeta * lo) * np.exp(1j * zeta * hi) / (4 * np.pi * zeta * r * rp)


def resolvent_kernel_3d(zeta, mu, grid, delta=ZETA_EXCLUSION):
    """Weighted 3D free resolvent on radial functions, continued to Im zeta > -mu."""
    zeta = _check_strip(zeta, mu, delta)
    r = grid.nodes
    G = radial_kernel_3d(zeta, r, r)
    s = np.sqrt(4 * np.pi * grid.weights) * np.exp(-mu * japanese(r))
    return WeightedResolvent(mu, zeta, grid, s[:, None] * G * s[None, :])


def cauchy_reconstruct(fn, center, radius, nodes=64):
    """(1/2 pi i) contour integral of fn(z) / (z - center) over a circle."""
    z, w = circle_nodes(center, radius, nodes)
    return sum(wj * fn(zj) / (zj - center) for zj, wj in zip(z, w))


# ---------------------------------------------------------------------------
# F_{N, rho}
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FNREvaluator:
    """F_{N,rho}(zeta) = int_0^rho lambda^(N-1) / (lambda^2 - zeta^2) d lambda and its continuation."""

    N: int
    rho: float

    def __post_init__(self):
        if self.N < 3:
            raise DomainError(f"N must be at least 3, got {self.N}")
        if self.N % 2 == 0:
            raise Unsupported("even N: the continuation through zeta = 0 branches")
        if not self.rho > 0:
            raise DomainError("rho must be positive")

    def __call__(self, zeta):
        zeta = complex(zeta)
        N, rho = self.N, self.rho
        if abs(zeta) >= rho:
            raise DomainError(f"|zeta| = {abs(zeta):.3g} not inside the disc of radius {rho}")
        poly = sum(zeta ** (2 * j) * rho ** (N - 2 - 2 * j) / (N - 2 - 2 * j)
                   for j in range((N - 1) // 2))
        log = np.log((rho - zeta) / (rho + zeta)) + np.pi * 1j
        return complex(poly + zeta ** (N - 2) / 2 * log)

    def by_quadrature(self, zeta):
        """The defining integral, valid for Im zeta > 0."""
        zeta = complex(zeta)
        if zeta.imag <= 0:
            raise DomainError("the defining integral needs Im zeta > 0")
        N = self.N

        def part(fn):
            return integrate.quad(fn, 0, self.rho, epsabs=1e-14, epsrel=1e-13, limit=400)[0]

        def g(lam):
            return lam ** (N - 1) / (lam * lam - zeta * zeta)
        return complex(part(lambda t: g(t).real), part(lambda t: g(t).imag))

    def bound(self, zeta):
        a = abs(complex(zeta))
        return (self.rho ** (self.N - 2) / 2
                * (2 + np.log(self.N) + np.pi + np.log((self.rho + a) / (self.rho - a))))


def f_n_rho(N, rho, zeta):
    return FNREvaluator(N, rho)(zeta)


# ---------------------------------------------------------------------------
# limiting absorption probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LapProbe:
    z: np.ndarray
    norms: np.ndarray
    slope: float
    intercept: float
    s: float
    derivatives: int

    def rows(self):
        return [(float(abs(z)), float(nm)) for z, nm in zip(self.z, self.norms)]


def lap_bound_probe(z_samples, s=1.0, derivatives=0, grid=None, delta=ZETA_EXCLUSION):
    """Fit log ||<x>^(-s) d^nu (-d^2 - z)^(-1) <x>^(-s)|| against log |z| in 1D.

    ``derivatives`` is 0 or 1; the expected slope is -(1 - nu) / 2.
    """
    if s <= 0.5:
        raise DomainError("the weight exponent must exceed 1/2")
    if derivatives not in (0, 1):
        raise Unsupported("only 0 or 1 derivatives are probed")
    z_samples = np.asarray(z_samples, dtype=complex)
    mods = np.abs(z_samples)
    if np.any(mods <= delta):
        raise DomainError("sample inside the excluded disc around 0")
    near_axis = (z_samples.real > 0) & (np.abs(z_samples.imag) < delta)
    if np.any(near_axis):
        raise DomainError("sample too close to the positive real axis")
    if mods.max() / mods.min() < 100:
        raise DomainError("samples must span at least two decades in |z|")
    grid = grid or Grid1D(10.0, 2501)
    x = grid.nodes
    wt = japanese(x) ** (-s)
    sq = np.sqrt(grid.weights)
    norms = []
    for z in z_samples:
        zeta = np.sqrt(z)
        if zeta.imag < 0:
            zeta = -zeta
        R, dR = kernel_matrices_1d(zeta, x, "filon")
        K = dR if derivatives else R
        # hats already carry the spacing; rescale to the symmetric L^2 form
        A = (sq * wt)[:, None] * K * (wt / sq)[None, :]
        norms.append(spectral_norm(A))
    norms = np.array(norms)
    logs = np.log(mods)
    if np.ptp(logs) == 0:
        raise FitError("all samples share the same modulus")
    slope, intercept = np.polyfit(logs, np.log(norms), 1)
    return LapProbe(z_samples, norms, float(slope), float(intercept), s, derivatives)


def spectral_norm(A):
    """Largest singular value; iterative for large matrices."""
    A = np.asarray(A)
    if min(A.shape) <= 64:
        return float(la.svdvals(A)[0])
    return float(spla.svds(A, k=1, return_singular_vectors=False, tol=1e-10)[0])


def default_lap_samples(count=9, lo=1.0, hi=4.0, imag=0.1):
    """Re z log-spaced on [10^lo, 10^hi] at fixed Im z, approaching the positive axis."""
    return np.logspace(lo, hi, count) + 1j * imag


def sector_lap_samples(count=9, lo=1.0, hi=4.0, ratio=0.1):
    """|z| log-spaced on [10^lo, 10^hi] along the ray Im z = ratio |z|."""
    mods = np.logspace(lo, hi, count)
    return mods * np.exp(1j * np.arcsin(ratio))
