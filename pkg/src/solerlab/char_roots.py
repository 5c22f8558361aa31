"""Characteristic roots of holomorphic matrix families and the reduced families T, S.

A point z0 is a characteristic root of an analytic family A(z) when A(z0)
is singular. Roots inside a circle are located with the block moment
(Beyn) method: with a probe block V,

    M_p = (1/2 pi i) contour integral of ((z - c)/r)^p A(z)^(-1) V dz,

the block Hankel matrices of M_0, M_1, ... reveal the roots as the
eigenvalues of a small pencil. Their total multiplicity is cross-checked
against the winding number (1/2 pi i) contour integral of tr(A^(-1) A') dz.
The multiplicity of a single root is the order of vanishing, at z0, of
the determinant of A(z) restricted to the spectral subspace of its small
eigenvalues.

The second half builds the concrete families for the Soler linearisation
near lambda = 2 omega i (n = 1, N = 2). Writing lambda = (2 omega + eps^2 z) i,
the pi^+ part Y of an eigenvector is eliminated through

    Y = vartheta X = (1 - Phi)^(-1) Phi X,
    Phi = pi^+ {(omega - i lambda) + m (pi_P - pi_A) + eps D_0}
          (Delta_y + zeta^2)^(-1) V,   zeta^2 = ((omega - i lambda)^2 - m^2) / eps^2,

using the outgoing free resolvent continued across the real axis, which
leaves the nonlinear eigenvalue problem T(eps, z) X = 0 on Range pi^-,
and S(eps, z) is the Schur complement of its particle block.
"""

import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import (ConfigurationError, ContourError, ContourTooClose, HypothesisError,
                     MultiplicityError, RegimeError, SingularBlock)
from .numerics import circle_nodes
from .resolvent import japanese, kernel_matrices_1d, spectral_norm

MIN_QUAD_POINTS = 64


# ---------------------------------------------------------------------------
# families and contours
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HoloFamily:
    """An analytic square-matrix family z -> A(z) on a disc-shaped domain.

    ``derivative`` may be None, in which case A'(z) is taken from a
    five-point complex difference with step ``fd_step``.
    """

    evaluator: object = field(repr=False)
    size: int
    derivative: object = field(default=None, repr=False)
    domain: tuple = (0.0, np.inf)
    label: str = ""
    fd_step: float = None

    def __call__(self, z):
        return np.asarray(self.evaluator(complex(z)), dtype=complex)

    def contains(self, z):
        center, radius = self.domain
        return abs(complex(z) - center) < radius

    def deriv(self, z, step=None):
        if self.derivative is not None:
            return np.asarray(self.derivative(complex(z)), dtype=complex)
        h = step or self.fd_step or 1e-4
        z = complex(z)
        return (8 * (self(z + h) - self(z - h)) - (self(z + 2 * h) - self(z - 2 * h))) / (12 * h)

    def cauchy_riemann_residual(self, z, h=1e-4):
        """Relative mismatch between the real and imaginary difference quotients."""
        z = complex(z)
        dx = (self(z + h) - self(z - h)) / (2 * h)
        dy = (self(z + 1j * h) - self(z - 1j * h)) / (2j * h)
        scale = max(np.linalg.norm(dx), np.linalg.norm(self(z)), 1e-300)
        return float(np.linalg.norm(dx - dy) / scale)


def matrix_polynomial(coeffs, label="polynomial"):
    """HoloFamily for A(z) = sum_p coeffs[p] z^p with the exact derivative."""
    coeffs = [np.atleast_2d(np.asarray(c, dtype=complex)) for c in coeffs]

    def A(z):
        return sum(c * z ** p for p, c in enumerate(coeffs))

    def dA(z):
        return sum(p * c * z ** (p - 1) for p, c in enumerate(coeffs) if p)
    return HoloFamily(A, coeffs[0].shape[0], dA, label=label)


@dataclass(frozen=True)
class Contour:
    center: complex
    radius: float
    quad_points: int = MIN_QUAD_POINTS

    def __post_init__(self):
        if self.quad_points < MIN_QUAD_POINTS:
            raise ConfigurationError(f"quad_points must be at least {MIN_QUAD_POINTS}")
        if not self.radius > 0:
            raise ConfigurationError("contour radius must be positive")

    def nodes(self):
        return circle_nodes(self.center, self.radius, self.quad_points)

    def inside(self, z):
        return abs(complex(z) - self.center) < self.radius


@dataclass
class RootReport:
    roots: list
    multiplicities: list
    total: int
    winding: complex
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "roots": [[float(z.real), float(z.imag)] for z in self.roots],
            "multiplicities": [int(a) for a in self.multiplicities],
            "total": int(self.total),
            "winding": [float(self.winding.real), float(self.winding.imag)],
            "diagnostics": {k: v for k, v in self.diagnostics.items()
                            if isinstance(v, (int, float, str, bool, list))},
        }


def _map_nodes(fn, nodes, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, nodes))
    return [fn(z) for z in nodes]


def _check_contour(family, contour):
    if np.isfinite(family.domain[1]):
        c, r = family.domain
        if abs(contour.center - c) + contour.radius >= r:
            raise ContourError("contour leaves the domain of the family")


def winding_count(family, contour, workers=1):
    """(1/2 pi i) contour integral of tr(A^(-1) A') dz, unrounded."""
    _check_contour(family, contour)
    z, w = contour.nodes()

    def term(zj):
        return np.trace(la.solve(family(zj), family.deriv(zj, contour.radius * 1e-4)))
    return complex(sum(wj * t for wj, t in zip(w, _map_nodes(term, z, workers))))


def _rounded_winding(wind, tol=0.1):
    total = int(round(wind.real))
    if abs(wind - total) >= tol:
        raise ContourTooClose(
            f"winding count {wind.real:.4f}{wind.imag:+.4f}i is not an integer; "
            "a characteristic root is close to the contour", winding=wind)
    return total


def _cluster(values, tol):
    groups = []
    for v in sorted(values, key=lambda c: (c.real, c.imag)):
        for g in groups:
            if abs(v - np.mean(g)) <= tol:
                g.append(v)
                break
        else:
            groups.append([v])
    return groups


def _polish_root(family, z0, multiplicity, steps=3):
    """Newton iteration z <- z - alpha / tr(A^(-1) A') on a characteristic root."""
    def smin_rel(z):
        s = la.svdvals(family(z))
        return s[-1] / s[0] if s[0] > 0 else 0.0
    best, best_val = z0, smin_rel(z0)
    z = z0
    for _ in range(steps):
        if best_val < 1e-14:
            break
        try:
            with warnings.catch_warnings(), np.errstate(all="ignore"):
                warnings.simplefilter("error", la.LinAlgWarning)
                t = np.trace(la.solve(family(z), family.deriv(z)))
        except (la.LinAlgError, la.LinAlgWarning):
            break
        if t == 0 or not np.isfinite(t):
            break
        z = z - multiplicity / t
        val = smin_rel(z)
        if val < best_val:
            best, best_val = z, val
    return best, best_val


def find_char_roots(family, contour, probe_columns=None, seed=0, rank_tol=1e-10,
                    max_moments=4, cluster_tol=None, workers=1, root_tol=1e-8):
    """Characteristic roots inside ``contour`` with multiplicities."""
    t0 = time.perf_counter()
    _check_contour(family, contour)
    z, w = contour.nodes()
    n = family.size
    c, r = complex(contour.center), contour.radius
    values = _map_nodes(family, z, workers)
    smins = []
    for A in values:
        s = la.svdvals(A)
        smins.append(s[-1] / s[0])
    if min(smins) < 1e-12:
        raise ContourTooClose("A(z) is numerically singular on the contour",
                              min_singular=float(min(smins)))
    lus = [la.lu_factor(A) for A in values]
    h = r * 1e-4
    derivs = _map_nodes(lambda zj: family.deriv(zj, h), z, workers)
    wind = complex(sum(wj * np.trace(la.lu_solve(lu, dA))
                       for wj, lu, dA in zip(w, lus, derivs)))
    total = _rounded_winding(wind)
    diag = {"winding_real": wind.real, "winding_imag": wind.imag,
            "min_rel_singular_on_contour": float(min(smins))}
    if total == 0:
        diag["seconds"] = time.perf_counter() - t0
        return RootReport([], [], 0, wind, diag)
    L = probe_columns or min(n, total + 1)
    K = int(np.ceil((total + 1) / L)) if L < total + 1 else 1
    if K > max_moments:
        raise ContourError(f"{total} roots need {K} moments with {L} probe columns "
                           f"(limit {max_moments})")
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((n, L)) + 1j * rng.standard_normal((n, L))
    solved = [la.lu_solve(lu, V) for lu in lus]
    moments = []
    for p in range(2 * K):
        moments.append(sum(wj * ((zj - c) / r) ** p * X for zj, wj, X in zip(z, w, solved)))
    B0 = np.block([[moments[i + j] for j in range(K)] for i in range(K)])
    B1 = np.block([[moments[i + j + 1] for j in range(K)] for i in range(K)])
    U, s, Wh = la.svd(B0, full_matrices=False)
    k = int(np.sum(s > rank_tol * s[0]))
    diag["hankel_singular_values"] = [float(v) for v in s[:k + 2]]
    if k == 0:
        raise ContourError("moment matrix has numerical rank 0 although the winding count is positive")
    pencil = U[:, :k].conj().T @ B1 @ Wh[:k].conj().T / s[:k][None, :]
    eigs = c + r * la.eigvals(pencil)
    eigs = [e for e in eigs if contour.inside(e)]
    tol = cluster_tol if cluster_tol is not None else 1e-5 * r
    groups = _cluster(eigs, tol)
    roots, mults, residuals = [], [], []
    for g in groups:
        z0 = complex(np.mean(g))
        z0, res = _polish_root(family, z0, len(g))
        roots.append(z0)
        mults.append(len(g))
        residuals.append(float(res))
    diag["root_residuals"] = residuals
    diag["rank"] = k
    diag["seconds"] = time.perf_counter() - t0
    if sum(mults) != total:
        diag["moment_count"] = sum(mults)
        raise ContourError(f"moment method found {sum(mults)} roots, winding count {total}",
                           **{k: v for k, v in diag.items() if k != "hankel_singular_values"})
    bad = [zr for zr, res in zip(roots, residuals) if res >= root_tol]
    if bad:
        diag["unverified_roots"] = [[b.real, b.imag] for b in bad]
    return RootReport(roots, mults, total, wind, diag)


# ---------------------------------------------------------------------------
# multiplicity of a single root
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MultiplicityReport:
    z0: complex
    algebraic: int
    geometric: int
    projector_rank: int
    fitted_order: float
    winding: float
    radii: tuple


def _small_eigenvalues(A, delta):
    ev = la.eigvals(A)
    return ev[np.abs(ev) < delta]


def multiplicity_report(family, z0, delta=None, radii=None, nodes=64, kernel_tol=1e-8):
    """Order of vanishing of det(A(z) restricted to its spectral subspace near 0).

    The restricted determinant is the product of the eigenvalues of A(z)
    inside |eta| < delta. Its order of vanishing at z0 is read off from a
    log-log fit of its circle average over shrinking radii and confirmed
    by its winding number.
    """
    z0 = complex(z0)
    A0 = family(z0)
    scale = la.norm(A0, 2)
    ev0 = np.sort(np.abs(la.eigvals(A0)))
    if delta is None:
        # halfway (geometrically) between the near-zero cluster and the rest
        big = ev0[ev0 > 1e-6 * scale]
        delta = 0.5 * big[0] if big.size else max(scale, 1.0)
    rank = int(np.sum(ev0 < delta))
    if rank == 0:
        raise MultiplicityError(f"z0 = {z0} is not a characteristic root: no eigenvalue below {delta:.3g}")
    if radii is None:
        base = min(1e-2, 0.1 * delta / max(la.norm(family.deriv(z0), 2), 1e-300))
        radii = (base, base / 2, base / 4)
    s = la.svdvals(A0)
    ref = max(s[0], la.norm(family(z0 + radii[0]), 2))
    geometric = int(np.sum(s < kernel_tol * ref))
    means, windings = [], []
    for rho in radii:
        zz, _ = circle_nodes(z0, rho, nodes)
        dets = []
        for zj in zz:
            small = _small_eigenvalues(family(zj), delta)
            if small.size != rank:
                raise MultiplicityError(
                    f"spectral subspace changes dimension on |z - z0| = {rho:.3g} "
                    f"({small.size} vs {rank}); shrink the radii", radius=rho)
            dets.append(np.prod(small))
        dets = np.array(dets)
        means.append(np.mean(np.abs(dets)))
        phase = np.unwrap(np.angle(np.append(dets, dets[0])))
        windings.append((phase[-1] - phase[0]) / (2 * np.pi))
    slope = float(np.polyfit(np.log(radii), np.log(means), 1)[0])
    order = int(round(slope))
    wind = float(np.mean(windings))
    if abs(slope - order) > 0.2 or abs(wind - order) > 0.2 or order < 1:
        raise MultiplicityError(
            f"ambiguous order of vanishing at {z0}: fitted {slope:.3f}, winding {wind:.3f}",
            fitted=slope, winding=wind, radii=list(radii))
    if geometric > order:
        raise MultiplicityError(f"geometric multiplicity {geometric} exceeds algebraic {order}")
    return MultiplicityReport(z0, order, geometric, rank, slope, wind, tuple(radii))


def multiplicity_at(family, z0, delta=None, **kwargs):
    return multiplicity_report(family, z0, delta, **kwargs).algebraic


# ---------------------------------------------------------------------------
# stability of the total multiplicity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PerturbationCheck:
    stable: bool
    bound: float
    eta_radius: float
    total_unperturbed: int
    total_perturbed: int


def perturbation_report(family, perturbation, contour, eta_radius=None, eta_nodes=16,
                        workers=1):
    """Check max ||(A(z) - eta)^(-1) B(z)|| < 1 on the contour, then compare totals."""
    z, _ = contour.nodes()
    values = _map_nodes(family, z, workers)
    if eta_radius is None:
        gap = min(np.min(np.abs(la.eigvals(A))) for A in values)
        eta_radius = 0.5 * gap
    etas, _ = circle_nodes(0.0, eta_radius, eta_nodes)
    eye = np.eye(family.size)
    bound = 0.0
    for zj, A in zip(z, values):
        B = np.asarray(perturbation(zj), dtype=complex)
        for eta in etas:
            bound = max(bound, la.norm(la.solve(A - eta * eye, B), 2))
    if bound >= 1:
        raise HypothesisError(
            f"max ||(A - eta)^(-1) B|| = {bound:.3g} >= 1 on the contour", bound=bound)
    total_a = _rounded_winding(winding_count(family, contour, workers))
    summed = HoloFamily(lambda s: family(s) + np.asarray(perturbation(s), dtype=complex),
                        family.size, domain=family.domain, label=family.label + "+B")
    total_b = _rounded_winding(winding_count(summed, contour, workers))
    return PerturbationCheck(total_a == total_b, float(bound), float(eta_radius), total_a, total_b)


def perturbation_stability_check(family, B_family, contour, **kwargs):
    return perturbation_report(family, B_family, contour, **kwargs).stable


# ---------------------------------------------------------------------------
# the reduced families of the Soler linearisation
# ---------------------------------------------------------------------------

_S2 = 1 / np.sqrt(2)
# columns: e_P^+, e_A^+, e_P^-, e_A^- in the real-form coordinates
# [Re psi_1, Re psi_2, Im psi_1, Im psi_2]; J e = +-i e, beta e = +-e.
SPLIT_BASIS = _S2 * np.array([
    [1, 0, 1, 0],
    [0, 1, 0, 1],
    [1j, 0, -1j, 0],
    [0, 1j, 0, -1j],
])
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.diag([1.0, -1.0])
REDUCTION_Y_MAX = 12.0
REDUCTION_POINTS = 192


@dataclass(frozen=True)
class ThetaMap:
    """vartheta(., eps, z) as a matrix from pi^- to pi^+ coordinates on the grid."""

    epsilon: float
    z: complex
    zeta: complex
    matrix: np.ndarray = field(repr=False)
    phi_norm: float
    norm: float


class DiracReduction:
    """Precomputed pieces for vartheta, T(eps, z) and S(eps, z) at one solitary wave."""

    def __init__(self, lin, weight_rate=None):
        self.lin = lin
        self.eps = lin.epsilon
        self.m = lin.m
        self.omega = lin.omega
        k = lin.profile.nonlin.k
        self.weight_rate = float(k if weight_rate is None else weight_rate)
        self.y = lin.grid.nodes * self.eps
        N = self.y.size
        self.N = N
        V = lin.rescaled_potential()
        U = SPLIT_BASIS
        Vt = np.einsum("ia,nij,jb->nab", U.conj(), V, U)
        # block matrix of multiplication operators, rows/cols over (component, node)
        big = np.zeros((4 * N, 4 * N), dtype=complex)
        for a in range(4):
            for b in range(4):
                big[a * N:(a + 1) * N, b * N:(b + 1) * N] = np.diag(Vt[:, a, b])
        self.V_split = big
        self.D_y = lin.D / self.eps
        w = np.exp(-self.weight_rate * japanese(self.y))
        self.w2 = np.tile(w, 2)
        self.w4 = np.tile(w, 4)

    # -- spectral parameter ---------------------------------------------------
    def spectral(self, z):
        """omega - i lambda, zeta and the outgoing-resolvent wave number kappa = -zeta."""
        w = 3 * self.omega + self.eps ** 2 * z
        zeta = np.sqrt((w * w - self.m ** 2) / self.eps ** 2 + 0j)
        if zeta.real < 0:
            zeta = -zeta
        return w, zeta

    def phi_matrix(self, z):
        """Phi as a (2N x 4N) matrix from all split components to pi^+ components."""
        w, zeta = self.spectral(z)
        if abs(zeta.imag) >= self.weight_rate:
            raise RegimeError(f"|Im zeta| = {abs(zeta.imag):.3g} leaves the strip |Im zeta| < {self.weight_rate}")
        R, dR = kernel_matrices_1d(-zeta, self.y, "filon")
        M_R = -(w * np.eye(2) + self.m * SIGMA_Z)
        M_D = -self.eps * 1j * SIGMA_X
        op = np.kron(M_R, R) + np.kron(M_D, dR)
        N = self.N
        return op @ self.V_split[:2 * N], zeta

    def vartheta(self, z, check=True):
        N = self.N
        Phi, zeta = self.phi_matrix(z)
        phi_norm = np.nan
        if check:
            phi_norm = spectral_norm(self.w2[:, None] * Phi / self.w4[None, :])
            if phi_norm >= 0.5:
                raise RegimeError(f"||Phi|| = {phi_norm:.3g} >= 1/2: eps = {self.eps:.3g} is too large",
                                  phi_norm=phi_norm)
        theta = la.solve(np.eye(2 * N) - Phi[:, :2 * N], Phi[:, 2 * N:])
        norm = spectral_norm(self.weighted(theta)) if check else np.nan
        return ThetaMap(self.eps, complex(z), zeta, theta, phi_norm, norm)

    def weighted(self, M):
        """The matrix of M between the L^{2,-mu} spaces (e^{-mu<y>} M e^{mu<y>})."""
        return self.w2[:, None] * M / self.w2[None, :]

    def vartheta_derivative_norm(self, z, h=1e-2):
        """||d vartheta / dz|| in the weighted norm, five-point difference in z."""
        th = {j: self.vartheta(z + j * h, check=False).matrix for j in (-2, -1, 1, 2)}
        d = (8 * (th[1] - th[-1]) - (th[2] - th[-2])) / (12 * h)
        return spectral_norm(self.weighted(d))

    # -- T and S ----------------------------------------------------------------
    def T(self, z):
        N, eps, m, om = self.N, self.eps, self.m, self.omega
        theta = self.vartheta(z, check=False).matrix
        Vmm = self.V_split[2 * N:, 2 * N:]
        Vmp = self.V_split[2 * N:, :2 * N]
        Vth = Vmm + Vmp @ theta
        eye = np.eye(N)
        diag = la.block_diag(((m + om) / eps ** 2 + z) * eye, (z - 1 / (m + om)) * eye)
        # eps^-1 D_0 on pi^-: J = -i, alpha swaps the particle and antiparticle parts
        D0 = np.kron(-1j * SIGMA_X, self.D_y) / eps
        return diag + D0 + Vth

    def S(self, z):
        N = self.N
        Tz = self.T(z)
        T11, T12 = Tz[:N, :N], Tz[:N, N:]
        T21, T22 = Tz[N:, :N], Tz[N:, N:]
        cond = np.linalg.cond(T11)
        if not np.isfinite(cond) or cond > 1e12:
            raise SingularBlock(f"T11 is singular (condition {cond:.3e})", condition=cond)
        return T22 - T21 @ la.solve(T11, T12)

    def limit_S(self, gs):
        """S(0, z) - z = -l_- on the same y grid, from the ground state ``gs``."""
        # square of the first-derivative matrix, as in the Dirac operator
        # (it drops the Nyquist mode, unlike the spectral second derivative)
        D2 = self.D_y @ self.D_y
        u = gs(np.abs(self.y))
        return (np.eye(self.N) - D2.real) / (2 * gs.m) - np.diag(u ** (2 * gs.k))


def _domain_radius(m):
    return 1.0


def build_reduction(profile, y_max=REDUCTION_Y_MAX, num_points=REDUCTION_POINTS):
    from .dirac_linearization import build_linearization
    return DiracReduction(build_linearization(profile, y_max, num_points))


def vartheta_map(profile, lin=None, epsilon=None, z=0.0):
    """vartheta(., eps, z) with its weighted norm; raises RegimeError when ||Phi|| >= 1/2."""
    red = _reduction(profile, lin, epsilon)
    if abs(z) >= 1:
        raise ConfigurationError("z must lie in the unit disc")
    return red.vartheta(z)


def _reduction(profile, lin, epsilon):
    if epsilon is not None and not np.isclose(epsilon, profile.epsilon, rtol=1e-12, atol=0):
        raise ConfigurationError(f"epsilon {epsilon} does not match the wave (eps = {profile.epsilon})")
    if isinstance(lin, DiracReduction):
        return lin
    if lin is None:
        return build_reduction(profile)
    return DiracReduction(lin)


def build_T_and_S(profile, lin=None, epsilon=None):
    """(T, S) as HoloFamily objects on the unit disc in z.

    With ``epsilon == 0`` the argument ``profile`` is the ground state u_k
    and ``lin`` a DiracReduction supplying the y grid; T is then undefined
    (it carries eps^-2) and the first entry is None, while
    S(0, z) = z - l_-.
    """
    if epsilon == 0:
        if not isinstance(lin, DiracReduction):
            raise ConfigurationError("the eps = 0 limit needs a DiracReduction for its grid")
        l_minus = lin.limit_S(profile)
        eye = np.eye(lin.N)
        S0 = HoloFamily(lambda z: z * eye - l_minus, lin.N, lambda z: eye.astype(complex),
                        domain=(0.0, 1.0), label="S(0,z)")
        return None, S0
    red = _reduction(profile, lin, epsilon)
    T = HoloFamily(red.T, 2 * red.N, domain=(0.0, 1.0), label=f"T(eps={red.eps:.4g})", fd_step=1e-4)
    S = HoloFamily(red.S, red.N, domain=(0.0, 1.0), label=f"S(eps={red.eps:.4g})", fd_step=1e-4)
    return T, S


@dataclass(frozen=True)
class ThetaScaling:
    epsilons: tuple
    norms: tuple
    derivative_norms: tuple
    phi_norms: tuple
    points: tuple
    slope: float
    derivative_slope: float


def resolving_points(eps, m=1.0, y_max=6.0, wave_resolution=1.0, min_points=192):
    """Even point count with |zeta| h <= wave_resolution, |zeta| ~ sqrt(8) m / eps."""
    zeta = np.sqrt(8.0) * m / eps
    count = int(np.ceil(2 * y_max * zeta / wave_resolution))
    return max(min_points, count + count % 2)


def vartheta_scaling(k, eps_list=(0.1, 0.05, 0.02), m=1.0, z=0.0, y_max=6.0,
                     wave_resolution=1.0, K=None, c=0.0):
    """Weighted norms of vartheta and d vartheta / dz over eps, with log-log slopes.

    Each grid resolves the outgoing wave exp(i zeta y): the norms are
    attained on inputs oscillating at that frequency, which coarser grids
    cannot represent.
    """
    from .soliton import Nonlinearity, solve_soliton
    nonlin = Nonlinearity(k, K, c)
    norms, dnorms, pnorms, pts = [], [], [], []
    for eps in eps_list:
        profile = solve_soliton(1, nonlin, m, np.sqrt(m * m - eps * eps))
        count = resolving_points(eps, m, y_max, wave_resolution)
        red = build_reduction(profile, y_max, count)
        th = red.vartheta(z)
        norms.append(th.norm)
        pnorms.append(th.phi_norm)
        dnorms.append(red.vartheta_derivative_norm(z))
        pts.append(count)
    logs = np.log(eps_list)
    slope = float(np.polyfit(logs, np.log(norms), 1)[0])
    dslope = float(np.polyfit(logs, np.log(dnorms), 1)[0])
    return ThetaScaling(tuple(eps_list), tuple(norms), tuple(dnorms), tuple(pnorms),
                        tuple(pts), slope, dslope)
