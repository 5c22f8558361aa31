"""Linearisation of the NLS limit at the ground state.

    l_- = 1/(2m) - Delta/(2m) - u^(2k),    l_+ = l_- - 2k u^(2k),
    jl  = [[0, l_-], [-l_+, 0]].

For n = 1 the operators live on the whole line (both parities, so that the
translation mode is present). For n >= 2 they are assembled in one angular
sector of a staggered radial grid.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import birman_schwinger as bsm
from .errors import (BracketError, ConvergenceError, InconclusiveError, NearPole,
                     NotCritical, SolverError)
from .ground_state import solve_ground_state
from .numerics import (DiscreteOperator, EigenRequest, Grid1D, RadialGrid,
                       build_laplacian_1d, build_laplacian_radial, eigs_near,
                       numerical_rank, riesz_projector, sphere_area)


def default_operator_grid(n, k=None):
    if n == 1:
        return Grid1D(24.0, 961)
    return RadialGrid(n, 30.0, 1200, "staggered")


@dataclass(frozen=True)
class NlsLinearization:
    gs: object = field(repr=False)
    grid: object
    ell: int
    u: np.ndarray = field(repr=False)
    laplacian: DiscreteOperator = field(repr=False)
    l_minus: DiscreteOperator = field(repr=False)
    l_plus: DiscreteOperator = field(repr=False)
    jl: DiscreteOperator = field(repr=False)

    @property
    def n(self):
        return self.gs.n

    @property
    def k(self):
        return self.gs.k

    @property
    def m(self):
        return self.gs.m

    @property
    def weights(self):
        """Quadrature weights of the L^2(R^n) inner product on this grid."""
        if self.n == 1:
            return self.grid.weights
        return sphere_area(self.n) * self.grid.weights

    def inner(self, f, g):
        return float(np.sum(self.weights * f * g))

    @property
    def radius(self):
        """|x| at the nodes (signed x for n = 1)."""
        return self.grid.nodes

    def translation_mode(self):
        """d/dx u (n = 1) or the radial profile u'(r) of the l = 1 sector."""
        return self.gs.derivative(np.abs(self.radius)) * (
            np.sign(self.radius) if self.n == 1 else 1.0)


def _laplacian(grid, n, ell, order):
    if n == 1:
        return build_laplacian_1d(grid, order=order)
    return build_laplacian_radial(grid, n, ell)


def _polish(lap, u, k, m, sym=None, iters=30):
    """Newton iterations for the discrete equation -Delta_h u + u - 2m u^(2k+1) = 0."""
    A = lap.matrix
    N = u.size
    I = sp.identity(N, format="csr")
    for _ in range(iters):
        F = -(A @ u) + u - 2 * m * u ** (2 * k + 1)
        if np.max(np.abs(F)) < 1e-13 * max(1.0, np.max(np.abs(u))):
            break
        Jac = (-A + I - sp.diags(2 * m * (2 * k + 1) * u ** (2 * k))).tocsc()
        u = u - spla.spsolve(Jac, F)
        if sym is not None:
            u = 0.5 * (u + u[sym])
    return u


def build_l_operators(gs, grid=None, ell=0, order=None, polish=True):
    """Assemble l_-, l_+ and jl for the ground state ``gs``.

    The ground state is resampled on the operator grid and, for the sector
    containing it (n = 1, or l = 0), Newton-polished against the discrete
    equation so that l_- u = 0 holds to round-off.
    """
    n, k, m = gs.n, gs.k, gs.m
    if grid is None:
        grid = default_operator_grid(n, k)
    if order is None:
        order = 4 if n == 1 else 2
    lap = _laplacian(grid, n, ell, order)
    x = grid.nodes
    u = gs(np.abs(x))
    if polish and (n == 1 or ell == 0):
        sym = grid.reflection() if n == 1 else None
        u = _polish(lap, u, k, m, sym)
    w = None if n == 1 else grid.weights
    N = grid.num_points
    I = sp.identity(N, format="csr")
    pot = sp.diags(u ** (2 * k))
    lm = (I - lap.matrix) / (2 * m) - pot
    lp = lm - 2 * k * pot
    l_minus = DiscreteOperator(lm.tocsr(), grid, 1, lap.bc, hermitian=True, weights=w)
    l_plus = DiscreteOperator(lp.tocsr(), grid, 1, lap.bc, hermitian=True, weights=w)
    jl = sp.bmat([[None, lm], [-lp, None]], format="csr")
    jl_op = DiscreteOperator(jl, grid, 2, lap.bc, weights=w)
    return NlsLinearization(gs, grid, ell, u, lap, l_minus, l_plus, jl_op)


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------

def spectrum_jl(lin, req):
    """Eigenvalues of jl near ``req.shift``; checks that lambda^2 is real."""
    res = eigs_near(lin.jl, req)
    for lam in res.values:
        lam2 = complex(lam) ** 2
        if abs(lam2.imag) > 1e-6 * abs(lam2) + 1e-10:
            raise SolverError(f"eigenvalue {lam:.6g} of jl is off the real/imaginary axes")
    return res


@dataclass(frozen=True)
class ZeroMultiplicity:
    algebraic: int
    geometric: int
    radius: float
    singular_values: tuple


def zero_multiplicity(lin, radius=None, nodes=64, probe_columns=16, seed=0):
    """Algebraic and geometric multiplicity of 0 in the spectrum of jl.

    The algebraic multiplicity is the rank of the Riesz projector for a disc
    of ``radius`` (default 0.05 of the distance 1/(2m) to the essential
    spectrum), applied to a random probe block. The geometric multiplicity
    counts singular values of jl restricted to that range below 1e-6.
    """
    if radius is None:
        radius = 0.05 / (2 * lin.m)
    A = lin.jl.matrix.tocsc()
    d = np.tile(np.sqrt(lin.weights if lin.n > 1 else lin.grid.weights), 2)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((A.shape[0], probe_columns))
    PX = riesz_projector(A, 0.0, radius, nodes, X)
    rank = numerical_rank(PX * d[:, None], rel_tol=1e-6)
    # orthonormal basis of the range (weighted coordinates), then restrict jl
    U, s, _ = la.svd(PX * d[:, None], full_matrices=False)
    Q = U[:, :rank]
    S = (d[:, None] * (A @ (Q / d[:, None])))
    B = Q.conj().T @ S
    sv = la.svdvals(B)
    geometric = int(np.sum(sv < 1e-6))
    return ZeroMultiplicity(rank, geometric, radius, tuple(float(x) for x in sv))


def l_minus_bound_states(lin, count=6):
    """Eigenvalues of the discretised l_- strictly between 0 and 1/(2m)."""
    res = eigs_near(lin.l_minus, EigenRequest(-0.05, count=count, tol=1e-7))
    thr = 1.0 / (2 * lin.m)
    vals = np.sort(np.real(res.values))
    return vals[(vals > 1e-8) & (vals < thr)]


# ---------------------------------------------------------------------------
# Jordan chain at the origin
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JordanChainNLS:
    u: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(default=None, repr=False)
    beta: np.ndarray = field(default=None, repr=False)
    pairing: float = 0.0
    residuals: dict = field(default_factory=dict)
    beta_u: float = None


def theta_vector(lin):
    """theta = -(m/k) u - m x . grad u, sampled from the continuous profile."""
    r = lin.radius
    u = lin.gs(np.abs(r))
    du = lin.gs.derivative(np.abs(r))
    return -(lin.m / lin.k) * u - lin.m * np.abs(r) * du


def critical_pairing(lin):
    """(1/m) <theta, u> / ||u||^2, which equals n/2 - 1/k."""
    u = lin.gs(np.abs(lin.radius))
    return lin.inner(theta_vector(lin), u) / (lin.m * lin.inner(u, u))


def _bordered_solve(op, rhs, border, weights):
    """Solve op x = rhs with x orthogonal to ``border`` (weighted), the border
    absorbing the component of rhs along the near-kernel."""
    d = np.sqrt(weights)
    S = op.symmetric_matrix().tocsc() if sp.issparse(op.matrix) else op.symmetric_matrix()
    b = (d * border)[:, None]
    K = sp.bmat([[S, sp.csc_matrix(b)], [sp.csc_matrix(b.T), None]], format="csc")
    sol = spla.spsolve(K, np.concatenate([d * rhs, [0.0]]))
    return sol[:-1] / d, sol[-1]


def jordan_chain(lin, tol=1e-3):
    """u, theta and, at the critical exponent, alpha and beta.

    alpha solves l_- alpha = theta orthogonally to u, beta solves
    l_+ beta = alpha orthogonally to the kernel of l_+.
    """
    if lin.ell != 0 and lin.n > 1:
        raise SolverError("the Jordan chain lives in the radial sector")
    u = lin.u
    th = theta_vector(lin)
    w = lin.weights
    pairing = lin.inner(th, u)
    res = {"l_plus_theta": float(np.max(np.abs(lin.l_plus @ th - u)))}
    scale = np.sqrt(lin.inner(th, th) * lin.inner(u, u))
    if abs(pairing) > tol * scale:
        raise NotCritical(f"<theta, u> = {pairing:.3e} is not zero: k = {lin.k} is not 2/n",
                          pairing=pairing)
    alpha, _ = _bordered_solve(lin.l_minus, th, u, w)
    if lin.n == 1:
        beta, _ = _bordered_solve(lin.l_plus, alpha, lin.translation_mode(), w)
    else:
        beta = spla.spsolve(lin.l_plus.matrix.tocsc(), alpha)
    res["l_minus_alpha"] = float(np.max(np.abs(lin.l_minus @ alpha - th)))
    res["l_plus_beta"] = float(np.max(np.abs(lin.l_plus @ beta - alpha)))
    beta_u = lin.inner(beta, u)
    alpha_lm_alpha = lin.inner(alpha, lin.l_minus @ alpha)
    res["beta_u_identity"] = abs(beta_u - alpha_lm_alpha)
    if not beta_u > 0:
        raise SolverError(f"<beta, u> = {beta_u:.3e} should be positive")
    return JordanChainNLS(u, th, alpha, beta, pairing, res, beta_u)


# ---------------------------------------------------------------------------
# threshold behaviour
# ---------------------------------------------------------------------------

DEFAULT_KAPPAS = tuple(0.2 * 0.6 ** j for j in range(10))


@dataclass(frozen=True)
class ResonanceVerdict:
    kind: str
    evidence: dict
    extrapolated: float
    eigenvalues_below_threshold: int
    sectors: dict = field(default_factory=dict)


def _extrapolate(kappas, s, basis):
    kappas = np.asarray(kappas)
    if basis == "inverse-log":
        A = np.column_stack([np.ones_like(kappas), 1.0 / np.log(kappas)])
    else:
        A = np.column_stack([np.ones_like(kappas), kappas, kappas ** 2])
    coef, *_ = np.linalg.lstsq(A, s, rcond=None)
    return float(coef[0])


def _zero_energy_state_grows(gs, ell, grid, kappa):
    """Propagate the null vector of M through the free kernel and compare the
    L^2 mass of the zero-energy solution on [0, R] and [0, 2R]."""
    op = bsm.bs_matrix(gs, ell, kappa, grid)
    w_, V = la.eigh(op.M)
    phi = V[:, np.argmin(np.abs(w_))]
    r = grid.nodes
    R = grid.r_max
    far = RadialGrid(gs.n, 2 * R, 2 * grid.num_points, "staggered")
    q = np.sqrt(2 * gs.m) * kappa
    G = 2 * gs.m * bsm.free_kernel(gs.n, ell, q, far.nodes, r)
    psi = G @ (op.weight_vec * phi)
    mass = far.weights * psi ** 2
    inner = mass[far.nodes <= R].sum()
    return (mass.sum() - inner) / inner > 0.05


def detect_threshold_resonance(lin, kappa_samples=DEFAULT_KAPPAS, threshold=1e-3,
                               bs_grid=None):
    """Classify the threshold 1/(2m) of l_- via M(kappa) as kappa -> 0+.

    Every eigenvalue of B(kappa) is non-increasing in kappa, and eigenvalues
    above 1 count bound states below 1/(2m) - kappa^2. In each angular
    sector the largest eigenvalue still below 1 is followed through the
    samples past the last bound-state crossing and extrapolated to kappa = 0
    (quadratic in kappa; in the n = 2 radial sector, where a rank-one
    log(1/kappa) term is split off, linear in 1/log kappa). The distance of
    that limit to 1 is the smallest singular value of M(0+). A sector whose
    limit is below ``threshold`` is singular at the threshold; it is a
    resonance when the associated zero-energy solution is not square
    integrable.

    The smallest singular value of M(kappa) at every sample is kept as
    evidence.
    """
    gs = lin.gs if isinstance(lin, NlsLinearization) else lin
    kappas = np.sort(np.asarray(kappa_samples, dtype=float))[::-1]
    if kappas.size < 4 or np.any(kappas <= 0) or np.any(kappas > 0.5):
        raise SolverError("need at least 4 kappa samples in (0, 0.5]")
    grid = bs_grid or bsm.default_bs_grid(gs.n, gs.k)
    sectors, evidence = {}, {}
    below = 0
    worst, worst_sector = np.inf, None
    for ell in bsm.sectors_for(gs.n):
        spectra = np.array([la.eigvalsh(bsm.bs_matrix(gs, ell, kap, grid).matrix)[::-1]
                            for kap in kappas])
        trace = np.min(np.abs(spectra - 1.0), axis=1)
        counts = np.sum(spectra > 1.0, axis=1)
        changed = np.nonzero(counts != counts[-1])[0]
        use = np.arange(changed[-1] + 1 if changed.size else 0, len(kappas))[-5:]
        if use.size < 3:
            raise InconclusiveError(
                f"too few kappa samples past the last bound state (l={ell})",
                trace=trace.tolist())
        branch = spectra[use, counts[-1]]
        if np.any(np.diff(branch) < -1e-10 * max(1.0, np.max(np.abs(branch)))):
            raise InconclusiveError(
                f"eigenvalue branch of B(kappa) is not monotone in sector l={ell}",
                trace=trace.tolist(), branch=branch.tolist())
        basis = "inverse-log" if (gs.n == 2 and ell == 0) else "quadratic"
        limit = _extrapolate(kappas[use], branch, basis)
        s0 = abs(1.0 - limit)
        if counts[-1] > 0:
            # the lowest branch above 1 only moves further up as kappa -> 0
            s0 = min(s0, float(spectra[-1, counts[-1] - 1] - 1.0))
        nonzero = int(counts[-1]) - (1 if ell == 0 else 0)
        sectors[ell] = {"extrapolated": s0, "bound_states": nonzero,
                        "branch_limit": limit}
        evidence[ell] = [(float(k_), float(t)) for k_, t in zip(kappas, trace)]
        below += nonzero
        if s0 < worst:
            worst, worst_sector = s0, ell
    if worst >= threshold:
        kind = "regular"
    else:
        nu = bsm.sector_order(gs.n, worst_sector)
        probe_kappa = 0.0 if nu > 0 else float(kappas[-1])
        grows = _zero_energy_state_grows(gs, worst_sector, grid, probe_kappa)
        kind = "threshold_resonance" if grows else "threshold_eigenvalue"
        sectors[worst_sector]["singular"] = True
    return ResonanceVerdict(kind, evidence, worst, below, sectors)


def nontrivial_threshold_spectrum(gs, bs_grid=None, kappa=1e-3):
    """Number of eigenvalues of l_- in (0, 1/(2m)) summed over sectors, by
    Birman-Schwinger counting at the threshold."""
    total = 0
    for ell in bsm.sectors_for(gs.n):
        nu = bsm.sector_order(gs.n, ell)
        kap = 0.0 if nu > 0 else kappa
        c = bsm.count_below(gs, ell, kap, bs_grid)
        total += c - (1 if ell == 0 else 0)
    return total


def kn_scan(n, k_lo, k_hi, tol_k=5e-3, m=1.0, log=None):
    """Bisect for the exponent k_n above which l_- has no eigenvalues in
    (0, 1/(2m)) and the threshold is regular."""
    def state(k):
        gs = solve_ground_state(n, k, m)
        c = nontrivial_threshold_spectrum(gs)
        if log is not None:
            log.append((float(k), int(c)))
        return c > 0

    if not state(k_lo):
        raise BracketError(f"k_lo={k_lo} already has trivial threshold spectrum")
    if state(k_hi):
        raise BracketError(f"k_hi={k_hi} still has threshold-adjacent eigenvalues")
    lo, hi = k_lo, k_hi
    while hi - lo > tol_k:
        mid = 0.5 * (lo + hi)
        if state(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class WeightedResolvent:
    z: complex
    norm: float
    sector_norms: dict
    matrices: dict = field(repr=False)


def weighted_resolvent_l_minus(lin, z, bs_grid=None):
    """u^k (l_- - z)^(-1) u^k, sector by sector, and its operator norm."""
    gs = lin.gs if isinstance(lin, NlsLinearization) else lin
    norms, mats = {}, {}
    for ell in bsm.sectors_for(gs.n):
        op, W = bsm.weighted_resolvent(gs, ell, z, bs_grid)
        smin = la.svdvals(op.M)[-1]
        if smin < 1e-8:
            raise NearPole(f"z={z} is within 1e-8 of an eigenvalue of l_- (sector {ell})")
        norms[ell] = float(la.svdvals(W)[0])
        mats[ell] = W
    return WeightedResolvent(complex(z), max(norms.values()), norms, mats)
