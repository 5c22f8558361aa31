"""Real-form linearisation of the Soler model at a solitary wave (n = 1, N = 2).

With phi = [v, i u sign(x)] the real form is phi_r = [v, 0, 0, w], w = u sign(x),
and

    L = J alpha_r d/dx + m beta_r - omega - f(tau) beta_r
        - 2 f'(tau) (beta_r phi_r)(beta_r phi_r)^T,        tau = v^2 - w^2,

with alpha_r = diag(alpha, alpha), beta_r = diag(beta, beta),
alpha = [[0, 1], [1, 0]], beta = diag(1, -1), J = [[0, 1], [-1, 0]] (2x2 blocks).
The linearised flow is d/dt rho = J L rho.

d/dx is the Fourier pseudospectral derivative on a periodic grid whose
extent and spacing are fixed in the rescaled variable y = eps x, so the
resolution of the solitary wave does not depend on omega. Unknowns are
component-major: all nodes of component 0, then component 1, and so on.
The parity P = beta_r (x -> -x) commutes with J L and splits every
eigenproblem in two.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .errors import (ContourError, FitError, InconclusiveError, NotCritical,
                     SolverError, Unsupported)
from .numerics import (DiscreteOperator, EigenRequest, Grid1D, eigs_near,
                       fourier_derivative, numerical_rank, richardson,
                       riesz_projector)
from .soliton import solve_soliton

ALPHA = np.array([[0.0, 1.0], [1.0, 0.0]])
BETA = np.diag([1.0, -1.0])
ALPHA_R = la.block_diag(ALPHA, ALPHA)
BETA_R = la.block_diag(BETA, BETA)
J_MAT = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
XI_R = np.array([1.0, 0.0, 0.0, 0.0])

DEFAULT_Y_MAX = 24.0
DEFAULT_POINTS = 768


def projectors():
    """pi_P, pi_A, pi^+, pi^-, and Pi (projector onto Xi) as 4x4 matrices."""
    eye = np.eye(4)
    return {
        "pi_P": (eye + BETA_R) / 2,
        "pi_A": (eye - BETA_R) / 2,
        "pi_plus": (eye - 1j * J_MAT) / 2,
        "pi_minus": (eye + 1j * J_MAT) / 2,
        "Pi": np.outer(XI_R, XI_R),
    }


def _real_form(profile, x):
    v, w = profile(x)
    z = np.zeros_like(v)
    return np.concatenate([v, z, z, w]), v, w


@dataclass(frozen=True)
class DiracLinearization:
    profile: object = field(repr=False)
    grid: Grid1D
    L_op: DiscreteOperator = field(repr=False)
    J_mat: np.ndarray = field(repr=False)
    V_blocks: np.ndarray = field(repr=False)
    projectors: dict = field(repr=False)
    phi: np.ndarray = field(repr=False)
    D: np.ndarray = field(repr=False)
    grid_error: float = 0.0

    @property
    def omega(self):
        return self.profile.omega

    @property
    def epsilon(self):
        return self.profile.epsilon

    @property
    def m(self):
        return self.profile.m

    @property
    def size(self):
        return self.L_op.size

    def apply_J(self, v):
        N = self.grid.num_points
        return np.concatenate([v[2 * N:], -v[:2 * N]])

    def jl_matrix(self):
        N = self.grid.num_points
        L = self.L_op.matrix
        return np.vstack([L[2 * N:], -L[:2 * N]])

    def rescaled_potential(self):
        """V(y, eps) = eps^(-2) v(y / eps), one 4x4 block per node."""
        return self.V_blocks / self.epsilon ** 2

    def sector_basis(self, parity):
        return parity_basis(self.grid, parity)

    def sector_matrix(self, parity, matrix=None):
        Q = self.sector_basis(parity)
        A = self.jl_matrix() if matrix is None else matrix
        return np.asarray((Q.T @ (Q.T @ A.T).T))


def parity_basis(grid, parity):
    """Orthonormal basis (sparse, columns) of {psi : beta_r psi(-x) = parity psi(x)}."""
    N = grid.num_points
    R = grid.reflection()
    signs = np.diag(BETA_R)
    rows, cols, vals = [], [], []
    col = 0
    for c in range(4):
        s = parity * signs[c]
        for j in range(N):
            rj = R[j]
            if rj < j:
                continue
            if rj == j:
                if s > 0:
                    rows.append(c * N + j); cols.append(col); vals.append(1.0)
                    col += 1
                continue
            rows += [c * N + j, c * N + rj]
            cols += [col, col]
            vals += [1 / np.sqrt(2), s / np.sqrt(2)]
            col += 1
    return sp.csr_matrix((vals, (rows, cols)), shape=(4 * N, col))


def default_grid(eps, y_max=DEFAULT_Y_MAX, num_points=DEFAULT_POINTS):
    return Grid1D(y_max / eps, num_points, periodic=True)


def build_linearization(profile, y_max=DEFAULT_Y_MAX, num_points=DEFAULT_POINTS):
    """Assemble L(omega) on a periodic grid with spacing fixed in y = eps x."""
    if profile.n != 1:
        raise Unsupported("the Dirac linearisation is assembled for n = 1, N = 2 only")
    grid = default_grid(profile.epsilon, y_max, num_points)
    x = grid.nodes
    N = grid.num_points
    D = fourier_derivative(grid)
    phi, v, w = _real_form(profile, x)
    f = profile.nonlin
    tau = v * v - w * w
    fv, fp = f(tau), f.derivative(tau)
    bphi = np.stack([v, np.zeros_like(v), np.zeros_like(v), -w], axis=1)  # beta_r phi per node
    blocks = (-fv[:, None, None] * BETA_R[None]
              - 2 * fp[:, None, None] * bphi[:, :, None] * bphi[:, None, :])
    m, om = profile.m, profile.omega
    const = m * BETA_R - om * np.eye(4)
    L = np.kron(J_MAT @ ALPHA_R, D)
    for a in range(4):
        for b in range(4):
            diag = const[a, b] + blocks[:, a, b]
            if np.any(diag != 0):
                L[a * N:(a + 1) * N, b * N:(b + 1) * N] += np.diag(diag)
    L_op = DiscreteOperator(L, grid, 4, "periodic", hermitian=True,
                            weights=grid.weights)
    # grid error: spectral derivative of the sampled wave against the ODE slope
    dv, dw = profile.derivatives(x)
    err = max(np.max(np.abs(D @ v - dv)), np.max(np.abs(D @ w - dw)))
    err = float(err + 1e-13 * np.max(np.abs(v)))
    return DiracLinearization(profile, grid, L_op, J_MAT, blocks, projectors(), phi, D, err)


# ---------------------------------------------------------------------------
# exact structure
# ---------------------------------------------------------------------------

def dphi_domega(lin, step=None, with_error=False):
    """d phi / d omega from solved waves at omega +- h, omega +- 2h, h = eps^2/20.

    The five-point stencil is fourth order; the difference to the
    three-point value estimates the truncation error.
    """
    p = lin.profile
    h = p.epsilon ** 2 / 20 if step is None else step
    x = lin.grid.nodes
    sample = {j: _real_form(solve_soliton(1, p.nonlin, p.m, p.omega + j * h), x)[0]
              for j in (-2, -1, 1, 2)}
    d5 = (8 * (sample[1] - sample[-1]) - (sample[2] - sample[-2])) / (12 * h)
    if not with_error:
        return d5
    d3 = (sample[1] - sample[-1]) / (2 * h)
    return d5, float(np.max(np.abs(d5 - d3)))


def structure_residuals(lin, dphi=None):
    """Sup-norm residuals of L (J phi) = 0, L (phi') = 0 and J L d_omega phi = J phi."""
    L = lin.L_op.matrix
    N = lin.grid.num_points
    Jphi = lin.apply_J(lin.phi)
    dxphi = np.concatenate([lin.D @ lin.phi[c * N:(c + 1) * N] for c in range(4)])
    out = {
        "L_J_phi": float(np.max(np.abs(L @ Jphi))),
        "L_dx_phi": float(np.max(np.abs(L @ dxphi))),
        "L_phi_minus_nonlinear_term": float(np.max(np.abs(
            L @ lin.phi + 2 * _tau_fprime(lin) * (BETA_R_full(lin) @ lin.phi)))),
        "grid_error": lin.grid_error,
    }
    if dphi is not None:
        out["JL_dw_phi_minus_J_phi"] = float(np.max(np.abs(
            lin.apply_J(L @ dphi) - Jphi)))
    return out


def _tau_fprime(lin):
    N = lin.grid.num_points
    v, w = lin.phi[:N], lin.phi[3 * N:]
    tau = v * v - w * w
    return np.tile(tau * lin.profile.nonlin.derivative(tau), 4)


def BETA_R_full(lin):
    N = lin.grid.num_points
    return sp.diags(np.repeat(np.diag(BETA_R), N))


def chi_vector(lin, eta=1.0):
    """Real form of chi_{omega,eta} = [-i w eta, v eta] and the complex
    eigenvector chi + i J chi of J L at +2 omega i."""
    N = lin.grid.num_points
    v, w = lin.phi[:N], lin.phi[3 * N:]
    chi = np.column_stack([-1j * w * eta, v * eta])
    chi_r = np.concatenate([chi[:, 0].real, chi[:, 1].real, chi[:, 0].imag, chi[:, 1].imag])
    return chi_r, chi_r + 1j * lin.apply_J(chi_r)


@dataclass(frozen=True)
class TwoOmegaReport:
    residual: float
    grid_error: float
    eigenvalue: complex
    error: float
    extrapolated_error: float
    multiplicity: int


def _nearest_eigenvalue(lin, target, count=3):
    """Eigenvalues of J L near ``target`` in the parity sector of chi, and the
    one whose eigenvector overlaps most with chi + i J chi."""
    Q = lin.sector_basis(-1)
    A = lin.sector_matrix(-1)
    res = eigs_near(A, EigenRequest(target, count=count, tol=1e-6))
    _, psi = chi_vector(lin)
    q = Q.T @ psi
    q = q / np.linalg.norm(q)
    overlaps = [abs(np.vdot(q, v)) for v in res.vectors.T]
    j = int(np.argmax(overlaps))
    near = np.sum(np.abs(res.values - target) < 1e-6 * lin.m)
    return res.values[j], int(near)


def verify_pm2omega(lin, eta=1.0, coarse=None):
    """Residual of (J L - 2 omega i)(chi + i J chi) and the computed eigenvalue
    near 2 omega i, extrapolated over two grids."""
    _, psi = chi_vector(lin, eta)
    target = 2j * lin.omega
    r = lin.jl_matrix() @ psi - target * psi
    lam, mult = _nearest_eigenvalue(lin, target)
    if coarse is None:
        coarse = build_linearization(lin.profile, lin.grid.x_max * lin.epsilon,
                                     lin.grid.num_points // 2)
    lam_c, _ = _nearest_eigenvalue(coarse, target)
    lam_x = richardson(lam, lam_c, 2)
    return TwoOmegaReport(float(np.max(np.abs(r))), lin.grid_error, complex(lam),
                          float(abs(lam - target)), float(abs(lam_x - target)), mult)


# ---------------------------------------------------------------------------
# generalized null space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NullSpaceReport:
    dim_ker: int
    dim_generalized: int
    basis_residuals: dict
    radius: float
    sector_ranks: dict


def kernel_report(lin, delta=0.2, nodes=32, probe_columns=12, seed=0, dphi=None):
    """Kernel dimension of L (eigenvalues below 1e-4 eps^2) and the rank of
    the Riesz projector of J L for the circle |eta| = delta eps^2."""
    eps2 = lin.epsilon ** 2
    radius = delta * eps2
    rng = np.random.default_rng(seed)
    dim_ker, dim_gen, ranks = 0, 0, {}
    for parity in (1, -1):
        Q = lin.sector_basis(parity)
        Ls = np.asarray(Q.T @ (Q.T @ lin.L_op.matrix.T).T)
        ev = la.eigvalsh(0.5 * (Ls + Ls.T))
        dim_ker += int(np.sum(np.abs(ev) < 1e-4 * eps2))
        A = lin.sector_matrix(parity)
        X = rng.standard_normal((A.shape[0], probe_columns))
        with warnings.catch_warnings():
            warnings.simplefilter("error", la.LinAlgWarning)
            try:
                PX = riesz_projector(A, 0.0, radius, nodes, X)
            except la.LinAlgWarning as exc:
                raise ContourError("contour passes through an eigenvalue; perturb delta",
                                   radius=radius) from exc
        r = numerical_rank(PX, rel_tol=1e-6)
        ranks[parity] = r
        dim_gen += r
    res = structure_residuals(lin, dphi)
    return NullSpaceReport(dim_ker, dim_gen, res, radius, ranks)


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Mode:
    value: complex
    residual: float
    outer_mass: float
    kind: str          # "point" or "essential"


OUTER_FRACTION = 0.5


def outer_mass(lin, vec, fraction=OUTER_FRACTION):
    N = lin.grid.num_points
    x = lin.grid.nodes
    dens = np.sum(np.abs(vec.reshape(4, N)) ** 2, axis=0)
    outer = np.abs(x) > (1 - fraction) * lin.grid.x_max
    return float(dens[outer].sum() / dens.sum())


def full_spectrum(lin, artifact_mass=0.1):
    """All eigenvalues of J L, labelled point or essential (discretised band)."""
    A = lin.jl_matrix()
    modes = []
    for parity in (1, -1):
        Q = lin.sector_basis(parity)
        As = lin.sector_matrix(parity, A)
        vals, vecs = la.eig(As)
        vecs /= np.linalg.norm(vecs, axis=0)
        # Q is orthonormal and J L preserves parity, so sector residuals equal full ones
        res = np.linalg.norm(As @ vecs - vecs * vals, axis=0)
        V = Q @ vecs
        N = lin.grid.num_points
        dens = (np.abs(V) ** 2).reshape(4, N, -1).sum(axis=0)
        outer = np.abs(lin.grid.nodes) > (1 - OUTER_FRACTION) * lin.grid.x_max
        masses = dens[outer].sum(axis=0) / dens.sum(axis=0)
        for lam, r, om in zip(vals, res, masses):
            modes.append(Mode(complex(lam), float(r), float(om),
                              "essential" if om > artifact_mass else "point"))
    return modes


def krein_check(lin, vec, lam, tol=1e-6):
    """For Re lam != 0: <psi, L psi> and <psi, J psi> must vanish."""
    L = lin.L_op.matrix
    nrm = np.vdot(vec, vec).real
    qL = abs(np.vdot(vec, L @ vec)) / (nrm * np.linalg.norm(L, 2))
    qJ = abs(np.vdot(vec, lin.apply_J(vec))) / nrm
    return {"L_form": float(qL), "J_form": float(qJ),
            "ok": bool(qL <= tol and qJ <= tol)}


@dataclass(frozen=True)
class SpectrumScan:
    omegas: np.ndarray
    epsilons: np.ndarray
    eigenvalues: list
    z_values: list
    Lambda_values: list
    band_edges: list
    embedded_thresholds: list
    failed: np.ndarray
    m: float = 1.0
    nonlin: object = None
    observed_edges: list = None


DEFAULT_REGION = {"re": (-0.5, 0.5), "im": (-2.5, 2.5)}


def _in_region(lam, region, m, omega):
    re_lo, re_hi = region["re"]
    im_lo, im_hi = region["im"]
    if not (re_lo * m <= lam.real <= re_hi * m and im_lo * m <= lam.imag <= im_hi * m):
        return False
    edge = m - omega
    return abs(abs(lam.imag) - edge) > 1e-3 * m or abs(lam.real) > 1e-3 * m


def spectrum_scan(n, nonlin, m=1.0, omega_list=(0.99, 0.995, 0.999), region=None,
                  y_max=DEFAULT_Y_MAX, num_points=DEFAULT_POINTS, scale_omegas=True):
    """Point spectrum of J L(omega) in ``region`` for each frequency, with
    z_j = -(2 omega + i lambda)/eps^2 near 2mi and Lambda_j = lambda/eps^2 near 0."""
    if n != 1:
        raise Unsupported("Dirac spectra are computed for n = 1 only")
    region = region or DEFAULT_REGION
    omegas = np.array([w * m if scale_omegas else w for w in omega_list], dtype=float)
    eigs, zs, Ls, edges, thresholds, eps_list = [], [], [], [], [], []
    observed = []
    failed = np.zeros(omegas.size, dtype=bool)
    for i, w in enumerate(omegas):
        eps = float(np.sqrt(m * m - w * w))
        eps_list.append(eps)
        thresholds.append((m + w, -(m + w)))
        edges.append((m - w, -(m - w)))
        try:
            prof = solve_soliton(1, nonlin, m, w)
            lin = build_linearization(prof, y_max, num_points)
            modes = full_spectrum(lin)
        except SolverError:
            failed[i] = True
            eigs.append([]); zs.append([]); Ls.append([]); observed.append(None)
            continue
        pts = [md for md in modes if md.kind == "point" and _in_region(md.value, region, m, w)]
        ess = [md.value for md in modes if md.kind == "essential"]
        eigs.append(pts)
        zs.append([complex(-(2 * w + 1j * md.value) / eps ** 2) for md in pts
                   if abs(md.value - 2j * m) < 0.2 * m])
        Ls.append([complex(md.value / eps ** 2) for md in pts if abs(md.value) < 0.2 * m])
        # lowest delocalised mode: the discretised band edge
        observed.append(float(min(abs(l.imag) for l in ess)) if ess else None)
    return SpectrumScan(omegas, np.array(eps_list), eigs, zs, Ls, edges, thresholds,
                        failed, m, nonlin, observed)


def _symmetric_partner(lam, values, tol):
    return any(abs(v + lam) < tol or abs(v + np.conj(lam)) < tol for v in values)


def real_pairs(modes, m=1.0, window=0.2, tol=1e-6):
    """Positive real parts of eigenvalues near 0 that come with a partner -lambda."""
    vals = [md.value for md in modes]
    out = []
    for lam in vals:
        if abs(lam) < window * m and lam.real > tol * m and \
                _symmetric_partner(lam, vals, 1e-6 * m + 1e-6 * abs(lam)):
            out.append(lam)
    return out


def track_origin(scan, curve=None, tol=1e-6):
    """Real pair near 0 across the scan: its epsilon exponent and the
    consistency of its presence with sign(dQ/domega)."""
    lam_plus, eps = [], []
    for w_modes, e in zip(scan.eigenvalues, scan.epsilons):
        pairs = real_pairs(w_modes, scan.m, tol=tol)
        lam_plus.append(max((p.real for p in pairs), default=0.0))
        eps.append(e)
    lam_plus = np.array(lam_plus)
    present = lam_plus > 0
    verdict = {"lambda_plus": lam_plus.tolist(), "epsilons": list(map(float, eps)),
               "real_pair": present.tolist()}
    if present.all():
        if len(eps) < 3:
            raise FitError("need at least 3 frequencies for the exponent fit")
        p = np.polyfit(np.log(eps), np.log(lam_plus), 1)[0]
        verdict["exponent"] = float(p)
    if curve is not None:
        sign = curve.sign_near_m
        verdict["dQ_sign"] = sign
        if sign == "indeterminate":
            verdict["consistent"] = None
        else:
            verdict["consistent"] = bool(present.all() == (sign == "positive")
                                         and (present.any() == present.all()))
    return verdict


def track_2mi(scan, l_minus_eigenvalues=(0.0,), threshold=None, tol=1e-6):
    """Classify every eigenvalue near 2mi through z = -(2 omega + i lambda)/eps^2.

    Classes: exact-zero (lambda = 2 omega i within tol m), matching a discrete
    eigenvalue of l_-, near the threshold 1/(2m), or unclassified.
    """
    m = scan.m
    thr = 1.0 / (2 * m) if threshold is None else threshold
    rows = []
    for w, e, zlist in zip(scan.omegas, scan.epsilons, scan.z_values):
        for z in zlist:
            if abs(z) * e * e <= tol * m:
                cls = "exact-zero"
            elif min(abs(z - s) for s in l_minus_eigenvalues) < 0.05:
                cls = "matching-l_minus"
            elif abs(z - thr) < 0.05:
                cls = "near-threshold"
            else:
                cls = "unclassified"
            rows.append({"omega": float(w), "z": [z.real, z.imag], "class": cls})
    bounded = all(abs(complex(*r["z"])) < 1e3 for r in rows)
    return {"families": rows, "bounded": bounded,
            "all_exact": all(r["class"] == "exact-zero" for r in rows) and bool(rows)}


# ---------------------------------------------------------------------------
# reduced block at the charge-critical exponent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReducedBlockReport:
    sigma2: float
    sigma3: float
    sigma4: list
    mu: float
    dQ_domega: list
    omegas: list
    predicted_lambda: list


def reduced_block(chain, curve, lin_nls=None):
    """sigma_4 from sigma_2 dQ/domega / (2 mu), sigma_2 = 1, sigma_3 = 0, with
    mu = <alpha, l_- alpha> = <beta, u> (the pairing of the Jordan chain)."""
    if chain.alpha is None:
        raise NotCritical("the reduced block needs the critical Jordan chain")
    mu = float(chain.beta_u)
    sig4, pred, om, dq = [], [], [], []
    for w, d in zip(curve.omegas, curve.dQ_domega):
        if np.isnan(d):
            continue
        eps2 = curve_m(curve) ** 2 - w * w
        s4 = eps2 * d / (2 * mu)
        sig4.append(float(s4))
        om.append(float(w))
        dq.append(float(d))
        # real pair for sigma_4 > 0, imaginary pair otherwise
        pred.append(complex(eps2 * np.sqrt(complex(s4))))
    return ReducedBlockReport(1.0, 0.0, sig4, mu, dq, om, pred)


def curve_m(curve):
    return getattr(curve, "m", 1.0)


def stability_verdict(scan, tol=1e-6):
    """unstable if a point eigenvalue has Re > tol m (with its -lambda partner),
    stable if none does and every frequency was computed, else indeterminate."""
    m = scan.m
    if scan.failed.any():
        return "indeterminate"
    for modes in scan.eigenvalues:
        vals = [md.value for md in modes]
        for lam in vals:
            if lam.real > tol * m and _symmetric_partner(lam, vals, 1e-6 * m + 1e-6 * abs(lam)):
                return "unstable"
            if lam.real > tol * m:
                raise InconclusiveError(f"unpaired eigenvalue {lam:.3e} with positive real part")
    return "stable"


def potential_block_bounds(lin, floor=1e-8):
    """Node-wise ratios behind the bounds on the rescaled potential V(y, eps):

    |pi_P V pi_A| / u^(2k), expected O(eps), and
    |pi_X (V + u^(2k)(1 + 2k Pi) beta) pi_X| / u^(2k), X = P, A, expected O(eps^(2 varkappa)).
    """
    from .ground_state import solve_ground_state
    p = lin.profile
    k = p.nonlin.k
    gs = solve_ground_state(1, k, p.m)
    y = p.epsilon * lin.grid.nodes
    w2k = gs(np.abs(y)) ** (2 * k)
    keep = w2k > floor * w2k.max()
    V = lin.rescaled_potential()[keep]
    w = w2k[keep]
    P, A, Pi = lin.projectors["pi_P"], lin.projectors["pi_A"], lin.projectors["Pi"]
    limit = w[:, None, None] * ((np.eye(4) + 2 * k * Pi) @ BETA_R)[None]
    norm = lambda M: np.linalg.norm(M, ord=2, axis=(1, 2))
    cross = norm(P @ V @ A) + norm(A @ V @ P)
    diagP = norm(P @ (V + limit) @ P)
    diagA = norm(A @ (V + limit) @ A)
    return {"cross": float(np.max(cross / w)), "diag_P": float(np.max(diagP / w)),
            "diag_A": float(np.max(diagA / w)), "epsilon": p.epsilon}
