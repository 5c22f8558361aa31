"""Grids, finite-difference and spectral operators, eigensolves near a shift,
Schur complements and contour-quadrature Riesz projectors.

Everything here is deliberately small: the physics modules assemble their
operators from these pieces and only ever talk to the eigensolvers through
:func:`eigs_near` and :func:`riesz_projector`.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import gamma as gamma_fn

from .errors import ConfigurationError, ConvergenceError, SingularBlock

# Dense eigensolves are used below this size; above it, shift-invert Arnoldi.
DENSE_LIMIT = 600


def sphere_area(n):
    """Surface measure of the unit sphere in R^n (2 for n = 1)."""
    return 2.0 * np.pi ** (n / 2.0) / gamma_fn(n / 2.0)


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialGrid:
    """Radial nodes on [0, r_max].

    ``scheme="uniform"`` puts node 0 at r = 0 and the last node at r_max.
    ``scheme="staggered"`` uses cell centres r_i = (i + 1/2) h with h =
    r_max / num_points, so the Dirichlet face sits exactly at r_max.
    """

    n_dim: int
    r_max: float
    num_points: int
    scheme: str = "staggered"

    def __post_init__(self):
        if self.n_dim not in (1, 2, 3, 4):
            raise ConfigurationError(f"n_dim must be 1..4, got {self.n_dim}")
        if not self.r_max > 0:
            raise ConfigurationError("r_max must be positive")
        if self.num_points < 16:
            raise ConfigurationError(
                f"grid too coarse: num_points={self.num_points} < 16")
        if self.scheme == "graded":
            raise ConfigurationError("graded radial grids are not implemented")
        if self.scheme not in ("uniform", "staggered"):
            raise ConfigurationError(f"unknown grid scheme {self.scheme!r}")

    @property
    def spacing(self):
        if self.scheme == "staggered":
            return self.r_max / self.num_points
        return self.r_max / (self.num_points - 1)

    @cached_property
    def nodes(self):
        h = self.spacing
        i = np.arange(self.num_points)
        return (i + 0.5) * h if self.scheme == "staggered" else i * h

    @cached_property
    def weights(self):
        """Quadrature weights for the radial measure r^(n-1) dr."""
        h, r, n = self.spacing, self.nodes, self.n_dim
        if self.scheme == "staggered":
            return h * r ** (n - 1)
        # node 0 carries the ball of radius h/2, which keeps the flux-form
        # Laplacian symmetric in this inner product
        w = h * r ** (n - 1)
        w[0] = (h / 2) ** n / n
        return w

    def refined(self, factor=2):
        """Same domain, spacing divided by ``factor``."""
        if self.scheme == "staggered":
            return RadialGrid(self.n_dim, self.r_max, self.num_points * factor, self.scheme)
        return RadialGrid(self.n_dim, self.r_max,
                          (self.num_points - 1) * factor + 1, self.scheme)


@dataclass(frozen=True)
class Grid1D:
    """Symmetric grid on [-x_max, x_max].

    Non-periodic grids include both endpoints. A periodic grid drops the
    right endpoint (it is identified with the left one), so its spacing is
    2 x_max / num_points.
    """

    x_max: float
    num_points: int
    periodic: bool = False

    def __post_init__(self):
        if not self.x_max > 0:
            raise ConfigurationError("x_max must be positive")
        if self.num_points < 16:
            raise ConfigurationError(
                f"grid too coarse: num_points={self.num_points} < 16")
        if self.periodic and self.num_points % 2:
            raise ConfigurationError("periodic grids need an even number of points")

    @property
    def x_min(self):
        return -self.x_max

    @property
    def spacing(self):
        span = self.x_max - self.x_min
        return span / self.num_points if self.periodic else span / (self.num_points - 1)

    @cached_property
    def nodes(self):
        return self.x_min + self.spacing * np.arange(self.num_points)

    @cached_property
    def weights(self):
        w = np.full(self.num_points, self.spacing)
        if not self.periodic:
            w[0] *= 0.5
            w[-1] *= 0.5
        return w

    def reflection(self):
        """Index permutation implementing x -> -x."""
        n = self.num_points
        if self.periodic:
            return (-np.arange(n)) % n
        return np.arange(n)[::-1]

    def refined(self, factor=2):
        if self.periodic:
            return Grid1D(self.x_max, self.num_points * factor, True)
        return Grid1D(self.x_max, (self.num_points - 1) * factor + 1)


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteOperator:
    """A square matrix acting on grid functions with ``components`` values per node.

    Unknowns are ordered component-major: all nodes of component 0, then all
    nodes of component 1, and so on.

    ``weights`` (one per node) define the inner product in which the operator
    is meant to be self-adjoint; the Hermitian check is done on
    W^(1/2) A W^(-1/2).
    """

    matrix: object
    grid: object
    components: int = 1
    bc: str = "dirichlet"
    hermitian: bool = False
    weights: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        expected = self.grid.num_points * self.components
        if self.matrix.shape != (expected, expected):
            raise ConfigurationError(
                f"matrix shape {self.matrix.shape} does not match grid "
                f"({self.grid.num_points} nodes x {self.components} components)")
        if self.bc not in ("dirichlet", "regularity-at-origin", "periodic"):
            raise ConfigurationError(f"unknown boundary condition {self.bc!r}")
        if self.hermitian:
            S = self.symmetric_matrix()
            D = S - S.conj().T
            err = abs(D).max() if sp.issparse(D) else np.abs(D).max()
            scale = abs(S).max() if sp.issparse(S) else np.abs(S).max()
            if err > 1e-12 * max(1.0, scale):
                raise ConfigurationError(
                    f"operator flagged Hermitian but asymmetry is {err:.3e}")

    @property
    def size(self):
        return self.matrix.shape[0]

    def _node_scale(self):
        if self.weights is None:
            return None
        return np.tile(np.sqrt(self.weights), self.components)

    def symmetric_matrix(self):
        """W^(1/2) A W^(-1/2): symmetric when the operator is self-adjoint."""
        d = self._node_scale()
        if d is None:
            return self.matrix
        if sp.issparse(self.matrix):
            return sp.diags(d) @ self.matrix @ sp.diags(1.0 / d)
        return (d[:, None] * self.matrix) / d[None, :]

    def dense(self):
        return self.matrix.toarray() if sp.issparse(self.matrix) else np.asarray(self.matrix)

    def __matmul__(self, v):
        return self.matrix @ v


def _radial_rows(grid, ell):
    """Three-point flux-form stencil of u'' + (n-1)u'/r - l(l+n-2)u/r^2."""
    n, h, r = grid.n_dim, grid.spacing, grid.nodes
    N = grid.num_points
    if grid.scheme == "staggered":
        rp, rm = r + h / 2, r - h / 2
        up = rp[:-1] ** (n - 1) / (h * h * r[:-1] ** (n - 1))
        lo = rm[1:] ** (n - 1) / (h * h * r[1:] ** (n - 1))
        main = -(rp ** (n - 1) + rm ** (n - 1)) / (h * h * r ** (n - 1))
        # ghost node at -h/2: even sectors mirror, odd sectors flip sign;
        # for n >= 2 the face at r = 0 carries zero flux already
        if n == 1:
            main[0] += 1.0 / h ** 2 if ell % 2 == 0 else -1.0 / h ** 2
        # Dirichlet face at r_max: ghost value is minus the last value
        main[-1] -= rp[-1] ** (n - 1) / (h * h * r[-1] ** (n - 1))
        main = main - ell * (ell + n - 2) / r ** 2
        return lo, main, up
    if ell != 0:
        raise ConfigurationError("angular sectors l >= 1 need the staggered scheme")
    rs = r[1:]
    rp, rm = rs + h / 2, rs - h / 2
    main = np.empty(N)
    up = np.empty(N - 1)
    lo = np.empty(N - 1)
    main[1:] = -(rp ** (n - 1) + rm ** (n - 1)) / (h * h * rs ** (n - 1))
    up[1:] = rp[:-1] ** (n - 1) / (h * h * rs[:-1] ** (n - 1))
    lo[:] = rm ** (n - 1) / (h * h * rs ** (n - 1))
    # at r = 0 the Laplacian of a regular radial function is n u''(0)
    main[0] = -2.0 * n / h ** 2
    up[0] = 2.0 * n / h ** 2
    return lo, main, up


def build_laplacian_radial(grid, n_dim=None, ell=0):
    """Radial Laplacian u'' + (n-1)u'/r in angular sector ``ell``.

    Regular at the origin (u'(0) = 0 for even sectors, odd reflection for
    ``ell = 1`` when n = 1), Dirichlet at r_max. Self-adjoint with respect to
    ``grid.weights``.
    """
    if n_dim is not None and n_dim != grid.n_dim:
        raise ConfigurationError(f"n_dim={n_dim} does not match grid.n_dim={grid.n_dim}")
    lo, main, up = _radial_rows(grid, ell)
    A = sp.diags([lo, main, up], [-1, 0, 1], format="csr")
    return DiscreteOperator(A, grid, 1, "regularity-at-origin", hermitian=True,
                            weights=grid.weights)


_FD2_COEFFS = {2: np.array([1.0, -2.0, 1.0]),
               4: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0}


def build_laplacian_1d(grid, order=2):
    """Second derivative on a :class:`Grid1D`.

    Dirichlet grids treat values beyond the last node as zero; periodic grids
    wrap around. ``order`` selects the 3- or 5-point stencil.
    """
    if order not in _FD2_COEFFS:
        raise ConfigurationError("stencil order must be 2 or 4")
    c = _FD2_COEFFS[order] / grid.spacing ** 2
    N = grid.num_points
    half = len(c) // 2
    offsets = list(range(-half, half + 1))
    if grid.periodic:
        diags, offs = [], []
        for o, ci in zip(offsets, c):
            diags.append(np.full(N, ci))
            offs.append(o)
            if o != 0:
                diags.append(np.full(N, ci))
                offs.append(o - N if o > 0 else o + N)
        A = sp.diags(diags, offs, shape=(N, N), format="csr")
        bc = "periodic"
    else:
        A = sp.diags([np.full(N - abs(o), ci) for o, ci in zip(offsets, c)],
                     offsets, format="csr")
        bc = "dirichlet"
    return DiscreteOperator(A, grid, 1, bc, hermitian=True)


def fourier_derivative(grid):
    """Dense spectral first-derivative matrix on a periodic :class:`Grid1D`.

    Real and antisymmetric; exact for trigonometric polynomials of degree
    below N/2 (the Nyquist mode is mapped to zero).
    """
    if not grid.periodic:
        raise ConfigurationError("spectral differentiation needs a periodic grid")
    N = grid.num_points
    k = np.arange(N)
    d = k[:, None] - k[None, :]
    with np.errstate(divide="ignore"):
        t = np.pi * d / N
        D = 0.5 * (-1.0) ** d / np.tan(t)
    D[d == 0] = 0.0
    # map [0, 2pi) onto [-L, L)
    return D * (np.pi / grid.x_max)


def fourier_second_derivative(grid):
    """Dense spectral second-derivative matrix on a periodic grid."""
    if not grid.periodic:
        raise ConfigurationError("spectral differentiation needs a periodic grid")
    N = grid.num_points
    h = 2 * np.pi / N
    k = np.arange(N)
    d = k[:, None] - k[None, :]
    with np.errstate(divide="ignore"):
        D2 = -0.5 * (-1.0) ** d / np.sin(d * h / 2) ** 2
    D2[d == 0] = -np.pi ** 2 / (3 * h ** 2) - 1.0 / 6.0
    return D2 * (np.pi / grid.x_max) ** 2


# ---------------------------------------------------------------------------
# eigensolves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenRequest:
    shift: complex
    count: int = 1
    tol: float = 1e-8
    max_iter: int = 5000

    def __post_init__(self):
        if self.count < 1:
            raise ConfigurationError("count must be >= 1")
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive")


@dataclass(frozen=True)
class EigenPair:
    value: complex
    vector: np.ndarray = field(repr=False)
    residual: float


@dataclass(frozen=True)
class EigenResult:
    pairs: tuple

    @property
    def values(self):
        return np.array([p.value for p in self.pairs])

    @property
    def vectors(self):
        return np.column_stack([p.vector for p in self.pairs])

    @property
    def residuals(self):
        return np.array([p.residual for p in self.pairs])


def residual(A, lam, v):
    r = A @ v - lam * v
    return float(np.linalg.norm(r) / np.linalg.norm(v))


def _sort_key(shift):
    return lambda lv: (round(abs(lv[0] - shift), 12), lv[0].real, lv[0].imag)


def eigs_near(op, req):
    """The ``req.count`` eigenpairs closest to ``req.shift``.

    Accepts a :class:`DiscreteOperator` or a bare matrix. Small problems are
    solved densely; larger ones by shift-invert Arnoldi (Lanczos for
    Hermitian input) started from the normalised all-ones vector, so results
    are reproducible. Every returned pair is re-checked by a direct
    matrix-vector product.
    """
    if isinstance(op, DiscreteOperator):
        A, herm, scale = op.matrix, op.hermitian, op._node_scale()
    else:
        A, herm, scale = op, False, None
    n = A.shape[0]
    shift = complex(req.shift)
    count = min(req.count, n)
    herm_solve = herm and shift.imag == 0.0

    if herm_solve:
        S = op.symmetric_matrix()
    if n <= DENSE_LIMIT or count >= n - 2:
        M = S if herm_solve else A
        M = M.toarray() if sp.issparse(M) else np.asarray(M)
        if herm_solve:
            vals, vecs = la.eigh(M)
        else:
            vals, vecs = la.eig(M)
    else:
        v0 = np.ones(n) / np.sqrt(n)
        try:
            if herm_solve:
                vals, vecs = spla.eigsh(S, k=count, sigma=shift.real, which="LM",
                                        v0=v0, maxiter=req.max_iter)
            else:
                M = A.astype(complex) if shift.imag != 0.0 or np.iscomplexobj(A) else A
                sigma = shift if np.iscomplexobj(M) else shift.real
                vals, vecs = spla.eigs(M, k=count, sigma=sigma, which="LM",
                                       v0=v0.astype(M.dtype), maxiter=req.max_iter)
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError("shift-invert Arnoldi did not converge",
                                   best_values=getattr(exc, "eigenvalues", None)) from exc

    if herm_solve and scale is not None:
        vecs = vecs / scale[:, None]
    order = sorted(zip(vals, range(len(vals))), key=_sort_key(shift))[:count]
    pairs = []
    for lam, j in order:
        v = vecs[:, j]
        v = v / np.linalg.norm(v)
        if herm_solve:
            lam = float(np.real(lam))
        res = residual(A, lam, v)
        if res > req.tol:
            lam, v, res = _polish(A, lam, v)
        if res > req.tol:
            raise ConvergenceError(
                f"eigenpair near {lam:.6g} has residual {res:.3e} > tol {req.tol:.1e}",
                best_residual=res)
        pairs.append(EigenPair(lam, v, res))
    return EigenResult(tuple(pairs))


def _polish(A, lam, v, steps=2):
    """Inverse iteration at a fixed shift next to ``lam``."""
    n = A.shape[0]
    sigma = lam + 1e-10 * max(1.0, abs(lam))
    if sp.issparse(A):
        lu = spla.splu((A - sigma * sp.identity(n, format="csc")).astype(complex).tocsc())
        solve = lu.solve
    else:
        fac = la.lu_factor(np.asarray(A, dtype=complex) - sigma * np.eye(n))
        solve = lambda b: la.lu_solve(fac, b)
    w = v.astype(complex)
    for _ in range(steps):
        w = solve(w)
        w /= np.linalg.norm(w)
    lam = complex(np.vdot(w, A @ w))
    if np.isrealobj(A) and abs(lam.imag) < 1e-14 * max(1.0, abs(lam)):
        lam = lam.real
    return lam, w, residual(A, lam, w)


# ---------------------------------------------------------------------------
# block algebra
# ---------------------------------------------------------------------------

def _as_dense(M):
    if isinstance(M, DiscreteOperator):
        M = M.matrix
    return M.toarray() if sp.issparse(M) else np.atleast_2d(np.asarray(M))


def split_blocks(M, n1):
    """Cut a square matrix into a 2x2 block tuple after row/column ``n1``."""
    M = _as_dense(M)
    return ((M[:n1, :n1], M[:n1, n1:]), (M[n1:, :n1], M[n1:, n1:]))


def schur_complement(blocks, which="of-11", cond_cap=1e12):
    """Schur complement of a 2x2 block operator.

    ``which="of-11"`` eliminates the (1,1) block and returns
    T22 - T21 T11^{-1} T12; ``"of-22"`` returns T11 - T12 T22^{-1} T21.
    """
    (A11, A12), (A21, A22) = [[_as_dense(b) for b in row] for row in blocks]
    if which == "of-11":
        P, Q, R, S = A11, A12, A21, A22
    elif which == "of-22":
        P, Q, R, S = A22, A21, A12, A11
    else:
        raise ConfigurationError(f"which must be 'of-11' or 'of-22', got {which!r}")
    cond = np.linalg.cond(P)
    if not np.isfinite(cond) or cond > cond_cap:
        raise SingularBlock(f"eliminated block is singular (condition {cond:.3e})",
                            condition=cond)
    return S - R @ la.solve(P, Q)


def block_ldu(blocks):
    """Factors (L, D, U) with T = L D U and D = diag(T11, S) (S the Schur complement of T11)."""
    (A11, A12), (A21, A22) = [[_as_dense(b) for b in row] for row in blocks]
    n1, n2 = A11.shape[0], A22.shape[0]
    S = schur_complement(blocks, "of-11")
    dtype = np.result_type(A11, A12, A21, A22)
    Z12, Z21 = np.zeros((n1, n2), dtype), np.zeros((n2, n1), dtype)
    L = np.block([[np.eye(n1), Z12], [A21 @ la.inv(A11), np.eye(n2)]])
    D = np.block([[A11, Z12], [Z21, S]])
    U = np.block([[np.eye(n1), la.solve(A11, A12)], [Z21, np.eye(n2)]])
    return L, D, U


# ---------------------------------------------------------------------------
# contour quadrature
# ---------------------------------------------------------------------------

def circle_nodes(center, radius, count):
    """Trapezoid nodes and weights for (1/2 pi i) times a contour integral over a circle."""
    theta = 2 * np.pi * (np.arange(count) + 0.5) / count
    z = center + radius * np.exp(1j * theta)
    # dz / (2 pi i) = radius e^{i theta} d theta / (2 pi)
    w = radius * np.exp(1j * theta) / count
    return z, w


def riesz_projector(A, center, radius, nodes=64, probe=None):
    """Riesz projector onto the spectral subspace of ``A`` inside a circle.

    Returns P (dense) when ``probe`` is None, otherwise P @ probe. P is
    (1/2 pi i) times the contour integral of (eta - A)^{-1}, evaluated with
    the trapezoid rule.
    """
    A = _as_dense(A) if not sp.issparse(A) else A
    n = A.shape[0]
    X = np.eye(n, dtype=complex) if probe is None else np.asarray(probe, dtype=complex)
    out = np.zeros_like(X)
    for eta, w in zip(*circle_nodes(center, radius, nodes)):
        if sp.issparse(A):
            M = (eta * sp.identity(n, format="csc") - A).astype(complex).tocsc()
            out += w * spla.splu(M).solve(X)
        else:
            out += w * la.solve(eta * np.eye(n) - A, X)
    return out


def numerical_rank(M, rel_tol=1e-6):
    s = la.svdvals(M)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def richardson(fine, coarse, order):
    """Two-grid Richardson extrapolation for a quantity converging like h^order."""
    return fine + (fine - coarse) / (2.0 ** order - 1.0)


def observed_order(q_h, q_h2, q_h4):
    """Convergence order from three successive halvings of the spacing."""
    return float(np.log2(abs(q_h - q_h2) / abs(q_h2 - q_h4)))
