"""Ground state of the stationary NLS equation

    u'' + (n-1) u'/r - u + 2 m u^(2k+1) = 0,   u'(0) = 0,   u > 0 decaying,

obtained by shooting on u(0), and the nonrelativistic limit profiles built
from it.

The shooting is done at m = 1; a general mass only rescales the amplitude,
u_m = m^(-1/(2k)) u_1.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.special import kv

from .errors import BracketError, DomainError, FitError, SolverError
from .numerics import Grid1D, RadialGrid, sphere_area

DEFAULT_R_MAX = 40.0
DEFAULT_POINTS = 4001


def check_exponent(n, k):
    if not k > 0:
        raise DomainError(f"nonlinearity exponent must be positive, got k={k}")
    if n >= 3 and not k < 2.0 / (n - 2):
        raise DomainError(
            f"no ground state for n={n}, k={k}: need k < 2/(n-2) = {2.0 / (n - 2):.4g}")


# ---------------------------------------------------------------------------
# shooting
# ---------------------------------------------------------------------------

def _rhs(n, k):
    def f(r, y):
        u, p = y
        return [p, -(n - 1) / r * p + u - 2.0 * np.abs(u) ** (2 * k) * u]
    return f


def _crossing(r, y):
    return y[0]


_crossing.terminal = True


def _turning(r, y):
    return y[1]


_turning.terminal = True
_turning.direction = 1

R_START = 1e-6


def _shoot(a, n, k, r_end, dense=False, rtol=1e-12, atol=1e-14):
    u2 = (a - 2.0 * a ** (2 * k + 1)) / n
    y0 = [a + 0.5 * u2 * R_START ** 2, u2 * R_START]
    return solve_ivp(_rhs(n, k), (R_START, r_end), y0, method="DOP853",
                     rtol=rtol, atol=atol, events=[_crossing, _turning],
                     dense_output=dense)


def _overshoots(sol):
    """True if the trajectory crossed zero, i.e. u(0) was too large."""
    if sol.t_events[0].size:
        return True
    if sol.t_events[1].size:
        return False
    return sol.y[0, -1] < 0


def _bracket(n, k, r_end, scan):
    lo, log = None, []
    for a in scan:
        over = _overshoots(_shoot(a, n, k, r_end))
        log.append((float(a), "over" if over else "under"))
        if over and lo is not None:
            return lo, a, log
        if not over:
            lo = a
    raise BracketError(f"no shooting bracket for n={n}, k={k}", scan_log=log)


def _bessel_tail(n):
    """Decaying radial solution r^(-nu) K_nu(r) of the linearised far field, and its slope."""
    nu = (n - 2) / 2.0

    def g(r):
        return r ** (-nu) * kv(nu, r)

    def dg(r):
        return -(r ** (-nu)) * kv(nu + 1, r)

    return g, dg


class RadialProfile:
    """Continuous ground-state profile: the shooting solution on the core
    [0, r_match], continued outward by the decaying solution of the full
    equation integrated inward from the far field (where it is the
    modified-Bessel tail), with its amplitude fixed by continuity at r_match."""

    def __init__(self, sol, a, n, k, r_match, r_far, amplitude=1.0):
        self.sol, self.a, self.n, self.k = sol, a, n, k
        self.r_match, self.r_far = r_match, r_far
        self.amplitude = amplitude
        self.u2 = (a - 2.0 * a ** (2 * k + 1)) / n
        g, dg = _bessel_tail(n)
        self._g, self._dg = g, dg
        target = float(sol.sol(r_match)[0])
        c = target / g(r_match)
        for _ in range(4):
            inward = solve_ivp(_rhs(n, k), (r_far, r_match), [c * g(r_far), c * dg(r_far)],
                               method="DOP853", rtol=1e-12, atol=1e-300,
                               dense_output=True)
            c *= target / inward.y[0, -1]
        self._inward = solve_ivp(_rhs(n, k), (r_far, r_match),
                                 [c * g(r_far), c * dg(r_far)], method="DOP853",
                                 rtol=1e-12, atol=1e-300, dense_output=True)
        self._c_tail = c

    def _eval(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        u = np.empty_like(r)
        p = np.empty_like(r)
        core = r < R_START
        mid = (~core) & (r <= self.r_match)
        tail = (r > self.r_match) & (r <= self.r_far)
        far = r > self.r_far
        u[core] = self.a + 0.5 * self.u2 * r[core] ** 2
        p[core] = self.u2 * r[core]
        if mid.any():
            y = self.sol.sol(r[mid])
            u[mid], p[mid] = y[0], y[1]
        if tail.any():
            y = self._inward.sol(r[tail])
            u[tail], p[tail] = y[0], y[1]
        if far.any():
            u[far] = self._c_tail * self._g(r[far])
            p[far] = self._c_tail * self._dg(r[far])
        return u * self.amplitude, p * self.amplitude

    def __call__(self, r):
        return self._eval(r)[0]

    def derivative(self, r):
        return self._eval(r)[1]

    def second_derivative(self, r, step=1e-3):
        """Five-point difference of the derivative (odd extension through 0)."""
        r = np.asarray(r, dtype=float)

        def p(s):
            return np.sign(s) * self.derivative(np.abs(s))

        return (-p(r + 2 * step) + 8 * p(r + step) - 8 * p(r - step)
                + p(r - 2 * step)) / (12 * step)

    def scaled(self, amplitude):
        out = RadialProfile.__new__(RadialProfile)
        out.__dict__.update(self.__dict__)
        out.amplitude = amplitude
        return out


def _shoot_profile(n, k, r_end=DEFAULT_R_MAX, agree=1e-7):
    scan = np.geomspace(1e-3, 1e3, 121)
    lo, hi, _ = _bracket(n, k, r_end, scan)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _overshoots(_shoot(mid, n, k, r_end)):
            hi = mid
        else:
            lo = mid
    s_lo = _shoot(lo, n, k, r_end, dense=True)
    s_hi = _shoot(hi, n, k, r_end, dense=True)
    # trust the core only where the two bracketing trajectories agree
    t_stop = min(s_lo.t[-1], s_hi.t[-1])
    rr = np.linspace(R_START, t_stop, 4000)
    ulo, uhi = s_lo.sol(rr)[0], s_hi.sol(rr)[0]
    bad = np.nonzero(np.abs(ulo - uhi) > agree * np.abs(0.5 * (ulo + uhi)))[0]
    r_sep = rr[bad[0]] if bad.size else t_stop
    r_match = 0.8 * r_sep
    if r_match < 2.0:
        raise SolverError(f"shooting for n={n}, k={k} lost precision at r={r_sep:.3g}")
    return RadialProfile(s_lo, lo, n, k, r_match, r_far=max(r_end, 2 * r_match))


# ---------------------------------------------------------------------------
# public types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    c_lo: float
    c_hi: float
    exponent: float
    rate: float


@dataclass(frozen=True)
class GroundState:
    n: int
    k: float
    m: float
    grid: RadialGrid
    values: np.ndarray = field(repr=False)
    peak: float
    decay_fit: DecayFit = None
    residual: float = 0.0
    profile: RadialProfile = field(default=None, repr=False, compare=False)

    def __call__(self, r):
        return self.profile(r)

    def derivative(self, r):
        return self.profile.derivative(r)

    def ode_residual(self, r):
        r = np.asarray(r, dtype=float)
        u = self.profile(r)
        up = self.profile.derivative(r)
        upp = self.profile.second_derivative(r)
        return upp + (self.n - 1) / r * up - u + 2 * self.m * u ** (2 * self.k + 1)


def solve_ground_state(n, k, m=1.0, grid=None, tol=1e-8):
    """Shoot for the positive, radially decreasing ground state.

    Parameters
    ----------
    n : int
        Spatial dimension.
    k : float
        Nonlinearity exponent; must satisfy k < 2/(n-2) when n >= 3.
    m : float
        Mass; enters only through the amplitude.
    grid : RadialGrid, optional
        Sampling grid; defaults to a uniform grid on [0, 40].
    tol : float
        Bound on the ODE residual at interior nodes.
    """
    check_exponent(n, k)
    if not m > 0:
        raise DomainError(f"mass must be positive, got m={m}")
    if grid is None:
        grid = RadialGrid(n, DEFAULT_R_MAX, DEFAULT_POINTS, "uniform")
    if grid.n_dim != n:
        raise DomainError("grid dimension differs from n")
    prof = _shoot_profile(n, k, r_end=max(DEFAULT_R_MAX, 0.5 * grid.r_max))
    prof = prof.scaled(m ** (-1.0 / (2 * k)))
    values = prof(grid.nodes)
    if np.any(values <= 0):
        raise SolverError("ground state is not positive on the grid")
    if np.any(np.diff(values) >= 0):
        raise SolverError("ground state is not strictly decreasing on the grid")
    gs = GroundState(n, k, m, grid, values, float(prof(0.0)), profile=prof)
    r = grid.nodes
    interior = r[(r > 5e-2) & (r < min(grid.r_max, 30.0) - 1e-2)]
    res = float(np.max(np.abs(gs.ode_residual(interior))))
    if res > tol:
        raise SolverError(f"ground-state ODE residual {res:.2e} exceeds tol {tol:.1e}")
    try:
        fit = check_decay(gs)
    except FitError:
        fit = None
    return GroundState(n, k, m, grid, values, gs.peak, fit, res, prof)


def check_decay(gs):
    """Fit log u = c - rate r + exponent log<r> over the tail window
    [0.5 r_max, 0.9 r_max], and envelope constants for
    u(r) e^r <r>^((n-1)/2)."""
    r = gs.grid.nodes
    window = (r >= 0.5 * gs.grid.r_max) & (r <= 0.9 * gs.grid.r_max)
    u = gs.values
    if window.sum() < 10 or np.any(u[window] <= 1e-300):
        raise FitError("tail window is under-resolved")
    if np.max(u[window]) > 1e-3 * gs.peak:
        raise FitError("tail window is not in the decay regime; increase r_max")
    rw = r[window]
    jap = np.sqrt(1.0 + rw ** 2)
    A = np.column_stack([np.ones_like(rw), rw, np.log(jap)])
    coef, *_ = np.linalg.lstsq(A, np.log(u[window]), rcond=None)
    envelope = u * np.exp(r) * (1.0 + r ** 2) ** ((gs.n - 1) / 4.0)
    return DecayFit(float(envelope.min()), float(envelope.max()),
                    float(coef[2]), float(-coef[1]))


def nls_charge(gs):
    """||u||^2 over R^n: Simpson rule on the grid samples with measure r^(n-1)."""
    r, u = gs.grid.nodes, gs.values
    if r[0] > 0:
        r = np.concatenate([[0.0], r])
        u = np.concatenate([[gs.peak], u])
    return float(sphere_area(gs.n) * simpson(u ** 2 * r ** (gs.n - 1), x=r))


# ---------------------------------------------------------------------------
# nonrelativistic limit profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitProfiles:
    """V_hat(t) = u(|t|) (even) and U_hat = -V_hat'/(2m) (odd) on a symmetric grid."""

    grid: Grid1D
    V_hat: np.ndarray = field(repr=False)
    U_hat: np.ndarray = field(repr=False)
    gamma: float
    residuals: tuple
    gs: GroundState = field(repr=False, compare=False)

    def V(self, t):
        return self.gs(np.abs(t))

    def U(self, t):
        t = np.asarray(t, dtype=float)
        return -np.sign(t) * self.gs.derivative(np.abs(t)) / (2 * self.gs.m)


def limit_profiles(gs, grid=None, gamma=0.5):
    """Sample (V_hat, U_hat) and the residuals of

        V_hat' + 2m U_hat = 0,
        U_hat' + (n-1) U_hat / t = V_hat^(2k+1) - V_hat / (2m).
    """
    if grid is None:
        grid = Grid1D(min(gs.grid.r_max, 30.0), 3001)
    t = grid.nodes
    m, n, k = gs.m, gs.n, gs.k
    V = gs(np.abs(t))
    dV = np.sign(t) * gs.derivative(np.abs(t))
    U = -dV / (2 * m)
    d2V = gs.profile.second_derivative(np.abs(t))
    dU = -d2V / (2 * m)
    with np.errstate(divide="ignore", invalid="ignore"):
        drift = np.where(t != 0, (n - 1) * U / np.where(t == 0, 1.0, t), (n - 1) * dU)
    res1 = float(np.max(np.abs(dV + 2 * m * U)))
    res2 = float(np.max(np.abs(dU + drift - V ** (2 * k + 1) + V / (2 * m))))
    return LimitProfiles(grid, V, U, gamma, (res1, res2), gs)


def closed_form_1d(k, x, m=1.0):
    """Explicit n = 1 ground state ((1+k)/2)^(1/(2k)) sech^(1/k)(k x) m^(-1/(2k))."""
    return (m ** (-1.0 / (2 * k)) * ((1 + k) / 2.0) ** (1.0 / (2 * k))
            / np.cosh(k * np.asarray(x, dtype=float)) ** (1.0 / k))
