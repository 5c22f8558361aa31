"""Solitary waves of the Soler model in the nonrelativistic regime.

With the Ansatz phi(x) = [v(r) xi, i u(r) (x/r).sigma xi] the stationary
equation omega phi = D_m phi - f(phi* beta phi) beta phi reduces to

    v' = -(m + omega - f) u,
    u' + (n-1) u / r = -(m - omega - f) v,          f = f(v^2 - u^2).

It is solved in the variables t = eps r, v = eps^(1/k) V, u = eps^(1+1/k) U,
eps = sqrt(m^2 - omega^2), where

    V' = -(m + omega - eps^2 F) U,
    U' + (n-1) U / t = -(1/(m + omega) - F) V,      F = f / eps^2,

and F = (V^2 - eps^2 U^2)^k + c eps^(2K/k - 2) (V^2 - eps^2 U^2)^K for the
family f(tau) = |tau|^k + c |tau|^K. As eps -> 0 this becomes the system
satisfied by (V_hat, U_hat), so the shooting parameter V(0) stays of order
one along the whole branch.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.special import kv

from .errors import (BracketError, BranchError, DomainError, GridError,
                     InputError, SolverError, Unsupported)
from .ground_state import check_exponent, solve_ground_state
from .numerics import Grid1D, RadialGrid, sphere_area

T_MAX = 30.0
T_START = 1e-6


def spinor_dimension(n):
    return 2 ** ((n + 1) // 2)


@dataclass(frozen=True)
class Nonlinearity:
    """f(tau) = |tau|^k + c |tau|^K; ``K=None`` (or c = 0) is the pure power."""

    k: float
    K: float = None
    c: float = 0.0

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError(f"k must be positive, got {self.k}")
        if self.c != 0.0 and (self.K is None or not self.K > self.k):
            raise DomainError("the correction exponent K must exceed k")

    @property
    def pure(self):
        return self.c == 0.0 or self.K is None

    def __call__(self, tau):
        a = np.abs(tau)
        out = a ** self.k
        if not self.pure:
            out = out + self.c * a ** self.K
        return out

    def derivative(self, tau):
        a = np.abs(tau)
        s = np.sign(tau)
        out = self.k * a ** (self.k - 1)
        if not self.pure:
            out = out + self.c * self.K * a ** (self.K - 1)
        return s * out

    @property
    def varkappa(self):
        """min(1, K/k - 1); 1 for the pure power."""
        if self.pure:
            return 1.0
        return min(1.0, self.K / self.k - 1.0)

    def rescaled(self, V, U, eps):
        """f(v^2 - u^2) / eps^2 in rescaled variables."""
        s = V * V - eps * eps * U * U
        a = np.abs(s)
        out = a ** self.k
        if not self.pure:
            out = out + self.c * eps ** (2 * self.K / self.k - 2) * a ** self.K
        return out


def _rhs(n, m, omega, eps, nonlin):
    mp = m + omega

    def f(t, y):
        V, U = y
        F = nonlin.rescaled(V, U, eps)
        return [-(mp - eps * eps * F) * U, -(n - 1) / t * U - (1.0 / mp - F) * V]
    return f


def _crossing(t, y):
    return y[0]


_crossing.terminal = True


def _turning(t, y):
    return y[1]


_turning.terminal = True
_turning.direction = -1


def _initial(a, n, m, omega, eps, nonlin):
    F0 = nonlin.rescaled(a, 0.0, eps)
    U1 = -(1.0 / (m + omega) - F0) * a / n
    V2 = -(m + omega - eps * eps * F0) * U1
    return [a + 0.5 * V2 * T_START ** 2, U1 * T_START]


def _shoot(a, n, m, omega, eps, nonlin, t_end, dense=False):
    return solve_ivp(_rhs(n, m, omega, eps, nonlin), (T_START, t_end),
                     _initial(a, n, m, omega, eps, nonlin), method="DOP853",
                     rtol=1e-12, atol=1e-14, events=[_crossing, _turning],
                     dense_output=dense)


def _overshoots(sol):
    if sol.t_events[0].size:
        return True
    if sol.t_events[1].size:
        return False
    return sol.y[0, -1] < 0


class RescaledProfile:
    """Continuous (V, U)(t): shooting core plus a tail integrated inward from
    the linear far field V ~ t^(-nu) K_nu(t), nu = (n-2)/2."""

    def __init__(self, core, n, m, omega, eps, nonlin, t_match, t_far):
        self.n, self.m, self.omega, self.eps, self.nonlin = n, m, omega, eps, nonlin
        self.core, self.t_match = core, t_match
        self.a = float(core.sol(T_START)[0])
        nu = (n - 2) / 2.0
        mp = m + omega
        g = lambda t: t ** (-nu) * kv(nu, t)
        h = lambda t: t ** (-nu) * kv(nu + 1, t) / mp
        target = float(core.sol(t_match)[0])
        rhs = _rhs(n, m, omega, eps, nonlin)
        c = target / g(t_match)
        for _ in range(5):
            inward = solve_ivp(rhs, (t_far, t_match), [c * g(t_far), c * h(t_far)],
                               method="DOP853", rtol=1e-12, atol=1e-300,
                               dense_output=True)
            c *= target / inward.y[0, -1]
        self.tail = inward
        self.t_far, self._c, self._g, self._h = t_far, c, g, h

    def __call__(self, t):
        """(V, U) at |t|; U returned for t >= 0 (it is odd in t)."""
        t = np.abs(np.atleast_1d(np.asarray(t, dtype=float)))
        V = np.empty_like(t)
        U = np.empty_like(t)
        near = t < T_START
        core = (t >= T_START) & (t <= self.t_match)
        mid = (t > self.t_match) & (t <= self.t_far)
        far = t > self.t_far
        if near.any():
            y0 = _initial(self.a, self.n, self.m, self.omega, self.eps, self.nonlin)
            V[near] = self.a
            U[near] = y0[1] * t[near] / T_START
        if core.any():
            V[core], U[core] = self.core.sol(t[core])
        if mid.any():
            V[mid], U[mid] = self.tail.sol(t[mid])
        if far.any():
            V[far] = self._c * self._g(t[far])
            U[far] = self._c * self._h(t[far])
        return V, U

    def derivatives(self, t):
        """(V', U') at t >= 0 from the ODE itself."""
        t = np.asarray(t, dtype=float)
        V, U = self(t)
        F = self.nonlin.rescaled(V, U, self.eps)
        mp = self.m + self.omega
        dV = -(mp - self.eps ** 2 * F) * U
        with np.errstate(divide="ignore", invalid="ignore"):
            drift = np.where(t > 0, (self.n - 1) * U / np.where(t > 0, t, 1.0), 0.0)
        dU = -drift - (1.0 / mp - F) * V
        if np.any(t == 0):
            dU = np.where(t == 0, -(1.0 / mp - F) * V / self.n, dU)
        return dV, dU


def _shoot_rescaled(n, m, omega, eps, nonlin, guess, t_end=40.0, agree=1e-7):
    scan = guess * np.geomspace(0.2, 5.0, 61)
    lo = hi = None
    log = []
    for a in scan:
        over = _overshoots(_shoot(a, n, m, omega, eps, nonlin, t_end))
        log.append((float(a), "over" if over else "under"))
        if over and lo is not None:
            hi = a
            break
        if not over:
            lo = a
    if hi is None:
        raise BracketError(f"no shooting bracket for omega={omega}", scan_log=log)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _overshoots(_shoot(mid, n, m, omega, eps, nonlin, t_end)):
            hi = mid
        else:
            lo = mid
    s_lo = _shoot(lo, n, m, omega, eps, nonlin, t_end, dense=True)
    s_hi = _shoot(hi, n, m, omega, eps, nonlin, t_end, dense=True)
    t_stop = min(s_lo.t[-1], s_hi.t[-1])
    tt = np.linspace(T_START, t_stop, 4000)
    vlo, vhi = s_lo.sol(tt)[0], s_hi.sol(tt)[0]
    bad = np.nonzero(np.abs(vlo - vhi) > agree * np.abs(0.5 * (vlo + vhi)))[0]
    t_sep = tt[bad[0]] if bad.size else t_stop
    if t_sep < 2.5:
        raise SolverError(f"shooting lost precision at t={t_sep:.3g} (omega={omega})")
    return RescaledProfile(s_lo, n, m, omega, eps, nonlin, 0.8 * t_sep, max(t_end, 1.6 * t_sep))


@dataclass(frozen=True)
class SolitonProfile:
    omega: float
    m: float
    epsilon: float
    nonlin: Nonlinearity
    n: int
    N: int
    grid: RadialGrid
    v: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    varkappa: float
    residual: float = 0.0
    rescaled: RescaledProfile = field(default=None, repr=False, compare=False)

    def __call__(self, r):
        """(v, u) at radius r (u odd-extended for negative r)."""
        r = np.asarray(r, dtype=float)
        V, U = self.rescaled(self.epsilon * r)
        e = self.epsilon
        s = np.where(r < 0, -1.0, 1.0)
        return e ** (1 / self.nonlin.k) * V, s * e ** (1 + 1 / self.nonlin.k) * U

    def derivatives(self, r):
        r = np.asarray(r, dtype=float)
        e, k = self.epsilon, self.nonlin.k
        dV, dU = self.rescaled.derivatives(e * np.abs(r))
        return e ** (1 / k + 1) * dV * np.where(r < 0, -1.0, 1.0), e ** (2 + 1 / k) * dU

    def system_residual(self, r):
        """Residual of the radial system at r > 0, using centered differences
        of the continuous profile (independent of the ODE right-hand side)."""
        r = np.asarray(r, dtype=float)
        h = 1e-3 * np.maximum(r, 1.0)
        (vp, up), (vm, um) = self(r + h), self(r - h)
        (vp2, up2), (vm2, um2) = self(r + 2 * h), self(r - 2 * h)
        dv = (8 * (vp - vm) - (vp2 - vm2)) / (12 * h)
        du = (8 * (up - um) - (up2 - um2)) / (12 * h)
        v, u = self(r)
        f = self.nonlin(v * v - u * u)
        m, w, n = self.m, self.omega, self.n
        r1 = dv + (m + w - f) * u
        r2 = du + (n - 1) * u / r + (m - w - f) * v
        return np.maximum(np.abs(r1), np.abs(r2))


def default_radial_grid(n, eps, t_max=T_MAX, num_points=3001):
    return RadialGrid(n, t_max / eps, num_points, "uniform")


def solve_soliton(n, nonlin, m=1.0, omega=None, grid=None, tol=1e-8):
    """Solitary wave (v, u) at frequency omega by shooting on V(0) = eps^(-1/k) v(0).

    Parameters
    ----------
    n : int
        Spatial dimension.
    nonlin : Nonlinearity
    m : float
        Mass.
    omega : float
        Frequency in (m/2, m).
    grid : RadialGrid, optional
        Sampling grid in r; defaults to t = eps r in [0, 30].
    tol : float
        Bound on the residual of the radial system, relative to sup |v| eps.
    """
    check_exponent(n, nonlin.k)
    if not m > 0:
        raise DomainError("mass must be positive")
    if omega is None or not (0.5 * m < omega < m):
        raise DomainError(f"omega must lie in (m/2, m), got {omega}")
    eps = float(np.sqrt(m * m - omega * omega))
    gs = _nls_guess(n, nonlin.k, m)
    core = _shoot_rescaled(n, m, omega, eps, nonlin, gs)
    if grid is None:
        grid = default_radial_grid(n, eps)
    r = grid.nodes
    e, k = eps, nonlin.k
    V, U = core(e * r)
    v, u = e ** (1 / k) * V, e ** (1 + 1 / k) * U
    if abs(u[0]) > 1e-12 * np.max(np.abs(v)) and r[0] == 0:
        raise SolverError("u(0) does not vanish")
    if np.any(v * v < 3 * u * u):
        raise BranchError(f"omega={omega} is outside the small-amplitude branch: "
                          "v^2 >= 3 u^2 fails", omega=omega)
    prof = SolitonProfile(omega, m, eps, nonlin, n, spinor_dimension(n), grid, v, u,
                          nonlin.varkappa, 0.0, core)
    probe = r[(r > 0.05 / e) & (r < 25.0 / e)]
    probe = probe[:: max(1, probe.size // 400)]
    res = float(np.max(prof.system_residual(probe)) / (e * np.max(np.abs(v))))
    if res > tol:
        raise SolverError(f"radial-system residual {res:.2e} exceeds tol {tol:.1e}")
    return SolitonProfile(omega, m, eps, nonlin, n, spinor_dimension(n), grid, v, u,
                          nonlin.varkappa, res, core)


_GUESS = {}


def _nls_guess(n, k, m):
    key = (n, k, m)
    if key not in _GUESS:
        _GUESS[key] = float(solve_ground_state(n, k, m).peak)
    return _GUESS[key]


# ---------------------------------------------------------------------------
# rescaling, charge, VK
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RescaledProfiles:
    t: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    U: np.ndarray = field(repr=False)
    V_tilde: np.ndarray = field(repr=False)
    U_tilde: np.ndarray = field(repr=False)
    gamma: float
    weighted_norm: float
    sup_distance: float


def rescaled_profiles(profile, gs=None, gamma=0.5, t_max=T_MAX, num_points=6001):
    """V, U on a symmetric t-grid, their differences from (V_hat, U_hat), and
    the H^1 norm of e^(gamma <t>) (V_tilde, U_tilde)."""
    if not 0 < gamma < 1:
        raise InputError("gamma must lie in (0, 1)")
    if gs is None:
        gs = solve_ground_state(profile.n, profile.nonlin.k, profile.m)
    if (gs.n, gs.k, gs.m) != (profile.n, profile.nonlin.k, profile.m):
        raise GridError("ground state and solitary wave have different (n, k, m)")
    grid = Grid1D(t_max, num_points)
    t = grid.nodes
    a = np.abs(t)
    s = np.sign(t)
    V, U = profile.rescaled(a)
    dV, dU = profile.rescaled.derivatives(a)
    U, dV = s * U, s * dV
    m = profile.m
    Vh = gs(a)
    dVh = s * gs.derivative(a)
    Uh = -dVh / (2 * m)
    dUh = -gs.profile.second_derivative(a) / (2 * m)
    Vt, Ut = V - Vh, U - Uh
    dVt, dUt = dV - dVh, dU - dUh
    jap = np.sqrt(1 + t * t)
    wgt = np.exp(gamma * jap)
    dw = gamma * t / jap
    parts = [wgt * Vt, wgt * Ut, wgt * (dVt + dw * Vt), wgt * (dUt + dw * Ut)]
    norm = float(np.sqrt(sum(simpson(p * p, x=t) for p in parts)))
    sup = float(max(np.max(np.abs(Vt)), np.max(np.abs(Ut))))
    return RescaledProfiles(t, V, U, Vt, Ut, gamma, norm, sup)


def charge(profile, t_max=T_MAX, num_points=6001):
    """Q = |S^(n-1)| int (v^2 + u^2) r^(n-1) dr, computed in t = eps r."""
    e, k, n = profile.epsilon, profile.nonlin.k, profile.n
    t = np.linspace(0.0, t_max, num_points)
    V, U = profile.rescaled(t)
    integral = simpson((V * V + e * e * U * U) * t ** (n - 1), x=t)
    return float(sphere_area(n) * e ** (2 / k - n) * integral)


@dataclass(frozen=True)
class ChargeCurve:
    omegas: np.ndarray
    Q: np.ndarray
    dQ_domega: np.ndarray
    sign_near_m: str
    failed: np.ndarray = None


DEFAULT_OMEGAS = (0.98, 0.985, 0.99, 0.993, 0.995, 0.997, 0.998, 0.999)


def charge_curve(n, nonlin, m=1.0, omega_grid=None):
    """Q(omega) and dQ/domega at interior nodes by centered differences with
    step eps^2/10; the sign near m needs the last three interior nodes to agree."""
    omegas = np.asarray(omega_grid if omega_grid is not None
                        else [w * m for w in DEFAULT_OMEGAS], dtype=float)
    if omegas.size < 5:
        raise InputError("charge_curve needs at least 5 frequencies")
    if np.any(omegas <= 0.5 * m) or np.any(omegas >= m):
        raise DomainError("frequencies must lie in (m/2, m)")

    def Q_at(w):
        return charge(solve_soliton(n, nonlin, m, w))

    Q = np.full(omegas.size, np.nan)
    dQ = np.full(omegas.size, np.nan)
    failed = np.zeros(omegas.size, dtype=bool)
    for i, w in enumerate(omegas):
        try:
            Q[i] = Q_at(w)
            if 0 < i < omegas.size - 1:
                step = (m * m - w * w) / 10.0
                dQ[i] = (Q_at(w + step) - Q_at(w - step)) / (2 * step)
        except SolverError:
            failed[i] = True
    interior = dQ[1:-1]
    tail = interior[~np.isnan(interior)][-3:]
    if tail.size == 3 and np.all(tail < 0):
        sign = "negative"
    elif tail.size == 3 and np.all(tail > 0):
        sign = "positive"
    else:
        sign = "indeterminate"
    return ChargeCurve(omegas, Q, dQ, sign, failed)


def sup_scaling_exponent(n, nonlin, m=1.0, omegas=(0.9, 0.99, 0.999)):
    """Slope of log sup v against log eps along a frequency family."""
    eps, sups = [], []
    for w in omegas:
        p = solve_soliton(n, nonlin, m, w * m)
        eps.append(p.epsilon)
        sups.append(np.max(np.abs(p.v)))
    return float(np.polyfit(np.log(eps), np.log(sups), 1)[0])


# ---------------------------------------------------------------------------
# bi-frequency waves
# ---------------------------------------------------------------------------

def bifrequency_pair(profile, xi=1.0, eta=0.0, grid=None):
    """Spinor fields phi_{omega,xi} and chi_{omega,eta} on a line (n = 1, N = 2).

    Returns (x, phi, chi) with phi, chi of shape (num_points, 2).
    """
    if profile.n != 1:
        raise Unsupported("bi-frequency fields are sampled for n = 1 only")
    xi, eta = complex(xi), complex(eta)
    if abs(abs(xi) ** 2 - abs(eta) ** 2 - 1.0) > 1e-12:
        raise InputError("need |xi|^2 - |eta|^2 = 1")
    if grid is None:
        grid = Grid1D(T_MAX / profile.epsilon, 4001)
    x = grid.nodes
    v, u = profile(x)            # u already odd: u(r) x/r
    phi = np.column_stack([v * xi, 1j * u * xi])
    chi = np.column_stack([-1j * u * eta, v * eta])
    return x, phi, chi


def beta_pairing(phi, chi):
    """Pointwise phi* beta chi for N = 2 fields."""
    return np.conj(phi[:, 0]) * chi[:, 0] - np.conj(phi[:, 1]) * chi[:, 1]
