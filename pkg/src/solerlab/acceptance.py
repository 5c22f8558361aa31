"""The end-to-end acceptance suite.

Each check returns a :class:`CheckResult` holding the measured quantities
next to the tolerance they were compared with. The same functions back the
``verify-all`` command and the test suite.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from . import char_roots as cr
from . import dirac_linearization as dl
from . import nls_linearization as nl
from . import resolvent as rv
from .ground_state import closed_form_1d, solve_ground_state
from .numerics import Grid1D
from .soliton import Nonlinearity, charge_curve, solve_soliton

KN_REFERENCE = {1: 1.0, 2: 0.621, 3: 0.461, 4: 0.369}
KN_BRACKETS = {1: (0.9, 1.1), 2: (0.55, 0.7), 3: (0.4, 0.52), 4: (0.32, 0.42)}
KN_TOL = 0.01
KN_TIME_LIMIT = 120.0


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.title} ({self.seconds:.1f} s)"


def _timed(number, title):
    def wrap(fn):
        def run():
            t0 = time.perf_counter()
            passed, details = fn()
            return CheckResult(number, title, bool(passed), details,
                               time.perf_counter() - t0)
        run.number = number
        run.title = title
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


@_timed(1, "k_n reproduction and the n = 1 resonance")
def check_kn():
    details, ok = {}, True
    for n, ref in KN_REFERENCE.items():
        t0 = time.perf_counter()
        k_n = nl.kn_scan(n, *KN_BRACKETS[n])
        dt = time.perf_counter() - t0
        good = abs(k_n - ref) <= KN_TOL and dt < KN_TIME_LIMIT
        details[f"n={n}"] = {"k_n": k_n, "reference": ref, "seconds": dt, "ok": good}
        ok &= good
    lin = nl.build_l_operators(solve_ground_state(1, 1.0))
    kind = nl.detect_threshold_resonance(lin).kind
    details["n=1,k=1"] = kind
    return ok and kind == "threshold_resonance", details


@_timed(2, "1D ground state against the sech closed form")
def check_ground_state_1d():
    details, ok = {}, True
    x = np.linspace(0.0, 30.0, 3001)
    for k in (0.5, 1.0, 1.5, 2.0, 3.0):
        gs = solve_ground_state(1, k)
        err = float(np.max(np.abs(gs(x) - closed_form_1d(k, x))))
        details[f"k={k}"] = err
        ok &= err <= 1e-8
    return ok, details


@_timed(3, "algebraic multiplicity of 0 for jl, with grid doubling")
def check_nls_jordan():
    details, ok = {}, True
    for k, expected in ((1.0, 4), (2.0, 6)):
        gs = solve_ground_state(1, k)
        counts = []
        for points in (961, 1921):
            lin = nl.build_l_operators(gs, Grid1D(24.0, points))
            counts.append(nl.zero_multiplicity(lin).algebraic)
        details[f"k={k}"] = {"multiplicities": counts, "expected": expected}
        ok &= all(c == expected for c in counts)
    return ok, details


PAIRING_CASES = ((1, 1.0), (1, 2.0), (1, 3.0), (2, 1.0), (3, 0.8))


@_timed(4, "critical pairing n/2 - 1/k")
def check_pairing():
    details, ok = {}, True
    for n, k in PAIRING_CASES:
        lin = nl.build_l_operators(solve_ground_state(n, k))
        value = nl.critical_pairing(lin)
        target = n / 2 - 1 / k
        details[f"n={n},k={k}"] = {"value": value, "target": target}
        ok &= abs(value - target) <= 1e-4
    return ok, details


DIRAC_CASES = ((1.0, 0.99, 4), (2.0, 0.995, 6))


@_timed(5, "exact Dirac structure: kernel, 2 omega i, null space")
def check_dirac_structure():
    details, ok = {}, True
    for k, omega, gen in DIRAC_CASES:
        prof = solve_soliton(1, Nonlinearity(k), 1.0, omega)
        lin = dl.build_linearization(prof)
        dphi = dl.dphi_domega(lin)
        kr = dl.kernel_report(lin, dphi=dphi)
        two = dl.verify_pm2omega(lin)
        res = kr.basis_residuals
        cap = 10 * lin.grid_error
        good = (res["L_J_phi"] <= cap and two.residual <= cap
                and two.extrapolated_error <= 1e-6 * prof.m
                and kr.dim_ker == 2 and kr.dim_generalized == gen)
        details[f"k={k}"] = {"L_J_phi": res["L_J_phi"], "two_omega_residual": two.residual,
                             "grid_error": lin.grid_error,
                             "two_omega_error": two.extrapolated_error,
                             "dim_ker": kr.dim_ker, "dim_generalized": kr.dim_generalized,
                             "expected_generalized": gen}
        ok &= good
    return ok, details


@_timed(6, "charge-curve signs near m")
def check_vk_signs():
    details, ok = {}, True
    for k, expected in ((1.0, "negative"), (1.5, "negative"), (2.0, "negative"),
                        (3.0, "positive")):
        sign = charge_curve(1, Nonlinearity(k)).sign_near_m
        details[f"k={k}"] = {"sign": sign, "expected": expected}
        ok &= sign == expected
    return ok, details


INSTABILITY_OMEGAS = (0.995, 0.998, 0.999)


@_timed(7, "epsilon^2 scaling of the unstable eigenvalue")
def check_instability_scaling():
    scan = dl.spectrum_scan(1, Nonlinearity(3.0), 1.0, INSTABILITY_OMEGAS)
    verdict = dl.track_origin(scan)
    p = verdict.get("exponent", float("nan"))
    return abs(p - 2.0) <= 0.1, {"exponent": p, "lambda_plus": verdict["lambda_plus"],
                                 "epsilons": verdict["epsilons"]}


@_timed(8, "stability verdicts at omega = 0.999 m")
def check_verdicts():
    details, ok = {}, True
    for k, expected in ((2.0, "stable"), (1.5, "stable"), (3.0, "unstable")):
        scan = dl.spectrum_scan(1, Nonlinearity(k), 1.0, (0.999,))
        verdict = dl.stability_verdict(scan, tol=1e-6)
        details[f"k={k}"] = {"verdict": verdict, "expected": expected}
        ok &= verdict == expected
    return ok, details


THRESHOLD_OFFSETS = (1e-2, 1e-4, 1e-6)
BOUNDED_FACTOR = 10.0
GROWTH_FACTOR = 100.0


def resolvent_growth(k, reference_z=0.4, offsets=THRESHOLD_OFFSETS):
    """Norm ratios ||u^k (l_- - z)^(-1) u^k|| at z = 1/(2m) - offset over z = reference_z."""
    gs = solve_ground_state(1, k)
    ref = nl.weighted_resolvent_l_minus(gs, reference_z).norm
    edge = 1.0 / (2 * gs.m)
    return [nl.weighted_resolvent_l_minus(gs, edge - d).norm / ref for d in offsets]


@_timed(9, "families near 2 omega i and the threshold resolvent")
def check_threshold():
    scan = dl.spectrum_scan(1, Nonlinearity(1.5), 1.0, (0.99, 0.995, 0.999))
    tracked = dl.track_2mi(scan, tol=1e-6)
    regular = resolvent_growth(1.5)
    resonant = resolvent_growth(1.0)
    ok = (tracked["all_exact"] and max(regular) < BOUNDED_FACTOR
          and resonant[-1] >= GROWTH_FACTOR)
    return ok, {"families": tracked["families"], "regular_ratios": regular,
                "resonant_ratios": resonant}


ROOT_TOL = 1e-8
COMPANION_SEEDS = (1, 2, 3)


def companion_comparison(seed, size=8, radius=1.0):
    """Largest distance between contour roots and companion-matrix eigenvalues."""
    rng = np.random.default_rng(seed)
    A0, A1, A2 = (rng.standard_normal((size, size)) for _ in range(3))
    fam = cr.matrix_polynomial([A0, A1, A2])
    companion = np.block([[np.zeros((size, size)), np.eye(size)],
                          [-la.solve(A2, A0), -la.solve(A2, A1)]])
    ev = la.eigvals(companion)
    inside = ev[np.abs(ev) < radius]
    rep = cr.find_char_roots(fam, cr.Contour(0.0, radius, 128), seed=seed)
    if rep.total != inside.size:
        return np.inf, inside.size, rep.total
    err = max((min(abs(a - b) for b in rep.roots) for a in inside), default=0.0)
    return float(err), int(inside.size), int(rep.total)


@_timed(10, "characteristic roots: oracle, multiplicity, T versus S, perturbation")
def check_char_roots():
    details, ok = {}, True
    for seed in COMPANION_SEEDS:
        err, expected, found = companion_comparison(seed)
        details[f"companion seed={seed}"] = {"max_error": err, "roots": expected,
                                             "found": found}
        ok &= err <= ROOT_TOL
    eps = 0.05
    prof = solve_soliton(1, Nonlinearity(1.5), 1.0, float(np.sqrt(1 - eps * eps)))
    red = cr.build_reduction(prof)
    T, S = cr.build_T_and_S(prof, red)
    disc = cr.Contour(0.0, 0.4)
    rT = cr.find_char_roots(T, disc)
    rS = cr.find_char_roots(S, disc)
    same = (rT.total == rS.total and all(
        min(abs(a - b) for b in rS.roots) < 1e-6 for a in rT.roots))
    details["T roots"] = rT.roots
    details["S roots"] = rS.roots
    ok &= bool(same)
    _, S0 = cr.build_T_and_S(solve_ground_state(1, 1.5), red, 0)
    mult = cr.multiplicity_report(S0, 0.0)
    details["S0 multiplicity at 0"] = mult.algebraic
    ok &= mult.algebraic == 1
    rng = np.random.default_rng(7)
    B = 1e-4 * rng.standard_normal((8, 8))
    fam = cr.matrix_polynomial([rng.standard_normal((8, 8)) for _ in range(3)])
    pert = cr.perturbation_report(fam, lambda z: B * (1 + z), cr.Contour(0.0, 1.0))
    details["perturbation"] = {"bound": pert.bound, "total": pert.total_unperturbed,
                               "perturbed_total": pert.total_perturbed}
    ok &= pert.stable
    return ok, details


FNR_SAMPLES = 1000
LAP_TARGET, LAP_TOL = -0.5, 0.05
THETA_SLOPE, THETA_DERIVATIVE_SLOPE = 0.9, 2.8


@_timed(11, "resolvent suite: F closed form, its bound, LAP exponent, theta scaling")
def check_resolvent():
    details, ok = {}, True
    fnr = rv.FNREvaluator(3, 1.0)
    pts = (0.3 + 0.2j, -0.5 + 0.4j, 0.1 + 0.05j, 0.7j)
    quad = max(abs(fnr(z) - fnr.by_quadrature(z)) for z in pts)
    details["closed_vs_quadrature"] = quad
    ok &= quad <= 1e-10
    rng = np.random.default_rng(0)
    violations = 0
    for N in (3, 5, 7):
        ev = rv.FNREvaluator(N, 1.0)
        rad = 0.95 * np.sqrt(rng.uniform(size=FNR_SAMPLES))
        ang = rng.uniform(0, 2 * np.pi, FNR_SAMPLES)
        for z in rad * np.exp(1j * ang):
            violations += abs(ev(z)) > ev.bound(z)
    details["bound_violations"] = int(violations)
    ok &= violations == 0
    lap = rv.lap_bound_probe(rv.default_lap_samples())
    details["lap_slope"] = lap.slope
    ok &= abs(lap.slope - LAP_TARGET) <= LAP_TOL
    th = cr.vartheta_scaling(1.5)
    details["theta_slope"] = th.slope
    details["theta_derivative_slope"] = th.derivative_slope
    details["theta_norms"] = th.norms
    details["theta_derivative_norms"] = th.derivative_norms
    ok &= th.slope >= THETA_SLOPE and th.derivative_slope >= THETA_DERIVATIVE_SLOPE
    return ok, details


CHECKS = (check_kn, check_ground_state_1d, check_nls_jordan, check_pairing,
          check_dirac_structure, check_vk_signs, check_instability_scaling, check_verdicts,
          check_threshold, check_char_roots, check_resolvent)


def run_all(selection=None, echo=print):
    """Run the checks (all, or those whose numbers are in ``selection``)."""
    results = []
    for check in CHECKS:
        if selection and check.number not in selection:
            continue
        res = check()
        if echo:
            echo(res.line())
        results.append(res)
    return results
