"""Command-line entry point.

Every subcommand validates a :class:`RunConfig`, runs one pipeline, and
writes a JSON :class:`~solerlab.reports.Report` (to ``--output`` or
stdout) plus an optional CSV curve (``--csv``). Results are cached under a
key derived from the numeric configuration.

Exit codes: 0 success, 1 failed acceptance checks, 2 input error,
3 solver failure, 4 indeterminate verdict.
"""

import argparse
import configparser
import dataclasses
import logging
import math
import sys
import time

import numpy as np

from . import __version__
from .errors import ConfigurationError, InconclusiveError, SolerError
from .reports import Report, ResultCache, canonical_key, write_csv

log = logging.getLogger("solerlab")

COMMANDS = ("ground-state", "nls-spectrum", "resonance", "kn-scan", "soliton",
            "charge-curve", "dirac-spectrum", "track", "char-roots", "resolvent-probe",
            "verify-all")

CHAR_ROOT_FAMILIES = ("quadratic", "S0", "T", "S")


@dataclasses.dataclass
class RunConfig:
    command: str
    n: int = 1
    k: float = 1.0
    K: float = None
    c: float = 0.0
    m: float = 1.0
    omega: float = None
    omega_list: tuple = None
    k_lo: float = None
    k_hi: float = None
    tol: float = 1e-8
    tol_k: float = 5e-3
    num_points: int = None
    y_max: float = None
    seed: int = 0
    family: str = "quadratic"
    size: int = 8
    radius: float = None
    epsilon: float = 0.05
    derivatives: int = 0
    weight: float = 1.0
    samples: int = 9
    imag: float = 0.1
    only: tuple = None
    output: str = None
    csv: str = None
    cache_dir: str = None
    no_cache: bool = False

    # fields that do not change the result
    NON_NUMERIC = ("output", "csv", "cache_dir", "no_cache")

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigurationError(f"unknown command {self.command!r}")
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            values = v if isinstance(v, tuple) else (v,)
            for x in values:
                if isinstance(x, float) and not math.isfinite(x):
                    raise ConfigurationError(f"{f.name} must be finite, got {x}")
        if self.n < 1 or self.n > 4:
            raise ConfigurationError("n must be 1, 2, 3 or 4")
        if not self.k > 0:
            raise ConfigurationError("k must be positive")
        if self.K is not None and not self.K > self.k:
            raise ConfigurationError("the higher exponent K must exceed k")
        if not self.m > 0:
            raise ConfigurationError("m must be positive")
        omegas = list(self.omega_list or ()) + ([self.omega] if self.omega is not None else [])
        for w in omegas:
            if not 0.5 * self.m < w < self.m:
                raise ConfigurationError(f"frequency {w} must lie in (m/2, m)")
        if not self.tol > 0 or not self.tol_k > 0:
            raise ConfigurationError("tolerances must be positive")
        if self.num_points is not None and self.num_points < 16:
            raise ConfigurationError("num_points must be at least 16")
        if self.family not in CHAR_ROOT_FAMILIES:
            raise ConfigurationError(f"family must be one of {CHAR_ROOT_FAMILIES}")
        if not 0 < self.epsilon < 1:
            raise ConfigurationError("epsilon must lie in (0, 1)")
        if self.derivatives not in (0, 1):
            raise ConfigurationError("derivatives must be 0 or 1")
        if self.size < 1 or self.samples < 3:
            raise ConfigurationError("size must be positive and samples at least 3")
        return self

    def key_fields(self):
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)
                if f.name not in self.NON_NUMERIC}

    def cache_key(self):
        return canonical_key(self.key_fields())

    def nonlinearity(self):
        from .soliton import Nonlinearity
        return Nonlinearity(self.k, self.K, self.c)


# ---------------------------------------------------------------------------
# pipelines: config -> (results, curves, diagnostics)
# ---------------------------------------------------------------------------

def _ground_state(cfg):
    from .ground_state import nls_charge, solve_ground_state
    gs = solve_ground_state(cfg.n, cfg.k, cfg.m, tol=cfg.tol)
    results = {"n": gs.n, "k": gs.k, "m": gs.m, "peak": gs.peak,
               "decay_fit": gs.decay_fit, "charge": nls_charge(gs)}
    return results, {"r": gs.grid.nodes, "u_k": gs.values}, {"ode_residual": gs.residual}


def _nls_spectrum(cfg):
    from . import nls_linearization as nl
    from .errors import NotCritical
    from .ground_state import solve_ground_state
    lin = nl.build_l_operators(solve_ground_state(cfg.n, cfg.k, cfg.m))
    zm = nl.zero_multiplicity(lin, seed=cfg.seed)
    results = {"zero_multiplicity": {"algebraic": zm.algebraic, "geometric": zm.geometric,
                                     "radius": zm.radius},
               "critical_pairing": nl.critical_pairing(lin),
               "critical_pairing_target": cfg.n / 2 - 1 / cfg.k,
               "l_minus_bound_states": nl.l_minus_bound_states(lin)}
    try:
        chain = nl.jordan_chain(lin)
        results["jordan_chain"] = {"beta_u": chain.beta_u, "residuals": chain.residuals}
    except NotCritical:
        results["jordan_chain"] = None
    return results, None, {"restricted_singular_values": zm.singular_values}


def _resonance(cfg):
    from . import nls_linearization as nl
    from .ground_state import solve_ground_state
    lin = nl.build_l_operators(solve_ground_state(cfg.n, cfg.k, cfg.m))
    v = nl.detect_threshold_resonance(lin)
    return ({"kind": v.kind, "smallest_singular_value": v.extrapolated,
             "eigenvalues_below_threshold": v.eigenvalues_below_threshold,
             "sectors": v.sectors}, None, {"singular_value_traces": v.evidence})


KN_BRACKETS = {1: (0.9, 1.1), 2: (0.55, 0.7), 3: (0.4, 0.52), 4: (0.32, 0.42)}


def _kn_scan(cfg):
    from . import nls_linearization as nl
    lo, hi = KN_BRACKETS[cfg.n]
    lo = cfg.k_lo if cfg.k_lo is not None else lo
    hi = cfg.k_hi if cfg.k_hi is not None else hi
    trail = []
    k_n = nl.kn_scan(cfg.n, lo, hi, cfg.tol_k, cfg.m, log=trail)
    curves = {"k": [t[0] for t in trail], "eigenvalues_below_threshold": [t[1] for t in trail]}
    return {"n": cfg.n, "k_n": k_n, "bracket": [lo, hi], "tol_k": cfg.tol_k}, curves, {}


def _soliton(cfg):
    from .soliton import charge, solve_soliton
    w = cfg.omega if cfg.omega is not None else 0.99 * cfg.m
    p = solve_soliton(cfg.n, cfg.nonlinearity(), cfg.m, w, tol=cfg.tol)
    results = {"omega": p.omega, "epsilon": p.epsilon, "Q": charge(p),
               "residual": p.residual, "peak": float(p.v[0])}
    return results, {"r": p.grid.nodes, "v": p.v, "u": p.u}, {"system_residual": p.residual}


def _charge_curve(cfg):
    from .soliton import charge_curve
    omegas = [w for w in cfg.omega_list] if cfg.omega_list else None
    cc = charge_curve(cfg.n, cfg.nonlinearity(), cfg.m, omegas)
    results = {"omegas": cc.omegas, "Q": cc.Q, "dQ_domega": cc.dQ_domega,
               "sign_near_m": cc.sign_near_m, "failed": cc.failed}
    if cc.sign_near_m == "indeterminate":
        raise InconclusiveError("the sign of dQ/domega near m is indeterminate",
                                results=results)
    return results, {"omega": cc.omegas, "Q": cc.Q, "dQ_domega": cc.dQ_domega}, {}


def _mode_class(lam, omega, m, tol=1e-6):
    if abs(lam) < tol * m:
        return "kernel"
    if min(abs(lam - 2j * omega), abs(lam + 2j * omega)) < tol * m:
        return "two-omega"
    if lam.real > tol * m:
        return "unstable"
    if lam.real < -tol * m:
        return "stable-partner"
    return "imaginary"


def _spectrum_scan(cfg, default_omegas):
    from . import dirac_linearization as dl
    omegas = cfg.omega_list or ((cfg.omega,) if cfg.omega is not None else default_omegas)
    kwargs = {}
    if cfg.y_max is not None:
        kwargs["y_max"] = cfg.y_max
    if cfg.num_points is not None:
        kwargs["num_points"] = cfg.num_points
    return dl.spectrum_scan(cfg.n, cfg.nonlinearity(), cfg.m, [w / cfg.m for w in omegas],
                            **kwargs)


def _dirac_spectrum(cfg):
    from . import dirac_linearization as dl
    scan = _spectrum_scan(cfg, (0.999,))
    per, rows = [], {"omega": [], "re": [], "im": [], "residual": [], "class": []}
    for w, e, modes, z, L in zip(scan.omegas, scan.epsilons, scan.eigenvalues,
                                 scan.z_values, scan.Lambda_values):
        eig = []
        for md in modes:
            cls = _mode_class(md.value, w, scan.m)
            eig.append({"re": md.value.real, "im": md.value.imag,
                        "residual": md.residual, "class": cls})
            for key, val in (("omega", w), ("re", md.value.real), ("im", md.value.imag),
                             ("residual", md.residual), ("class", cls)):
                rows[key].append(val)
        per.append({"omega": w, "epsilon": e, "eigenvalues": eig, "z_values": z,
                    "Lambda_values": L})
    try:
        verdict = dl.stability_verdict(scan)
    except InconclusiveError:
        verdict = "indeterminate"
    results = {"spectra": per, "verdict": verdict, "band_edges": scan.band_edges,
               "embedded_thresholds": scan.embedded_thresholds}
    if verdict == "indeterminate":
        raise InconclusiveError("stability verdict is indeterminate", results=results)
    return results, rows, {"observed_band_edges": scan.observed_edges}


def _track(cfg):
    from . import dirac_linearization as dl
    scan = _spectrum_scan(cfg, (0.995, 0.998, 0.999))
    origin = dl.track_origin(scan)
    two = dl.track_2mi(scan)
    curves = {"omega": scan.omegas, "epsilon": scan.epsilons,
              "lambda_plus": origin["lambda_plus"]}
    return {"origin": origin, "two_m_i": two}, curves, {}


def _char_roots(cfg):
    import scipy.linalg as la

    from . import char_roots as cr
    if cfg.family == "quadratic":
        rng = np.random.default_rng(cfg.seed)
        A = [rng.standard_normal((cfg.size, cfg.size)) for _ in range(3)]
        fam = cr.matrix_polynomial(A)
        radius = cfg.radius or 1.0
        rep = cr.find_char_roots(fam, cr.Contour(0.0, radius, 128), seed=cfg.seed)
        companion = np.block([[np.zeros((cfg.size, cfg.size)), np.eye(cfg.size)],
                              [-la.solve(A[2], A[0]), -la.solve(A[2], A[1])]])
        ev = la.eigvals(companion)
        inside = ev[np.abs(ev) < radius]
        err = max((min(abs(a - b) for b in rep.roots) for a in inside), default=0.0)
        extra = {"companion_roots": inside, "max_companion_error": err}
    else:
        from .ground_state import solve_ground_state
        from .soliton import solve_soliton
        eps = cfg.epsilon
        prof = solve_soliton(1, cfg.nonlinearity(), cfg.m,
                             float(np.sqrt(cfg.m ** 2 - eps ** 2)))
        red = cr.build_reduction(prof)
        if cfg.family == "S0":
            _, fam = cr.build_T_and_S(solve_ground_state(1, cfg.k, cfg.m), red, 0)
        else:
            T, S = cr.build_T_and_S(prof, red)
            fam = T if cfg.family == "T" else S
        radius = cfg.radius or 0.4
        rep = cr.find_char_roots(fam, cr.Contour(0.0, radius), seed=cfg.seed)
        extra = {}
    results = {"family": cfg.family, "radius": radius, **rep.to_dict(), **extra}
    return results, None, {}


def _resolvent_probe(cfg):
    from . import resolvent as rv
    z = rv.default_lap_samples(cfg.samples, imag=cfg.imag)
    probe = rv.lap_bound_probe(z, s=cfg.weight, derivatives=cfg.derivatives)
    rows = probe.rows()
    results = {"slope": probe.slope, "intercept": probe.intercept,
               "expected_slope": -(1 - cfg.derivatives) / 2, "z": probe.z,
               "norms": probe.norms}
    return results, {"abs_z": [r[0] for r in rows], "norm": [r[1] for r in rows]}, {}


def _verify_all(cfg):
    from . import acceptance
    selection = set(cfg.only) if cfg.only else None
    checks = acceptance.run_all(selection, echo=lambda line: print(line, file=sys.stderr))
    results = {"checks": [{"number": c.number, "title": c.title, "passed": c.passed,
                           "details": c.details} for c in checks],
               "passed": all(c.passed for c in checks)}
    timings = {f"check_{c.number}": c.seconds for c in checks}
    return results, None, {}, timings


PIPELINES = {
    "ground-state": _ground_state, "nls-spectrum": _nls_spectrum, "resonance": _resonance,
    "kn-scan": _kn_scan, "soliton": _soliton, "charge-curve": _charge_curve,
    "dirac-spectrum": _dirac_spectrum, "track": _track, "char-roots": _char_roots,
    "resolvent-probe": _resolvent_probe, "verify-all": _verify_all,
}


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _floats(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def _ints(text):
    return tuple(int(x) for x in text.replace(",", " ").split())


FIELD_TYPES = {
    "n": int, "k": float, "K": float, "c": float, "m": float, "omega": float,
    "omega_list": _floats, "k_lo": float, "k_hi": float, "tol": float, "tol_k": float,
    "num_points": int, "y_max": float, "seed": int, "family": str, "size": int,
    "radius": float, "epsilon": float, "derivatives": int, "weight": float,
    "samples": int, "imag": float, "only": _ints, "output": str, "csv": str,
    "cache_dir": str, "no_cache": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
}

COMMAND_FIELDS = {
    "ground-state": ("n", "k", "m", "tol"),
    "nls-spectrum": ("n", "k", "m", "seed"),
    "resonance": ("n", "k", "m"),
    "kn-scan": ("n", "m", "k_lo", "k_hi", "tol_k"),
    "soliton": ("n", "k", "K", "c", "m", "omega", "tol"),
    "charge-curve": ("n", "k", "K", "c", "m", "omega_list"),
    "dirac-spectrum": ("k", "K", "c", "m", "omega", "omega_list", "y_max", "num_points"),
    "track": ("k", "K", "c", "m", "omega_list", "y_max", "num_points"),
    "char-roots": ("family", "size", "seed", "radius", "k", "K", "c", "m", "epsilon"),
    "resolvent-probe": ("derivatives", "weight", "samples", "imag"),
    "verify-all": ("only",),
}

HELP = {
    "n": "spatial dimension", "k": "nonlinearity exponent", "K": "higher exponent",
    "c": "coefficient of the higher power", "m": "mass", "omega": "frequency",
    "omega_list": "comma-separated frequencies", "k_lo": "lower bracket for k_n",
    "k_hi": "upper bracket for k_n", "tol": "residual tolerance",
    "tol_k": "bisection tolerance in k", "num_points": "grid points",
    "y_max": "half-width of the rescaled domain", "seed": "random seed",
    "family": f"one of {', '.join(CHAR_ROOT_FAMILIES)}", "size": "matrix size",
    "radius": "contour radius", "epsilon": "sqrt(m^2 - omega^2)",
    "derivatives": "0 or 1", "weight": "weight exponent s", "samples": "number of z samples",
    "imag": "fixed imaginary part of z", "only": "comma-separated check numbers",
}


COMMAND_HELP = {
    "ground-state": "NLS ground state u_k; CSV columns r, u_k",
    "nls-spectrum": "multiplicity of 0 for jl, critical pairing, Jordan chain",
    "resonance": "classify the threshold 1/(2m) of l_-",
    "kn-scan": "bisect for k_n; CSV columns k, eigenvalues_below_threshold",
    "soliton": "Dirac solitary wave; CSV columns r, v, u",
    "charge-curve": "Q(omega) and its slope; CSV columns omega, Q, dQ_domega",
    "dirac-spectrum": "point spectrum of J L; CSV columns omega, re, im, residual, class",
    "track": "eigenvalue families near 0 and 2mi; CSV columns omega, epsilon, lambda_plus",
    "char-roots": "characteristic roots inside a circle",
    "resolvent-probe": "limiting-absorption exponent fit; CSV columns abs_z, norm",
    "verify-all": "run the acceptance checks",
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--output", "-o", help="JSON report path (default: stdout)")
    common.add_argument("--csv", help="CSV path for the command's curve")
    common.add_argument("--cache-dir", help="cache directory (default: $SOLERLAB_CACHE_DIR)")
    common.add_argument("--no-cache", action="store_true", default=None,
                        help="neither read nor write the cache")
    common.add_argument("--verbose", "-v", action="store_true")
    parser = argparse.ArgumentParser(prog="solerlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=COMMAND_HELP[name])
        for f in COMMAND_FIELDS[name]:
            flag = "--" + f.replace("_", "-")
            if f == "K":
                flag = "--K"
            p.add_argument(flag, dest=f, type=FIELD_TYPES[f], default=None, help=HELP[f])
    return parser


def read_config_file(path):
    """Parse ``key = value`` lines (``#`` comments) into typed RunConfig fields."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_string("[run]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    out = {}
    for key, raw in parser["run"].items():
        name = key.replace("-", "_")
        if name not in FIELD_TYPES:
            raise ConfigurationError(f"unknown config key {key!r}")
        try:
            out[name] = FIELD_TYPES[name](raw)
        except ValueError as exc:
            raise ConfigurationError(f"bad value for {key}: {raw!r}") from exc
    return out


def make_config(args):
    values = read_config_file(args.config) if args.config else {}
    for name in FIELD_TYPES:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    return RunConfig(args.command, **values).validate()


def execute(cfg, cache=None):
    """Run the pipeline for ``cfg`` (or fetch it from ``cache``); returns (report, curves)."""
    key = cfg.cache_key()
    if cache is not None:
        hit = cache.lookup(key)
        if hit is not None:
            log.info("cache hit %s", key[:12])
            return hit, hit.diagnostics.get("curves")
    t0 = time.perf_counter()
    out = PIPELINES[cfg.command](cfg)
    results, curves, diagnostics = out[:3]
    timings = out[3] if len(out) > 3 else {}
    timings["total"] = time.perf_counter() - t0
    if curves is not None:
        diagnostics = {**diagnostics, "curves": curves}
    inputs = {k: v for k, v in cfg.key_fields().items() if v is not None}
    report = Report(cfg.command, inputs, results, timings, diagnostics)
    if cache is not None and cfg.command != "verify-all":
        cache.store(key, report)
    return report, report.diagnostics.get("curves")


def run(argv=None):
    """Parse ``argv``, run the command and return the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = make_config(args)
        cache = None if cfg.no_cache else ResultCache(cfg.cache_dir)
        report, curves = execute(cfg, cache)
    except SolerError as exc:
        print(f"solerlab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        partial = exc.details.get("results")
        if partial is not None and getattr(args, "output", None):
            Report(args.command, {}, partial, {}, {"error": str(exc)}).write(args.output)
        return exc.exit_code
    if cfg.output:
        report.write(cfg.output)
    else:
        print(report.to_json())
    if cfg.csv and curves:
        write_csv(cfg.csv, curves)
    if cfg.command == "verify-all" and not report.results["passed"]:
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
