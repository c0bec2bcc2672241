"""Command-line front end: poles, survival, transition and verify.

Configuration is a flat key=value file with section prefixes, e.g.

    physical.e = 0.3
    photon.nu = 1.0
    grid.points = 40

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure.
"""

import argparse
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from . import amplitudes, model, oracle, resolvent, special, wavetoy
from .errors import ConfigError, DomainError, PFPointError

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULT_TOLERANCES = {
    "stone": 1e-5,
    "stone_double": 1e-4,
    "dual_path": 1e-7,
    "overlap": 1e-8,
    "pv": 1e-8,
    "transition": 1e-5,
    "cut": 1e-6,
    "slope": 0.15,
    "wavetoy": 1e-12,
    "permanent": 1e-12,
}


@dataclass
class RunConfig:
    physical: model.PhysicalParams = field(default_factory=model.PhysicalParams)
    nu: float = 1.0
    eps: float = 0.01
    k: tuple = (0.0, 0.0, 1.0)
    zeta: tuple = (1.0, 0.0, 0.0)
    bound_zeta: tuple = (0.0, 1.0, 0.0)
    start: float = 0.1
    stop: float = 100.0
    points: int = 40
    spacing: str = "log"
    scale: str = "lambda_e"
    workers: int = 1
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def photon(self):
        return resolvent.PhotonSpec(self.nu, self.eps, self.k, self.zeta)

    def time_grid(self, spectral):
        if self.spacing == "log":
            g = np.geomspace(self.start, self.stop, self.points)
        else:
            g = np.linspace(self.start, self.stop, self.points)
        if self.scale == "lambda_e":
            if not math.isfinite(spectral.lambda_e):
                raise ConfigError("grid.scale = lambda_e needs a nonzero charge")
            g = g / spectral.lambda_e
        if np.any(g == 0):
            raise ConfigError("time grid must exclude t = 0")
        return g


def _vector(text, kind=float):
    try:
        vals = tuple(kind(v.strip().replace(" ", "")) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad vector {text!r}") from exc
    if len(vals) != 3:
        raise ConfigError(f"expected three components, got {text!r}")
    return vals


def _number(key, text, kind=float):
    try:
        return kind(text)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {text!r}") from exc


def parse_config(text):
    """Parse key=value text into a RunConfig; raises ConfigError."""
    phys = {}
    cfg = RunConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        section, _, name = key.partition(".")
        if section == "physical" and name in ("e", "m", "c", "omega0", "hbar"):
            phys[name] = _number(key, val)
        elif section == "photon" and name in ("nu", "eps"):
            setattr(cfg, name, _number(key, val))
        elif key == "photon.k":
            cfg.k = _vector(val)
        elif key == "photon.zeta":
            cfg.zeta = _vector(val, complex)
        elif key == "bound.zeta":
            cfg.bound_zeta = _vector(val, complex)
        elif section == "grid" and name in ("start", "stop"):
            setattr(cfg, name, _number(key, val))
        elif key == "grid.points":
            cfg.points = _number(key, val, int)
        elif key == "grid.spacing":
            if val not in ("linear", "log"):
                raise ConfigError("grid.spacing must be linear or log")
            cfg.spacing = val
        elif key == "grid.scale":
            if val not in ("lambda_e", "1"):
                raise ConfigError("grid.scale must be lambda_e or 1")
            cfg.scale = val
        elif key == "run.workers":
            cfg.workers = _number(key, val, int)
        elif section == "tolerance" and name in DEFAULT_TOLERANCES:
            tol = _number(key, val)
            if not tol > 0:
                raise ConfigError(f"{key} must be positive")
            cfg.tolerances[name] = tol
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    try:
        cfg.physical = model.PhysicalParams(**phys)
        cfg.photon()
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.points < 1 or cfg.workers < 1:
        raise ConfigError("grid.points and run.workers must be positive")
    if cfg.spacing == "log" and not (cfg.start > 0 and cfg.stop > 0):
        raise ConfigError("log grid needs positive start and stop")
    if cfg.start == cfg.stop and cfg.points > 1:
        raise ConfigError("empty grid range")
    return cfg


def load_config(path):
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(text)


# output helpers ---------------------------------------------------------------


def _fmt(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return obj


def dump_json(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _csv(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(v if isinstance(v, str) else _fmt(v) for v in r) + "\n")
    return buf.getvalue()


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# poles --------------------------------------------------------------------------


def poles_document(cfg):
    p = cfg.physical
    sp = model.spectrum(p)
    doc = {
        "params": {"e": p.e, "m": p.m, "c": p.c, "omega0": p.omega0, "hbar": p.hbar},
        "lambda_e": sp.lambda_e,
        "z_plus": sp.z_plus,
        "z_minus": sp.z_minus,
        "omega_e": sp.omega_e,
        "gamma_e": sp.gamma_e,
        "kappa0": sp.kappa0,
        "kappa1": sp.kappa1,
        "kappa2": sp.kappa2,
        "kappa": sp.kappa,
        "kappa_published": sp.kappa_published,
        "ac_weight": sp.ac_weight,
        "degenerate": sp.degenerate,
    }
    w_pub, g_pub = model.perturbative_resonances(p)
    doc["omega_e_published"] = w_pub
    doc["gamma_e_published"] = g_pub
    doc["discrepancy"] = model.discrepancy_report(p, sp)
    return doc


def cmd_poles(cfg, args):
    _write(dump_json(poles_document(cfg)), args.out)
    return EXIT_OK


# survival -----------------------------------------------------------------------

SURVIVAL_TERMS = ("runaway", "resonance", "j1", "j2")


def survival_row(t, params, verify=False):
    """One CSV row of the survival table; recomputable on its own."""
    sp = model.spectrum(params)
    try:
        b = amplitudes.survival_terms(t, sp, params)
    except PFPointError as exc:
        return {"t": t, "error": str(exc)}
    row = {"t": t, "S": b.S, "S_hat": b.S_hat, "terms": b.terms}
    if verify:
        rep = oracle.stone_survival(t, sp, params)
        row["gap"] = abs(rep.value - b.S) / abs(b.S)
        row["oracle_converged"] = rep.converged
    return row


def _split(z):
    return (complex(z).real, complex(z).imag)


def cmd_survival(cfg, args):
    p = cfg.physical
    if p.decoupled:
        raise ConfigError("survival amplitude needs a nonzero charge")
    sp = model.spectrum(p)
    grid = cfg.time_grid(sp)
    rows = _map(partial(survival_row, params=p, verify=args.verify), list(grid), cfg.workers)
    header = ["t", "re_S", "im_S", "abs_S", "re_S_hat", "im_S_hat"]
    for name in SURVIVAL_TERMS:
        header += [f"re_{name}", f"im_{name}"]
    if args.verify:
        header.append("oracle_gap")
    header.append("flag")
    out, failed, bad_gap = [], False, False
    tol = cfg.tolerances["stone"]
    for r in rows:
        if "error" in r:
            failed = True
            out.append([r["t"]] + [math.nan] * (len(header) - 2) + ["error"])
            continue
        line = [r["t"], *_split(r["S"]), abs(r["S"]), *_split(r["S_hat"])]
        for name in SURVIVAL_TERMS:
            line += _split(r["terms"][name])
        flag = "ok"
        if args.verify:
            line.append(r["gap"])
            if not (r["gap"] < tol and r["oracle_converged"]):
                flag, bad_gap = "gap", True
        out.append(line + [flag])
    _write(_csv(header, out), args.out)
    if failed:
        return EXIT_NUMERIC
    return EXIT_VERIFY if bad_gap else EXIT_OK


# transition ---------------------------------------------------------------------

TRANSITION_TERMS = ("runaway", "resonance", "photon_pole", "s_integral_up", "s_integral_down", "cut")


def transition_row(t, params, photon, bound_zeta, verify=False):
    sp = model.spectrum(params)
    geo = amplitudes.geometric_factor(photon, bound_zeta)
    scale = np.linalg.norm(photon.kvec) * np.linalg.norm(photon.zvec) * np.linalg.norm(bound_zeta)
    if abs(geo) <= 1e-15 * scale:
        zero = {"t": t, "A": 0j, "A_hat": 0j, "terms": {k: 0j for k in TRANSITION_TERMS}}
        if verify:
            zero["gap"] = 0.0
            zero["oracle_converged"] = True
        return zero
    try:
        b = amplitudes.transition_eps(t, photon, sp, params, bound_zeta)
    except PFPointError as exc:
        return {"t": t, "error": str(exc)}
    row = {
        "t": t, "A": b.amplitude, "A_hat": b.normalized * geo,
        "terms": {k: v * geo for k, v in b.terms.items()},
    }
    if verify:
        if photon.eps > 0:
            rep = oracle.stone_transition(t, photon, sp, params)
            row["gap"] = abs(rep.value - b.total) / abs(b.total)
            row["oracle_converged"] = rep.converged
        else:
            row["gap"], row["oracle_converged"] = math.nan, True
    return row


def cmd_transition(cfg, args):
    p = cfg.physical
    if p.decoupled:
        raise ConfigError("transition amplitude needs a nonzero charge")
    sp = model.spectrum(p)
    if args.sweep:
        nus = _parse_sweep(args.sweep)
        c3 = [amplitudes.transition_constants(resolvent.PhotonSpec(n, 0.0), sp, p).C3 for n in nus]
        rows = [[n, abs(c), c.real, c.imag] for n, c in zip(nus, c3)]
        _write(_csv(["nu", "abs_C3", "re_C3", "im_C3"], rows), args.out)
        return EXIT_OK
    photon = cfg.photon()
    grid = cfg.time_grid(sp)
    fn = partial(transition_row, params=p, photon=photon, bound_zeta=cfg.bound_zeta, verify=args.verify)
    rows = _map(fn, list(grid), cfg.workers)
    header = ["t", "re_A", "im_A", "abs_A", "re_A_hat", "im_A_hat"]
    for name in TRANSITION_TERMS:
        header += [f"re_{name}", f"im_{name}"]
    if args.verify:
        header.append("oracle_gap")
    header.append("flag")
    out, failed, bad_gap = [], False, False
    tol = cfg.tolerances["transition"]
    for r in rows:
        if "error" in r:
            failed = True
            out.append([r["t"]] + [math.nan] * (len(header) - 2) + ["error"])
            continue
        line = [r["t"], *_split(r["A"]), abs(r["A"]), *_split(r["A_hat"])]
        for name in TRANSITION_TERMS:
            line += _split(r["terms"][name])
        flag = "ok"
        if args.verify:
            line.append(r["gap"])
            if not (r["gap"] < tol or math.isnan(r["gap"])) or not r["oracle_converged"]:
                flag, bad_gap = "gap", True
        out.append(line + [flag])
    _write(_csv(header, out), args.out)
    if failed:
        return EXIT_NUMERIC
    return EXIT_VERIFY if bad_gap else EXIT_OK


def _parse_sweep(spec):
    parts = spec.split(":")
    if len(parts) != 4 or parts[0] != "nu":
        raise ConfigError("--sweep expects nu:START:STOP:POINTS")
    try:
        a, b, n = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError as exc:
        raise ConfigError(f"bad sweep {spec!r}") from exc
    if not (0 < a < b) or n < 2:
        raise ConfigError("sweep needs 0 < START < STOP and POINTS >= 2")
    return np.linspace(a, b, n)


# verify ---------------------------------------------------------------------------

CHECKS = []


def check(name):
    def deco(fn):
        CHECKS.append((name, fn))
        return fn

    return deco


@check("overlaps")
def _check_overlaps(cfg, sp):
    p = cfg.physical
    gaps = []
    z = 0.4 + 0.3j
    ref = resolvent.green_overlap(resolvent.BranchedPoint(z), sp, p)
    gaps.append(oracle.radial_overlap_oracle("green-green", p, z=z, lambda_e=sp.lambda_e).gap(ref))
    ref = resolvent.shell_bracket(2 + 0.5j, 0.3, p.c)
    gaps.append(oracle.radial_overlap_oracle("bracket", p, z=2 + 0.5j, r=0.3).gap(ref))
    for w in (0.5 + 0.2j, -1.3 + 0.7j, 2.0 + 0.1j):
        ref = complex(resolvent.chi(w, cfg.nu, max(cfg.eps, 0.05)))
        gaps.append(oracle.radial_overlap_oracle("photon-green", p, w=w, nu=cfg.nu, eps=max(cfg.eps, 0.05)).gap(ref))
    return max(gaps), cfg.tolerances["overlap"]


@check("j2_dual_path")
def _check_dual(cfg, sp):
    gaps = []
    for lt in (0.1, 1.0, 10.0, 100.0):
        b = amplitudes.survival_terms(lt / sp.lambda_e, sp, cfg.physical, check=False)
        gaps.append(b.j2_gap / max(abs(b.j2), abs(b.total)))
    return max(gaps), cfg.tolerances["dual_path"]


@check("pv_identity")
def _check_pv(cfg, sp):
    gaps = []
    for t in (0.01, 0.3, 2.0):
        v, _ = special.pv_laplace_pole_quadrature(t, sp.lambda_e)
        ref = special.pv_laplace_pole(t, sp.lambda_e)
        gaps.append(abs(v - ref) / abs(ref))
    return max(gaps), cfg.tolerances["pv"]


@check("stone_survival")
def _check_stone(cfg, sp):
    gaps = []
    for lt in (0.1, 1.0, 16.7, 100.0):
        t = lt / sp.lambda_e
        S = amplitudes.survival_terms(t, sp, cfg.physical).S
        rep = oracle.stone_survival(t, sp, cfg.physical)
        gaps.append(rep.gap(S) if rep.converged else math.inf)
    return max(gaps), cfg.tolerances["stone"]


@check("stone_double")
def _check_double(cfg, sp):
    gaps = []
    for t in (0.5, 1.0, 5.0):
        a = oracle.stone_survival(t, sp, cfg.physical)
        b = oracle.stone_survival_double(t, sp, cfg.physical, s_nodes=96)
        gaps.append(b.gap(a.value))
    return max(gaps), cfg.tolerances["stone_double"]


@check("s_kernel")
def _check_s_kernel(cfg, sp):
    a = oracle.s_kernel_identity(sp.z_plus).value
    b = oracle.s_kernel_identity(sp.z_minus).value
    return max(abs(a - 1), abs(b + 1)), 1e-10


@check("transition_stone")
def _check_transition(cfg, sp):
    ph = resolvent.PhotonSpec(cfg.nu, max(cfg.eps, 0.01), cfg.k, cfg.zeta)
    gaps = []
    for t in (-1.0, 1.0, 4.0):
        A = amplitudes.transition_eps(t, ph, sp, cfg.physical).total
        rep = oracle.stone_transition(t, ph, sp, cfg.physical)
        gaps.append(rep.gap(A) if rep.converged else math.inf)
    return max(gaps), cfg.tolerances["transition"]


@check("cut_integral")
def _check_cut(cfg, sp):
    ph = resolvent.PhotonSpec(cfg.nu, max(cfg.eps, 0.01), cfg.k, cfg.zeta)
    return max(oracle.cut_integral_check(t, ph, sp, cfg.physical).details["gap"] for t in (1.0, -1.0)), cfg.tolerances["cut"]


@check("regularized_limits")
def _check_regularized(cfg, sp):
    p = cfg.physical
    pt = resolvent.BranchedPoint(0.7 + 0.4j)
    lam = complex(resolvent.lambda_pm(pt, p, sp))
    rs = np.array([1e-2, 1e-3, 1e-4])
    errs = [abs(resolvent.regularized_coeffs(pt, r, p).lambda_r - lam) for r in rs]
    slope = np.polyfit(np.log(rs), np.log(errs), 1)[0]
    return abs(slope - 1.0), cfg.tolerances["slope"]


@check("wavetoy")
def _check_wavetoy(cfg, sp):
    worst = 0.0
    for seed in range(20):
        s = wavetoy.random_system(seed)
        x = np.random.default_rng(seed + 1).standard_normal(2 * s.n)
        worst = max(worst, s.skew_residual(), wavetoy.conjugation_check(s, 2.7, x))
        worst = max(worst, abs(wavetoy.g_norm(s, wavetoy.propagate(s, 1.0, x)) - wavetoy.g_norm(s, x)))
    return worst, cfg.tolerances["wavetoy"]


@check("permanent")
def _check_permanent(cfg, sp):
    rng = np.random.default_rng(7)
    worst = 0.0
    for n in (1, 2, 3, 5):
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        worst = max(worst, abs(amplitudes.permanent(M) - oracle.permanent_bruteforce(M)))
    return worst, cfg.tolerances["permanent"]


def run_checks(cfg):
    sp = model.spectrum(cfg.physical)
    report = []
    for name, fn in CHECKS:
        try:
            gap, tol = fn(cfg, sp)
            passed = bool(gap <= tol)
            entry = {"name": name, "passed": passed, "gap": float(gap), "tolerance": float(tol)}
        except (PFPointError, ArithmeticError, ValueError) as exc:
            entry = {"name": name, "passed": False, "gap": None, "tolerance": None, "error": f"{type(exc).__name__}: {exc}"}
        report.append(entry)
    return {"checks": report, "passed": all(c["passed"] for c in report)}


def cmd_verify(cfg, args):
    if cfg.physical.decoupled:
        raise ConfigError("verification needs a nonzero charge")
    report = run_checks(cfg)
    _write(dump_json(report), args.out)
    if not args.quiet:
        for c in report["checks"]:
            print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']} gap={c['gap']}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


# entry point ------------------------------------------------------------------------

COMMANDS = {"poles": cmd_poles, "survival": cmd_survival, "transition": cmd_transition, "verify": cmd_verify}


def build_parser():
    ap = argparse.ArgumentParser(prog="pfpoint", description="Resonances and amplitudes of the point-limit radiating oscillator.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--verify", action="store_true", help="add the Stone-oracle gap column")
        sp.add_argument("--sweep", metavar="nu:START:STOP:POINTS")
        sp.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PFPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
