"""Command-line driver: build eigen-data caches, run verification suites,
and produce mass / variance / census reports.

Every command is deterministic: fixed summation order inside the library,
fixed %.17g formatting here, so identical configurations give byte-identical
output.  Exit codes follow the usual convention: 0 success, 1 a check or
runtime invariant failed, 2 the invocation itself was malformed.

Configuration values resolve in three layers: dataclass defaults, then a
flat key=value config file given with --config, then explicit flags.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .bumps import Bump, ContourSpec, make_bump, mellin, mellin_invert, symmetric_bump, window_12
from .expsums import euler_phi, kloosterman_identity_lhs
from .forms import EigenStore
from .mass import mass_report, reports_to_csv, s_psi_approx, s_psi_direct
from .oscillatory import (
    PhaseProblem,
    faa_di_bruno,
    nonstationary_bound_check,
    poisson_on_class,
    stationary_phase_eval,
)
from .trace import (
    WindowWeights,
    averaged_petersson_lhs,
    averaged_petersson_rhs,
    exact_petersson_check,
)
from .variance import (
    ExponentConfig,
    collect_window_forms,
    diagonal_asymptotic_terms,
    que_census,
    ratios_csv,
    report_text,
    shifted_window,
    variance_report,
)

__all__ = [
    "RunConfig",
    "UsageError",
    "parse_weights",
    "read_config_file",
    "assemble_config",
    "exponent_config_for",
    "main",
]

VERIFY_SUITES = ("kloosterman", "petersson", "mellin", "shifted", "stationary")


class UsageError(ValueError):
    """Malformed invocation; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Resolved parameters for one command invocation.

    big_g set overrides theta as the window width; otherwise the width is
    big_k ** theta.  tolerance_scale multiplies every verification budget,
    so a stricter or looser run needs no source edit.
    """

    big_k: float = 40.0
    theta: float = 0.9
    big_g: float | None = None
    alpha: float = 2.0
    bump: str = "symmetric"
    weights: str = ""
    cache_dir: str = "eigencache"
    out: str | None = None
    threads: int = 1
    tolerance_scale: float = 1.0
    contour_height: float = 120.0
    contour_step: float = 0.05
    threshold: float | None = None
    trunc: int | None = None


# config-file key -> RunConfig field; K and G keep their display names
_FILE_KEYS = {
    "K": "big_k",
    "theta": "theta",
    "G": "big_g",
    "alpha": "alpha",
    "bump": "bump",
    "weights": "weights",
    "cache_dir": "cache_dir",
    "out": "out",
    "threads": "threads",
    "tolerance_scale": "tolerance_scale",
    "contour_height": "contour_height",
    "contour_step": "contour_step",
    "threshold": "threshold",
    "trunc": "trunc",
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def parse_weights(text: str) -> list[int]:
    """Weight list from "12", "12:60", "12:60:4", or comma-joined pieces.

    Ranges are inclusive with default step 2 (the even weights).  The empty
    string is the empty range.
    """
    text = text.strip()
    if not text:
        return []
    out: set[int] = set()
    for item in text.split(","):
        item = item.strip()
        parts = item.split(":")
        try:
            if len(parts) == 1:
                out.add(int(parts[0]))
            elif len(parts) in (2, 3):
                a, b = int(parts[0]), int(parts[1])
                step = int(parts[2]) if len(parts) == 3 else 2
                if step <= 0:
                    raise UsageError(f"weights: step must be positive in {item!r}")
                out.update(range(a, b + 1, step))
            else:
                raise UsageError(f"weights: cannot parse {item!r}")
        except ValueError as exc:
            if isinstance(exc, UsageError):
                raise
            raise UsageError(f"weights: cannot parse {item!r}") from None
    return sorted(out)


def _convert(field_name: str, raw: str):
    kind = _FIELD_TYPES[field_name]
    try:
        if kind == "int" or kind == "int | None":
            return int(raw)
        if kind == "float" or kind == "float | None":
            return float(raw)
    except ValueError:
        raise UsageError(f"config value for {field_name} is not numeric: {raw!r}") from None
    return raw


def read_config_file(path: str) -> dict[str, object]:
    """Flat key=value lines; blank lines and # comments are skipped."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    out: dict[str, object] = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FILE_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        field_name = _FILE_KEYS[key]
        out[field_name] = _convert(field_name, raw)
    return out


def assemble_config(ns: argparse.Namespace) -> RunConfig:
    """Layer defaults, config file, and explicit flags, in that order."""
    cfg = RunConfig()
    if getattr(ns, "config", None):
        cfg = replace(cfg, **read_config_file(ns.config))
    flag_updates = {}
    for field_name in _FIELD_TYPES:
        value = getattr(ns, field_name, None)
        if value is not None:
            flag_updates[field_name] = value
    if flag_updates:
        cfg = replace(cfg, **flag_updates)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    if cfg.big_k <= 0:
        raise UsageError("K must be positive")
    if not 0.0 < cfg.theta < 1.0:
        raise UsageError("theta must lie in (0, 1)")
    if cfg.big_g is not None and not 0.0 < cfg.big_g <= cfg.big_k:
        raise UsageError("G must lie in (0, K]")
    if cfg.alpha <= 1.0:
        raise UsageError("alpha must exceed 1")
    if cfg.bump not in ("symmetric", "meanzero"):
        raise UsageError("bump must be symmetric or meanzero")
    if cfg.threads < 1:
        raise UsageError("threads must be at least 1")
    if cfg.tolerance_scale <= 0:
        raise UsageError("tolerance-scale must be positive")
    if cfg.contour_height <= 0 or cfg.contour_step <= 0:
        raise UsageError("contour height and step must be positive")
    if cfg.contour_step >= cfg.contour_height:
        raise UsageError("contour step must be smaller than the height")
    if cfg.threshold is not None and cfg.threshold <= 0:
        raise UsageError("threshold must be positive")
    if cfg.trunc is not None and cfg.trunc < 1:
        raise UsageError("trunc must be at least 1")
    parse_weights(cfg.weights)


def exponent_config_for(theta: float, eps: float = 0.01) -> ExponentConfig:
    """Admissible off-diagonal exponents at the given window exponent.

    At theta = 9/10 the module defaults apply.  Away from it, delta sits
    just above its floor and eta just under its ceiling; the remaining
    inequality theta + eta - delta > 1 then needs theta > 9/10, and the
    constructor raises with the violated inequality named.
    """
    if abs(theta - 0.9) < 1e-12:
        return ExponentConfig(eps=eps)
    delta = (1.0 - theta + eps) / 2.0 + 0.005
    eta = 0.75 * (theta - 2.0 / 3.0 - 2.0 * eps)
    return ExponentConfig(theta=theta, delta=delta, eta=eta, eps=eps)


def _window_for(cfg: RunConfig) -> WindowWeights:
    if cfg.big_g is not None:
        return WindowWeights(cfg.big_k, cfg.big_g, window_12(), "shifted")
    return shifted_window(cfg.big_k, cfg.theta)


def _geodesic_weight(cfg: RunConfig) -> Bump:
    return make_bump(cfg.bump, cfg.alpha)


def _fmt(x: float) -> str:
    return "%.17g" % x


def _emit(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _missing_weights(store: EigenStore, ks: list[int], trunc: int | None) -> list[int]:
    return [k for k in ks if not store.has(k, trunc)]


def _report_missing(missing: list[int], cache_dir: str) -> int:
    listing = ",".join(str(k) for k in missing)
    print(
        f"missing eigen-data for weights {listing}; "
        f"run: vertmass eigenforms --weights {listing} --cache-dir {cache_dir}",
        file=sys.stderr,
    )
    return 1


def _build_forms(store: EigenStore, ks: list[int], trunc: int | None, threads: int) -> dict[int, list]:
    if threads > 1 and len(ks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {k: pool.submit(store.get, k, trunc) for k in ks}
            return {k: fut.result() for k, fut in futures.items()}
    return {k: store.get(k, trunc) for k in ks}


# ---------------------------------------------------------------------------
# eigenforms


def cmd_eigenforms(cfg: RunConfig, ns: argparse.Namespace) -> int:
    ks = parse_weights(cfg.weights)
    for k in ks:
        if k < 12 or k % 2:
            raise UsageError(f"eigenforms needs even weights >= 12, got {k}")
    if not ks:
        print("eigenforms: empty weight range, nothing to build")
        return 0
    store = EigenStore(cfg.cache_dir)
    cached_before = {k: store.has(k, cfg.trunc) for k in ks}
    forms = _build_forms(store, ks, cfg.trunc, cfg.threads)
    for k in ks:
        status = "cached" if cached_before[k] else "built"
        print("eigenforms k=%d dim=%d %s" % (k, len(forms[k]), status))
    return 0


# ---------------------------------------------------------------------------
# verify


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    budget: float

    @property
    def ok(self) -> bool:
        return self.measured <= self.budget

    def line(self) -> str:
        status = "pass" if self.ok else "fail"
        return "name=%s measured=%s budget=%s status=%s" % (
            self.name,
            _fmt(self.measured),
            _fmt(self.budget),
            status,
        )


def _suite_kloosterman(cfg: RunConfig) -> list[Check]:
    ts = cfg.tolerance_scale
    checks = []
    for c in range(1, 13):
        rhs = float(c**3 * euler_phi(c))
        lhs = kloosterman_identity_lhs(c)
        checks.append(Check(f"kloosterman_identity_c{c}", abs(lhs - rhs) / rhs, 1e-6 * ts))
    return checks


def _suite_mellin(cfg: RunConfig) -> list[Check]:
    ts = cfg.tolerance_scale
    psi = _geodesic_weight(cfg)
    # the inversion refuses when its tail estimate exceeds the tolerance;
    # height 320 puts the estimate near 5e-7 for the canonical weights
    spec = ContourSpec(sigma=1.0, height=max(cfg.contour_height, 320.0), step=cfg.contour_step)
    checks = []

    cache: dict[complex, complex] = {}

    def tilde(s: complex) -> complex:
        if s not in cache:
            cache[s] = mellin(psi, s)
        return cache[s]

    ys = np.geomspace(psi.lo * 1.02, psi.hi * 0.98, 50)
    sup = max(abs(mellin_invert(tilde, spec, float(y)) - float(psi(float(y)))) for y in ys)
    checks.append(Check("mellin_round_trip_sup", sup, 1e-6 * ts))

    sym = symmetric_bump(cfg.alpha)
    probes = [0.5j, 1.3j, 0.75 + 0.5j, 1.0 + 2.0j, 2.0 - 1.0j]
    asym = max(abs(mellin(sym, s) - mellin(sym, -s)) for s in probes)
    checks.append(Check("mellin_symmetry", asym, 1e-10 * ts))

    # four integrations by parts give |psi~(1+it)| t^4 <= int |d^4/du^4 (psi(e^u) e^-u)| du
    ulo, uhi = math.log(psi.lo), math.log(psi.hi)
    ugrid = np.linspace(ulo, uhi, 2001)
    h = float(ugrid[1] - ugrid[0])
    fv = psi(np.exp(ugrid)) * np.exp(-ugrid)
    f4 = (fv[:-4] - 4 * fv[1:-3] + 6 * fv[2:-2] - 4 * fv[3:-1] + fv[4:]) / h**4
    c4 = float(np.sum(np.abs(f4)) * h)
    t_grid = np.arange(0.5, 100.0 + 1e-9, 0.5)
    decorated = max(abs(mellin(psi, 1.0 + 1j * float(t))) * float(t) ** 4 for t in t_grid)
    checks.append(Check("mellin_decay_j4", decorated, c4 * ts))
    return checks


def _suite_petersson(cfg: RunConfig) -> list[Check] | int:
    ts = cfg.tolerance_scale
    store = EigenStore(cfg.cache_dir)
    exact_ks = list(range(12, 31, 2))
    w30 = WindowWeights(30.0, 30.0, window_12(), "plain")
    averaged_ks = w30.k_values()
    needed = sorted(set(exact_ks) | set(averaged_ks))
    missing = _missing_weights(store, needed, cfg.trunc)
    if missing:
        return _report_missing(missing, cfg.cache_dir)

    checks = []
    for k in exact_ks:
        eigen_list = store.get(k, cfg.trunc)
        for m, n in ((1, 1), (2, 3), (10, 10)):
            lhs, rhs = exact_petersson_check(m, n, k, eigen_list)
            checks.append(Check(f"petersson_exact_k{k}_m{m}_n{n}", abs(lhs - rhs), 1e-8 * ts))

    forms_by_k = {k: store.get(k, cfg.trunc) for k in averaged_ks}
    for m, n in ((1, 1), (2, 2), (2, 3)):
        lhs = averaged_petersson_lhs(m, n, w30, forms_by_k)
        main, kl, budget = averaged_petersson_rhs(m, n, w30)
        residual = abs(lhs - main - kl)
        checks.append(Check(f"petersson_averaged_m{m}_n{n}", residual, 10.0 * budget * ts))
    return checks


def _suite_shifted(cfg: RunConfig) -> list[Check] | int:
    ts = cfg.tolerance_scale
    store = EigenStore(cfg.cache_dir)
    ks = list(range(12, 61, 4))
    missing = _missing_weights(store, ks, cfg.trunc)
    if missing:
        return _report_missing(missing, cfg.cache_dir)
    psi = symmetric_bump(cfg.alpha)
    checks = []
    residuals: dict[int, float] = {}
    for k in ks:
        worst = max(
            abs(s_psi_direct(f, psi) - s_psi_approx(f, psi)) for f in store.get(k, cfg.trunc)
        )
        residuals[k] = worst
        checks.append(Check(f"shifted_k{k}", worst, 10.0 * k ** (-0.45) * ts))
    ratio = max(residuals[24] / residuals[12], residuals[48] / residuals[24])
    checks.append(Check("shifted_doubling_monotone", ratio, 1.0 * ts))
    return checks


def _amplitude_scales(base: Bump, shift: float, scale: float) -> tuple[float, float]:
    """Declared (X, V) for amplitude t -> scale * base(t + shift).

    X is the sup of the amplitude and V the largest width for which the
    derivative bounds 2 X V^{-j}, j <= 4, hold on a 50-point grid.
    """
    grid = np.linspace(base.lo, base.hi, 52)[1:-1]
    sup0 = scale * max(float(base(float(x))) for x in grid)
    v = (base.hi - base.lo) / 2.0
    for j in range(1, 5):
        sup_j = scale * max(abs(base.derivative(j, float(x))) for x in grid)
        if sup_j > 0:
            v = min(v, (2.0 * sup0 / sup_j) ** (1.0 / j))
    return sup0, v


def _fresnel_problem(lam: float) -> PhaseProblem:
    base = symmetric_bump(2.0)
    mid = 0.5 * (base.lo + base.hi)
    x, v = _amplitude_scales(base, mid, 1.0)
    lo, hi = base.lo - mid, base.hi - mid
    return PhaseProblem(
        lo=lo,
        hi=hi,
        amplitude=lambda t: base(t + mid),
        phase=lambda t: lam * t * t,
        dphase=lambda t: 2.0 * lam * t,
        d2phase=lambda t: 2.0 * lam,
        two_pi=True,
        X=x,
        V=v,
        V1=v,
        Y=lam * max(lo * lo, hi * hi),
        Q=max(hi, -lo),
    )


def _linear_problem(lam: float) -> PhaseProblem:
    base = symmetric_bump(2.0)
    mid = 0.5 * (base.lo + base.hi)
    x, v = _amplitude_scales(base, mid, 1.0)
    lo, hi = base.lo - mid, base.hi - mid
    q = max(hi, -lo)
    return PhaseProblem(
        lo=lo,
        hi=hi,
        amplitude=lambda t: base(t + mid),
        phase=lambda t: lam * t,
        dphase=lambda t: lam,
        two_pi=False,
        X=x,
        U=v,
        R=lam,
        Y=lam * q,
        Q=q,
    )


def _random_problem(rng: np.random.Generator) -> PhaseProblem:
    base = symmetric_bump(2.0)
    lam = 10.0 ** rng.uniform(1.3, 2.6)
    amp_scale = rng.uniform(0.5, 2.0)
    t0 = base.lo + rng.uniform(0.35, 0.65) * (base.hi - base.lo)
    x, v = _amplitude_scales(base, 0.0, amp_scale)
    q = max(base.hi - t0, t0 - base.lo)
    return PhaseProblem(
        lo=base.lo,
        hi=base.hi,
        amplitude=lambda t: amp_scale * base(t),
        phase=lambda t: lam * (t - t0) ** 2,
        dphase=lambda t: 2.0 * lam * (t - t0),
        d2phase=lambda t: 2.0 * lam,
        two_pi=True,
        X=x,
        V=v,
        V1=v,
        Y=lam * q * q,
        Q=q,
    )


def _suite_stationary(cfg: RunConfig) -> list[Check]:
    ts = cfg.tolerance_scale
    checks = []

    res = stationary_phase_eval(_fresnel_problem(1.0))
    checks.append(Check("fresnel_main", abs(res.direct - res.main), 10.0 * res.err_envelope * ts))

    errs = {}
    for lam in (25.0, 100.0, 400.0):
        r = stationary_phase_eval(_fresnel_problem(lam))
        errs[lam] = abs(r.direct - r.main)
    worst_ratio = max(errs[100.0] / errs[25.0], errs[400.0] / errs[100.0])
    checks.append(Check("fresnel_error_quarters_at_4Y", worst_ratio, 0.5 * ts))

    r400 = stationary_phase_eval(_fresnel_problem(400.0))
    checks.append(Check("fresnel_trivial_bound", abs(r400.direct), r400.trivial_bound * ts))

    for lam in (10.0, 100.0, 1000.0):
        value, envelope = nonstationary_bound_check(_linear_problem(lam), A=3)
        checks.append(Check("nonstationary_lambda%g" % lam, value, 10.0 * envelope * ts))

    def gauss(x: float) -> float:
        return math.exp(-math.pi * x * x)

    direct, dual = poisson_on_class(gauss, 1, 0, order=24)
    checks.append(Check("poisson_selfdual_gaussian", abs(direct - dual), 1e-10 * ts))
    direct, dual = poisson_on_class(gauss, 3, 1, order=24)
    checks.append(Check("poisson_c3_a1", abs(direct - dual), 1e-9 * ts))

    t0 = 1.3
    inner = [t0**3, 3 * t0**2, 6 * t0, 6.0, 0.0]
    outer = [math.exp(t0**3)] * 5
    exact = faa_di_bruno(outer, inner, 4)

    def fd4(h: float) -> float:
        stencil = [math.exp((t0 + j * h) ** 3) for j in (-2, -1, 0, 1, 2)]
        return (stencil[0] - 4 * stencil[1] + 6 * stencil[2] - 4 * stencil[3] + stencil[4]) / h**4

    # Richardson pair kills the h^2 truncation term of the 5-point stencil
    fd = (4.0 * fd4(0.005) - fd4(0.01)) / 3.0
    checks.append(Check("faa_di_bruno_n4", abs(exact - fd) / abs(fd), 1e-5 * ts))

    rng = np.random.default_rng(113)
    for i in range(20):
        problem = _random_problem(rng)
        r = stationary_phase_eval(problem)
        checks.append(
            Check("stationary_random_%02d" % i, abs(r.direct - r.main), 10.0 * r.err_envelope * ts)
        )
    return checks


_SUITES = {
    "kloosterman": _suite_kloosterman,
    "mellin": _suite_mellin,
    "petersson": _suite_petersson,
    "shifted": _suite_shifted,
    "stationary": _suite_stationary,
}


def cmd_verify(cfg: RunConfig, ns: argparse.Namespace) -> int:
    result = _SUITES[ns.suite](cfg)
    if isinstance(result, int):
        return result
    lines = [check.line() for check in result]
    failures = sum(not check.ok for check in result)
    lines.append("suite=%s checks=%d failures=%d" % (ns.suite, len(result), failures))
    _emit(lines, cfg.out)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# mass


def cmd_mass(cfg: RunConfig, ns: argparse.Namespace) -> int:
    ks = parse_weights(cfg.weights) if cfg.weights.strip() else _window_for(cfg).k_values()
    for k in ks:
        if k < 12 or k % 2:
            raise UsageError(f"mass needs even weights >= 12, got {k}")
    if not ks:
        print("mass: empty weight range, nothing to report")
        return 0
    store = EigenStore(cfg.cache_dir)
    forms = _build_forms(store, ks, cfg.trunc, cfg.threads)
    psi = _geodesic_weight(cfg)
    psi_id = "%s_a%g" % (cfg.bump, cfg.alpha)
    reports = [mass_report(f, psi, psi_id) for k in ks for f in forms[k]]
    csv = reports_to_csv(reports)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(csv)
        print("mass report written to %s (%d forms)" % (cfg.out, len(reports)))
    else:
        sys.stdout.write(csv)
    return 0


# ---------------------------------------------------------------------------
# variance


def cmd_variance(cfg: RunConfig, ns: argparse.Namespace) -> int:
    w = _window_for(cfg)
    try:
        exp_cfg = exponent_config_for(cfg.theta)
    except ValueError as exc:
        raise UsageError(f"no admissible off-diagonal exponents: {exc}") from None
    store = EigenStore(cfg.cache_dir)
    ks = w.k_values()
    missing = _missing_weights(store, ks, cfg.trunc)
    if missing:
        return _report_missing(missing, cfg.cache_dir)
    forms_by_k = collect_window_forms(w, store, cfg.trunc)
    psi = _geodesic_weight(cfg)
    spec = ContourSpec(sigma=1.0, height=cfg.contour_height, step=cfg.contour_step)

    terms = diagonal_asymptotic_terms(w, psi, psi, exp_cfg, spec=spec)
    for name in ("t1", "t2", "t3", "t4"):
        print("%s=%s" % (name, _fmt(terms[name])))
    print("diag_error_first_form=%s" % _fmt(terms["error_first_form"]))

    rep = variance_report(w, psi, psi, forms_by_k, exp_cfg, include_od=w.bigK <= 500)
    text = report_text(rep)
    csv = ratios_csv(rep)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        base, _ = os.path.splitext(cfg.out)
        ratios_path = base + "_ratios.csv"
        with open(ratios_path, "w", encoding="utf-8") as fh:
            fh.write(csv)
        print("report written to %s" % cfg.out)
        print("ratio table written to %s" % ratios_path)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        sys.stdout.write(csv)
    return 0


# ---------------------------------------------------------------------------
# census


def cmd_census(cfg: RunConfig, ns: argparse.Namespace) -> int:
    w = _window_for(cfg)
    store = EigenStore(cfg.cache_dir)
    ks = w.k_values()
    missing = _missing_weights(store, ks, cfg.trunc)
    if missing:
        return _report_missing(missing, cfg.cache_dir)
    forms_by_k = collect_window_forms(w, store, cfg.trunc)
    psi = _geodesic_weight(cfg)
    exp_cfg = ExponentConfig()
    total, exceeders = que_census(w, psi, exp_cfg, forms_by_k, cfg.threshold)
    threshold = cfg.threshold if cfg.threshold is not None else w.bigK ** (-0.25 + exp_cfg.eps)
    fraction = exceeders / total if total else float("nan")
    lines = [
        "census total=%d exceeders=%d threshold=%s fraction=%s"
        % (total, exceeders, _fmt(threshold), _fmt(fraction))
    ]
    _emit(lines, cfg.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value configuration file")
    common.add_argument("--K", dest="big_k", type=float, help="center of the weight window")
    common.add_argument("--theta", type=float, help="window width exponent, G = K**theta")
    common.add_argument("--G", dest="big_g", type=float, help="window width, overrides theta")
    common.add_argument("--alpha", type=float, help="support parameter of the geodesic weight")
    common.add_argument("--bump", choices=("symmetric", "meanzero"), help="geodesic weight family")
    common.add_argument("--weights", help="weight list, e.g. 12:60 or 12,16,20")
    common.add_argument("--cache-dir", dest="cache_dir", help="eigen-data cache directory")
    common.add_argument("--out", help="write primary output to this path")
    common.add_argument("--threads", type=int, help="worker threads for cache building")
    common.add_argument(
        "--tolerance-scale",
        dest="tolerance_scale",
        type=float,
        help="multiplier applied to every verification budget",
    )
    common.add_argument("--contour-height", dest="contour_height", type=float, help=argparse.SUPPRESS)
    common.add_argument("--contour-step", dest="contour_step", type=float, help=argparse.SUPPRESS)
    common.add_argument("--trunc", type=int, help="coefficient truncation for eigen-data")

    parser = argparse.ArgumentParser(
        prog="vertmass",
        description="Restricted-mass statistics of holomorphic eigenforms on the vertical geodesic.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eigenforms", parents=[common], help="build and cache eigen-data")
    p_verify = sub.add_parser("verify", parents=[common], help="run a named verification suite")
    p_verify.add_argument("suite", choices=VERIFY_SUITES)
    sub.add_parser("mass", parents=[common], help="per-form mass decomposition table")
    sub.add_parser("variance", parents=[common], help="end-to-end variance report")
    p_census = sub.add_parser("census", parents=[common], help="count forms with large mass deviation")
    p_census.add_argument("--threshold", type=float, help="deviation threshold, default K**(-1/4+eps)")
    return parser


_DISPATCH = {
    "eigenforms": cmd_eigenforms,
    "verify": cmd_verify,
    "mass": cmd_mass,
    "variance": cmd_variance,
    "census": cmd_census,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = assemble_config(ns)
        validate_config(cfg)
        return _DISPATCH[ns.command](cfg, ns)
    except UsageError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, KeyError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
