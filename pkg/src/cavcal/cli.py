"""``cavcal`` command line: table and figure drivers, the verification suite, CSV/JSON output.

stdout carries data only; WARN lines and summaries go to stderr.
Exit codes: 0 ok, 1 a check failed, 2 bad configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import bounds, calculus, gridsup, maximize
from .errors import CavcalError, DegenerateArgument, NoBracket, NonpositiveDeterminant, ParamRange
from .mat3core import RngStream, parse_matrix_text, svd3
from .paperfn import A0, SQRT2, G, H, K_hat, N, P, dist_to_stretch, m_l

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
TABLE_LAMBDAS = (1.01, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0)
SPREAD_WARN = 0.1

# Algorithm B defaults per variant (see README, "Sampling for the grid method")
GRID_DEFAULTS = {"abs": {"alpha": 3.0, "sampling": "symmetric", "n": 1_000_000}, "neg": {"alpha": 1.5, "sampling": "general", "n": 100_000_000}}


class ConfigError(CavcalError):
    pass


@dataclass
class RunConfig:
    seed: int = 0
    restarts: int = 500
    alpha: float = 5.0
    lambda_grid: list[float] = field(default_factory=lambda: list(TABLE_LAMBDAS))
    q: float = 2.5
    kappa_mode: str = "min"
    kappa: float | None = None
    output: str = "csv"
    out_path: str | None = None
    workers: int = 1

    def validate(self) -> "RunConfig":
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit nonnegative integer")
        if self.restarts < 2:
            raise ConfigError("restarts must be >= 2")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ConfigError("alpha must be positive")
        if not self.lambda_grid or any(not (x > 0 and math.isfinite(x)) for x in self.lambda_grid):
            raise ConfigError("lambda values must be positive")
        if not 2 < self.q < 3:
            raise ConfigError("q must lie in (2, 3)")
        if self.kappa_mode not in ("min", "max", "value"):
            raise ConfigError("kappa-mode must be min, max or value")
        if self.output not in ("csv", "json"):
            raise ConfigError("output must be csv or json")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self


# --- output ------------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.8g}"
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return float(f"{v:.8g}") if math.isfinite(v) else str(v)
    return x


def render(cfg: RunConfig, command: str, rows: list[dict] | None = None, result: dict | None = None, extra: dict | None = None) -> str:
    if cfg.output == "json":
        # workers and the output path do not affect results, so they are not echoed
        conf = {k: v for k, v in asdict(cfg).items() if k not in ("workers", "out_path")}
        doc = {"command": command, "config": _jsonable(conf)}
        if rows is not None:
            doc["rows"] = _jsonable(rows)
        if result is not None:
            doc["result"] = _jsonable(result)
        if extra:
            doc.update(_jsonable(extra))
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if rows is not None:
        if rows:
            w.writerow(list(rows[0]))
            for r in rows:
                w.writerow([fmt(v) for v in r.values()])
    else:
        w.writerow(["key", "value"])
        for k, v in (result or {}).items():
            w.writerow([k, fmt(v)])
    return buf.getvalue()


def emit(cfg: RunConfig, text: str) -> None:
    if cfg.out_path:
        with open(cfg.out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def warn(msg: str) -> None:
    print(f"WARN {msg}", file=sys.stderr)


def note(msg: str) -> None:
    print(msg, file=sys.stderr)


# --- verification suite ----------------------------------------------------------


@dataclass
class CheckLine:
    name: str
    analytic: float
    observed: float
    error: float
    ok: bool

    def text(self) -> str:
        return f"{self.name} {fmt(self.analytic)} {fmt(self.observed)} {fmt(self.error)} {'PASS' if self.ok else 'FAIL'}"


@dataclass
class SuiteContext:
    seed: int = 0
    g: Callable = G


def _motet(ctx: SuiteContext) -> list[CheckLine]:
    gen = RngStream(ctx.seed, 1).generator
    worst: dict[str, tuple[float, float, float]] = {}
    for _ in range(100):
        u = gen.normal(size=(3, 3)) * gen.uniform(0.2, 2.0)
        lam = float(gen.uniform(0.5, 2.5))
        scale = max(1.0, float(np.sum(u * u)), lam * lam)
        for r in calculus.verify_sv_sums(lam, u):
            rel = r.abs_error / scale
            if rel >= worst.get(r.quantity_name, (0, 0, -1))[2]:
                worst[r.quantity_name] = (r.analytic_value, r.fd_value, rel)
    return [CheckLine(f"motet.{k}", a, o, e, e <= 1e-5) for k, (a, o, e) in worst.items()]


def _expansion(ctx: SuiteContext) -> list[CheckLine]:
    gen = RngStream(ctx.seed, 2).generator
    worst = 0.0
    for _ in range(100):
        u = gen.normal(size=(3, 3))
        reps = calculus.verify_P_expansion(float(gen.uniform(0.5, 2.5)), u, (1e-2, 1e-3))
        worst = max(worst, reps[1].abs_error / max(reps[0].abs_error, 1e-300))
    # residual/h^2 is O(h): a tenfold smaller step should cut it roughly tenfold
    return [CheckLine("expansion.residual_ratio", 0.1, worst, worst, worst < 0.5)]


def _tangency(ctx: SuiteContext) -> list[CheckLine]:
    gen = RngStream(ctx.seed, 3).generator
    hs = np.logspace(-1, -4, 7)
    ratios = []
    for _ in range(100):
        u = gen.normal(size=(3, 3))
        u /= np.linalg.norm(u)
        lam = float(gen.uniform(0.5, 2.5))
        a = lam * np.eye(3) + hs[:, None, None] * u
        ratios.append(np.abs(ctx.g(a, lam)) / hs**3)
    r = np.array(ratios)
    # sup over U of |G|/h^3 at small h against the same sup at large h
    growth = float(r[:, hs <= 1e-3].max() / r[:, hs >= 1e-2].max())
    return [CheckLine("tangency.ratio_growth", 1.0, growth, abs(growth - 1.0), growth < 2.0)]


def _diagonal(ctx: SuiteContext) -> list[CheckLine]:
    gen = RngStream(ctx.seed, 4).generator
    d = gen.uniform(0, 5, size=(10_000, 3))
    a = np.zeros((10_000, 3, 3))
    a[:, [0, 1, 2], [0, 1, 2]] = d
    err = max(float(np.max(np.abs(ctx.g(a, lam)))) for lam in (0.5, 1.0, 2.0))
    return [CheckLine("diagonal.G_zero", 0.0, err, err, err <= 1e-10)]


def _khat(ctx: SuiteContext) -> list[CheckLine]:
    gen = RngStream(ctx.seed, 5).generator
    at0 = float(K_hat(A0))
    mx = float(np.max(K_hat(gen.normal(size=(100_000, 3, 3)))))
    return [
        CheckLine("khat.at_A0", SQRT2, at0, abs(at0 - SQRT2), abs(at0 - SQRT2) <= 1e-14),
        CheckLine("khat.sample_max", SQRT2, mx, max(mx - SQRT2, 0.0), mx <= SQRT2 + 1e-12),
    ]


def _greenalder(ctx: SuiteContext) -> list[CheckLine]:
    gen = RngStream(ctx.seed, 6).generator
    a = gen.uniform(-3, 3, size=(10_000, 3, 3))
    err = max(float(np.max(calculus.greenalder_batch(a, lam))) for lam in (0.5, 1.0, 1.5, 2.0))
    return [CheckLine("greenalder.identity", 0.0, err, err, err <= 1e-10)]


def _rankone(ctx: SuiteContext) -> list[CheckLine]:
    gen = RngStream(ctx.seed, 7).generator
    err = 0.0
    for _ in range(100):
        rows = calculus.rank_one_slice(float(gen.uniform(0.5, 2.5)), gen.normal(size=3), gen.uniform(-4, 4, size=5))
        err = max(err, max(abs(p - f) for _, p, f in rows))
    gap = calculus.slice_midpoint_gap(1.0, RngStream(ctx.seed, 8), 1000)
    return [
        CheckLine("rankone.slice_formula", 0.0, err, err, err <= 1e-10),
        CheckLine("rankone.midpoint_gap", 0.0, gap, max(-gap, 0.0), gap >= -1e-10),
    ]


def _polyconvex(ctx: SuiteContext) -> list[CheckLine]:
    out = []
    for lam in (0.5, 1.0, 1.5, 2.0, 4.0):
        m = calculus.counterexample_margin(lam)
        out.append(CheckLine(f"polyconvex.margin_lam{lam:g}", 0.0, m, 0.0, m > 0))
    return out


def _nullquad(ctx: SuiteContext) -> list[CheckLine]:
    field_ = calculus.SineField.random(RngStream(ctx.seed, 9))
    i32 = calculus.quadrature_integrals(1.0, 32, field_)
    i64 = calculus.quadrature_integrals(1.0, 64, field_, which=("N",))
    ratio = abs(i32["N"]) / max(abs(i64["N"]), 1e-300)
    pg = abs(i32["P"] - i32["G"])
    return [
        CheckLine("nullquad.order2_ratio", 4.0, ratio, abs(ratio - 4.0), 3.0 <= ratio <= 5.0),
        CheckLine("nullquad.P_equals_G", 0.0, pg, pg, pg <= 10 * abs(i32["N"]) + 1e-12),
    ]


def _gbound(ctx: SuiteContext) -> list[CheckLine]:
    gen = RngStream(ctx.seed, 10).generator
    fails, worst = 0, math.inf
    for k in range(1000):
        abc = np.sort(gen.normal(scale=3.0, size=3))[::-1]
        emp, bound, ok = bounds.g_bound_check(abc, 10_000, RngStream(ctx.seed, 10_000 + k))
        fails += not ok
        worst = min(worst, emp - bound)
    return [CheckLine("gbound.min_margin", 0.0, worst, float(fails), fails == 0)]


def _mintrace(ctx: SuiteContext) -> list[CheckLine]:
    ok = bounds.mintrace_check(RngStream(ctx.seed, 11), 100_000)
    return [CheckLine("mintrace.range", 0.0, 0.0, 0.0, ok)]


def _bartok(ctx: SuiteContext) -> list[CheckLine]:
    gen = RngStream(ctx.seed, 12).generator
    a = gen.uniform(-3, 3, size=(200_000, 3, 3))
    a = a[np.linalg.det(a) > 0][:100_000]
    worst = min(float(np.min(bounds.bartok_batch(a, lam))) for lam in (1.0, 1.5, 2.0))
    return [CheckLine("bartok.min_margin", 0.0, worst, max(-worst, 0.0), worst >= -1e-9)]


def _zy(ctx: SuiteContext) -> list[CheckLine]:
    qs = np.linspace(2, 3, 101)
    zs, ys, less = zip(*(bounds.zy_compare(float(q), bounds.NU1) for q in qs))
    z3, y3, flag3 = bounds.zy_compare(3.0, bounds.NU1_NEG)
    conv = float(np.min(np.diff(zs, 2)))
    conc = float(np.max(np.diff(ys[1:], 2)))  # y has a one-sided limit at q = 2
    return [
        CheckLine("zy.z_below_y", 0.0, float(np.min(np.array(ys) - np.array(zs))), 0.0, all(less)),
        CheckLine("zy.z_convex", 0.0, conv, 0.0, conv >= -1e-12),
        CheckLine("zy.y_concave", 0.0, conc, 0.0, conc <= 1e-12),
        CheckLine("zy.neg_reversal_z3", 5.2002, z3, abs(z3 - 5.2002), abs(z3 - 5.2002) < 5e-5 and not flag3),
        CheckLine("zy.neg_reversal_y3", 5.1962, y3, abs(y3 - 5.1962), abs(y3 - 5.1962) < 5e-5),
    ]


SUITE: dict[str, Callable[[SuiteContext], list[CheckLine]]] = {
    "motet": _motet,
    "expansion": _expansion,
    "tangency": _tangency,
    "diagonal": _diagonal,
    "khat": _khat,
    "greenalder": _greenalder,
    "rankone": _rankone,
    "polyconvex": _polyconvex,
    "nullquad": _nullquad,
    "gbound": _gbound,
    "mintrace": _mintrace,
    "bartok": _bartok,
    "zy": _zy,
}
CHECK_SUITES = {"g-bound": "gbound", "mintrace": "mintrace", "bartok": "bartok", "zy": "zy"}


def run_suite(names, ctx: SuiteContext) -> list[CheckLine]:
    lines = []
    for name in names:
        lines.extend(SUITE[name](ctx))
    return lines


# --- commands ----------------------------------------------------------------------


def _matrix_arg(args) -> np.ndarray:
    if args.matrix is not None:
        return parse_matrix_text(args.matrix)
    if args.infile is not None:
        text = sys.stdin.read() if args.infile == "-" else open(args.infile).read()
        return parse_matrix_text(text)
    raise ConfigError("give --matrix or --in")


def cmd_svd(cfg: RunConfig, args) -> int:
    dec = svd3(_matrix_arg(args))
    result = {f"sigma{i + 1}": dec.sigma[i] for i in range(3)}
    result.update({f"U{i + 1}{j + 1}": dec.u_factor[i, j] for i in range(3) for j in range(3)})
    result.update({f"V{i + 1}{j + 1}": dec.v_factor[i, j] for i in range(3) for j in range(3)})
    result["sign"] = float(dec.sign)
    emit(cfg, render(cfg, "svd", result=result))
    return EXIT_OK


def cmd_eval(cfg: RunConfig, args) -> int:
    a = _matrix_arg(args)
    lam = args.lam
    result = {"lambda": lam, "P": P(a, lam), "N": N(a, lam), "G": G(a, lam), "H": H(a, lam), "dist": dist_to_stretch(a, lam)}
    if float(dist_to_stretch(a, lam)) > 0:
        result[f"m{args.l}_{args.variant}"] = m_l(a, lam, args.l, args.variant)
    if np.any(a != 0):
        result["K_hat"] = K_hat(a)
    emit(cfg, render(cfg, "eval", result=result))
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args=None, ctx: SuiteContext | None = None, names=None) -> int:
    ctx = ctx or SuiteContext(seed=cfg.seed)
    if names is None:
        flt = getattr(args, "filter", None)
        names = [n for n in SUITE if flt is None or flt in n]
        if not names:
            raise ConfigError(f"no check matches filter {flt!r}")
    lines = run_suite(names, ctx)
    if cfg.output == "json":
        emit(cfg, render(cfg, "verify", rows=[asdict(ln) for ln in lines]))
    else:
        emit(cfg, "".join(ln.text() + "\n" for ln in lines))
    return EXIT_OK if all(ln.ok for ln in lines) else EXIT_CHECK


def cmd_check(cfg: RunConfig, args) -> int:
    return cmd_verify(cfg, names=[CHECK_SUITES[args.suite]])


def _estimates(cfg: RunConfig, l: int, variant: str, lams) -> list[maximize.SupEstimate]:
    out = []
    for lam in lams:
        est = maximize.estimate_M(float(lam), l, variant, cfg.restarts, cfg.alpha, cfg.seed, workers=cfg.workers)
        lo, hi = est.c1_spread
        if l == 3 and hi - lo > SPREAD_WARN:
            warn(f"lambda={fmt(lam)}: top-{len(est.top_k)} c1 spread {fmt(hi - lo)} exceeds {SPREAD_WARN}")
        out.append(est)
    return out


def _est_row(est: maximize.SupEstimate) -> dict:
    lo, hi = est.c1_spread
    return {"lambda": est.lam, "value": est.value, "c1": est.c1, "c1_min": lo, "c1_max": hi, "n_converged": est.n_converged}


def cmd_m(cfg: RunConfig, args) -> int:
    ests = _estimates(cfg, args.l, args.variant, cfg.lambda_grid)
    top = [{"lambda": e.lam, "values": [r.value for r in e.top_k]} for e in ests]
    emit(cfg, render(cfg, "m", rows=[_est_row(e) for e in ests], extra={"top_k": top}))
    return EXIT_OK


def cmd_c1(cfg: RunConfig, args) -> int:
    ests = _estimates(cfg, 3, args.variant, cfg.lambda_grid)
    rows = [{k: v for k, v in _est_row(e).items() if k != "value"} for e in ests]
    emit(cfg, render(cfg, "c1", rows=rows))
    return EXIT_OK


def _grid_params(args, variant):
    d = GRID_DEFAULTS[variant]
    return (
        d["alpha"] if args.grid_alpha is None else args.grid_alpha,
        d["sampling"] if args.sampling is None else args.sampling,
        d["n"] if args.n is None else args.n,
    )


def cmd_grid_sup(cfg: RunConfig, args) -> int:
    alpha, sampling, n = _grid_params(args, args.variant)
    table = gridsup.algorithm_b(args.l, args.variant, args.lmin, args.lmax, args.np, n, alpha, cfg.seed, sampling=sampling, workers=cfg.workers)
    emit(cfg, render(cfg, "grid-sup", rows=[{"lambda": x, "value": v} for x, v in table.rows()]))
    return EXIT_OK


def read_table(path: str) -> list[tuple[float, float]]:
    text = sys.stdin.read() if path == "-" else open(path).read()
    rows = []
    for rec in csv.reader(io.StringIO(text)):
        if not rec or rec[0].strip().startswith("#"):
            continue
        try:
            rows.append((float(rec[0]), float(rec[1])))
        except (ValueError, IndexError):
            if rows:
                raise ConfigError(f"bad CSV row {rec!r}")
    return rows


def _fit_result(fit: bounds.FitResult) -> dict:
    if fit.model == "inverse":
        out = {"model": "inverse", "nu": fit.coefficients[0]}
    else:
        out = {"model": "affine", "nu2": fit.coefficients[0], "nu3": fit.coefficients[1]}
    out["max_abs_deviation"] = fit.max_abs_deviation
    out["argmax_lambda"] = fit.argmax_deviation
    return out


def cmd_fit(cfg: RunConfig, args) -> int:
    grid = read_table(args.infile)
    fit = bounds.fit_inverse(grid) if args.model == "inverse" else bounds.fit_affine(grid)
    emit(cfg, render(cfg, "fit", result=_fit_result(fit)))
    return EXIT_OK


def _kappa(cfg: RunConfig) -> float:
    return bounds.kappa_for_mode(cfg.q, cfg.kappa_mode, cfg.kappa)


def cmd_fixed_point(cfg: RunConfig, args) -> int:
    m2, m3 = bounds.conjecture_handles(args.nu1)
    rows = []
    for lam in cfg.lambda_grid:
        c = bounds.fixed_point_cstar(lam, m2, m3)
        rows.append({"lambda": lam, "cstar": c, "closed_form": SQRT2 * lam / args.nu1})
    emit(cfg, render(cfg, "fixed-point", rows=rows))
    return EXIT_OK


def cmd_bound(cfg: RunConfig, args) -> int:
    kappa = _kappa(cfg)
    rows = []
    for lam in cfg.lambda_grid:
        r = bounds.lambda_bound(cfg.q, kappa, lam, args.nu1)
        rows.append({"lambda": lam, "q": r.q, "kappa": r.kappa, "term_est1": r.term_est1, "term_cstar": r.term_cstar, "rhs": r.rhs, "cstar": r.cstar})
    note(f"exponent convention: {bounds.BoundReport.exponent_convention}")
    extra = {"exponent_convention": bounds.BoundReport.exponent_convention}
    try:
        lam0 = bounds.lambda_zero(cfg.q, kappa, args.nu1)
        note(f"lambda_0 for h(t) = t + 1/t: {fmt(lam0)}")
        extra["lambda_0_default_h"] = lam0
    except NoBracket:
        pass
    emit(cfg, render(cfg, "bound", rows=rows, extra=extra))
    return EXIT_OK


# --- table and figure drivers ------------------------------------------------------


def cmd_table1(cfg: RunConfig, args=None) -> int:
    ests = _estimates(cfg, 3, "abs", cfg.lambda_grid)
    grid = [(e.lam, e.value) for e in ests]
    fit = bounds.fit_inverse(grid) if len(grid) >= 2 else None
    rows = []
    for lam, v in grid:
        model = fit.predict(lam) if fit else math.nan
        rows.append({"lambda": lam, "M3": v, "nu1_over_lambda": float(model), "deviation": v - float(model)})
    return _emit_with_fit(cfg, "table1", rows, fit)


def cmd_table2(cfg: RunConfig, args=None) -> int:
    ests = _estimates(cfg, 3, "abs", cfg.lambda_grid)
    fit = bounds.fit_affine([(e.lam, e.c1) for e in ests]) if len(ests) >= 2 else None
    rows = []
    for e in ests:
        model = float(fit.predict(e.lam)) if fit else math.nan
        lo, hi = e.c1_spread
        rows.append({"lambda": e.lam, "c1": e.c1, "c1_min": lo, "c1_max": hi, "nu2_plus_nu3_lambda": model, "deviation": e.c1 - model})
    return _emit_with_fit(cfg, "table2", rows, fit)


def _emit_with_fit(cfg, command, rows, fit, extra=None) -> int:
    extra = dict(extra or {})
    if fit is not None:
        extra["fit"] = _fit_result(fit)
        note("fit: " + " ".join(f"{k}={fmt(v)}" for k, v in _fit_result(fit).items()))
    emit(cfg, render(cfg, command, rows=rows, extra=extra))
    return EXIT_OK


def figure_grid(cfg: RunConfig, args) -> np.ndarray:
    if args is not None and getattr(args, "lambdas", None):
        return np.asarray(cfg.lambda_grid)
    return gridsup.lambda_grid(1.0, 2.0, 10)


def cmd_figure(cfg: RunConfig, which: str, args=None) -> int:
    grid = figure_grid(cfg, args)
    if which in ("fig1", "fig3"):
        variant = "abs" if which == "fig1" else "neg"
        ests = _estimates(cfg, 3, variant, grid)
        fit = bounds.fit_inverse([(e.lam, e.value) for e in ests])
        rows = []
        for e in ests:
            model = float(fit.predict(e.lam))
            row = {"lambda": e.lam, "observed": e.value, "model": model, "difference": e.value - model}
            if which == "fig1":
                lo, hi = e.c1_spread
                row.update({"c1": e.c1, "c1_min": lo, "c1_max": hi})
            rows.append(row)
        return _emit_with_fit(cfg, which, rows, fit)
    variant = "abs" if which == "fig2" else "neg"
    alpha, sampling, n = _grid_params(args, variant) if args is not None else (GRID_DEFAULTS[variant]["alpha"], GRID_DEFAULTS[variant]["sampling"], GRID_DEFAULTS[variant]["n"])
    lmin, lmax = float(grid[0]), float(grid[-1])
    table = gridsup.algorithm_b(3, variant, lmin, lmax, len(grid) - 1, n, alpha, cfg.seed, sampling=sampling, workers=cfg.workers)
    fit = bounds.fit_inverse(table.rows())
    rows = []
    for lam, v in table.rows():
        model = float(fit.predict(lam))
        rows.append({"lambda": lam, "observed": v, "model": model, "difference": v - model})
    extra = {"sampling": {"n": n, "alpha": alpha, "distribution": sampling}}
    if which == "fig2":
        ests = _estimates(cfg, 3, "abs", table.lambda_grid)
        report = gridsup.cross_check(table, ests)
        for row, cc in zip(rows, report.rows):
            row.update({"algorithm_a": cc.ascent_value, "a_minus_b": cc.difference})
        extra["cross_check"] = {"max_difference": report.max_difference, "tol": report.tol, "passed": report.passed}
        if not report.passed:
            warn(f"cross-check max difference {fmt(report.max_difference)} exceeds {report.tol}")
    return _emit_with_fit(cfg, which, rows, fit, extra)


# --- argument parsing --------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="emit a JSON document instead of CSV")
    common.add_argument("--out", dest="out_path", default=None, help="write output to this path")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--restarts", type=int, default=500)
    common.add_argument("--alpha", type=float, default=5.0, help="start-matrix entry range for the ascent")
    common.add_argument("--lambda", "--lambdas", dest="lambdas", type=_float_list, default=None)
    common.add_argument("--q", type=float, default=2.5)
    common.add_argument("--kappa-mode", default="min", choices=["min", "max", "value"])
    common.add_argument("--kappa", type=float, default=None)

    p = argparse.ArgumentParser(prog="cavcal", description="Calibration constants for cavitation lower bounds.")
    sub = p.add_subparsers(dest="command", required=True)

    def matrix_opts(sp):
        sp.add_argument("--matrix", default=None, help="nine numbers, row-major")
        sp.add_argument("--in", dest="infile", default=None, help="file with nine numbers ('-' for stdin)")

    def grid_opts(sp):
        sp.add_argument("--n", type=int, default=None, help="number of random matrices")
        sp.add_argument("--grid-alpha", type=float, default=None)
        sp.add_argument("--sampling", choices=["half", "symmetric", "general"], default=None)

    sp = sub.add_parser("svd", parents=[common])
    matrix_opts(sp)
    sp = sub.add_parser("eval", parents=[common])
    matrix_opts(sp)
    sp.add_argument("--lam", type=float, default=1.0)
    sp.add_argument("--l", type=int, choices=[2, 3], default=3)
    sp.add_argument("--variant", choices=["abs", "neg"], default="abs")
    sp = sub.add_parser("verify", parents=[common])
    sp.add_argument("--filter", default=None)
    sp = sub.add_parser("check", parents=[common])
    sp.add_argument("--suite", required=True, choices=sorted(CHECK_SUITES))
    sp = sub.add_parser("m", parents=[common])
    sp.add_argument("--l", type=int, choices=[2, 3], default=3)
    sp.add_argument("--variant", choices=["abs", "neg"], default="abs")
    sp = sub.add_parser("c1", parents=[common])
    sp.add_argument("--variant", choices=["abs", "neg"], default="abs")
    sp = sub.add_parser("grid-sup", parents=[common])
    sp.add_argument("--l", type=int, choices=[2, 3], default=3)
    sp.add_argument("--variant", choices=["abs", "neg"], default="abs")
    sp.add_argument("--lmin", type=float, default=1.0)
    sp.add_argument("--lmax", type=float, default=2.0)
    sp.add_argument("--np", type=int, default=100)
    grid_opts(sp)
    sp = sub.add_parser("fit", parents=[common])
    sp.add_argument("--model", choices=["inverse", "affine"], required=True)
    sp.add_argument("--in", dest="infile", required=True)
    sp = sub.add_parser("fixed-point", parents=[common])
    sp.add_argument("--nu1", type=float, default=bounds.NU1)
    sp = sub.add_parser("bound", parents=[common])
    sp.add_argument("--nu1", type=float, default=bounds.NU1)
    sub.add_parser("table1", parents=[common])
    sub.add_parser("table2", parents=[common])
    for k in range(1, 5):
        sp = sub.add_parser(f"fig{k}", parents=[common])
        grid_opts(sp)
    return p


def config_from_args(args) -> RunConfig:
    seed = args.seed
    env = os.environ.get("CAVCAL_SEED")
    if env is not None:
        try:
            seed = int(env)
        except ValueError:
            raise ConfigError(f"CAVCAL_SEED must be an integer, got {env!r}")
    lams = args.lambdas
    if lams is None:
        lams = [1.0, 1.5, 2.0] if args.command in ("m", "c1", "bound", "fixed-point") else list(TABLE_LAMBDAS)
    return RunConfig(
        seed=seed,
        restarts=args.restarts,
        alpha=args.alpha,
        lambda_grid=lams,
        q=args.q,
        kappa_mode=args.kappa_mode,
        kappa=args.kappa,
        output="json" if args.json else "csv",
        out_path=args.out_path,
        workers=args.workers,
    ).validate()


COMMANDS = {
    "svd": cmd_svd,
    "eval": cmd_eval,
    "verify": cmd_verify,
    "check": cmd_check,
    "m": cmd_m,
    "c1": cmd_c1,
    "grid-sup": cmd_grid_sup,
    "fit": cmd_fit,
    "fixed-point": cmd_fixed_point,
    "bound": cmd_bound,
    "table1": cmd_table1,
    "table2": cmd_table2,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = config_from_args(args)
        if args.command.startswith("fig"):
            return cmd_figure(cfg, args.command, args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, ParamRange, OSError, ValueError) as exc:
        if isinstance(exc, (DegenerateArgument, NonpositiveDeterminant)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CavcalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
