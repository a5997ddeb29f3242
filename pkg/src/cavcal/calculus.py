"""Finite-difference checks of the expansions of P at lam*I, rank-one slices,
the polyconvexity counterexample, and a quadrature test of the null Lagrangian N.

Individual singular values are not differentiable at lam*I (all three
coincide), so derivatives are taken of smooth symmetric combinations:
s1 = sum l_i, s2 = sum_{i<j} l_i l_j and sq = sum l_i^2 = |A|^2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateArgument
from .mat3core import IDENTITY, RngStream, frobenius_norm, singular_values, trace, trace_cof
from .paperfn import G, P, _sym

DEFAULT_STEPS = (1e-2, 1e-3, 1e-4)


@dataclass
class FdReport:
    quantity_name: str
    analytic_value: float
    fd_value: float
    step: float
    abs_error: float

    @classmethod
    def make(cls, name: str, analytic: float, observed: float, step: float) -> "FdReport":
        return cls(name, float(analytic), float(observed), float(step), abs(float(analytic) - float(observed)))


def _d1(f, h):
    return (f(h) - f(-h)) / (2 * h)


def _d2(f, h):
    return (f(h) - 2 * f(0.0) + f(-h)) / (h * h)


def _best(reports: list[FdReport]) -> FdReport:
    return min(reports, key=lambda r: r.abs_error)


def _sv_sums(a):
    e1, e2, _ = _sym(singular_values(a))
    return float(e1), float(e2)


def expansion_values(u) -> dict[str, float]:
    """Closed forms of the derivative combinations at lam*I along U."""
    u = np.asarray(u, dtype=float)
    tr, nrm2, tr_sq = float(trace(u)), float(np.sum(u * u)), float(np.trace(u @ u))
    pair = tr * tr / 2 - nrm2 / 4 - tr_sq / 4
    return {
        "sum_d1": tr,
        "pair_d1": pair,
        "lam_sum_d2": (nrm2 - tr_sq) / 2,
        "sumsq": (nrm2 + tr_sq) / 2,
        "sq_half_d2": nrm2,
        "s2_half_d2": pair + (nrm2 - tr_sq) / 2,
    }


def verify_sv_sums(lam: float, u, steps=DEFAULT_STEPS, best_only: bool = True) -> list[FdReport]:
    """Central differences of s1, s2, sq along lam*I + hU against their closed forms.

    ``sumsq`` (sum of squared first derivatives) is observed as sq''/2 - lam*s1''.
    """
    u = np.asarray(u, dtype=float)
    if frobenius_norm(u) == 0:
        raise DegenerateArgument("U must be nonzero")
    if lam <= 0:
        raise ValueError("lam must be positive")
    exact = expansion_values(u)

    def s1(h):
        return _sv_sums(lam * IDENTITY + h * u)[0]

    def s2(h):
        return _sv_sums(lam * IDENTITY + h * u)[1]

    def sq(h):
        return float(np.sum(singular_values(lam * IDENTITY + h * u) ** 2))

    groups: dict[str, list[FdReport]] = {k: [] for k in ("sum_d1", "lam_sum_d2", "sq_half_d2", "s2_half_d2", "sumsq")}
    for h in steps:
        s1pp = _d2(s1, h)
        groups["sum_d1"].append(FdReport.make("sum_d1", exact["sum_d1"], _d1(s1, h), h))
        groups["lam_sum_d2"].append(FdReport.make("lam_sum_d2", exact["lam_sum_d2"], lam * s1pp, h))
        sq_half = _d2(sq, h) / 2
        groups["sq_half_d2"].append(FdReport.make("sq_half_d2", exact["sq_half_d2"], sq_half, h))
        groups["s2_half_d2"].append(FdReport.make("s2_half_d2", exact["s2_half_d2"], _d2(s2, h) / 2, h))
        groups["sumsq"].append(FdReport.make("sumsq", exact["sumsq"], sq_half - lam * s1pp, h))
    if best_only:
        return [_best(g) for g in groups.values()]
    return [r for g in groups.values() for r in g]


def verify_P_expansion(lam: float, u, steps=DEFAULT_STEPS) -> list[FdReport]:
    """Residual (P(lam I + hU) - lam h tr U - h^2 tr cof U)/h^2 for each step; should shrink with h."""
    u = np.asarray(u, dtype=float)
    out = []
    for h in steps:
        resid = float(P(lam * IDENTITY + h * u, lam)) - lam * h * float(trace(u)) - h * h * float(trace_cof(u))
        out.append(FdReport.make("P_residual_over_h2", 0.0, resid / (h * h), h))
    return out


def verify_greenalder(a, lam: float) -> FdReport:
    """l1 l2 l3 against (l1-lam)(l2-lam)(l3-lam) + lam e2 - lam^2 e1 + lam^3.

    Exact identity, so ``step`` is 1 and the error is relative to max(1, l3^3, lam^3).
    """
    s = singular_values(a)
    e1, e2, e3 = (float(x) for x in _sym(s))
    hat = s - lam
    rhs = float(hat[0] * hat[1] * hat[2]) + lam * e2 - lam * lam * e1 + lam**3
    scale = max(1.0, float(s[2]) ** 3, lam**3)
    return FdReport("greenalder", e3, rhs, 1.0, abs(e3 - rhs) / scale)


def greenalder_batch(a, lam: float) -> np.ndarray:
    """Relative residual of the same identity over a stack of matrices."""
    s = singular_values(a)
    e1, e2, e3 = _sym(s)
    hat = s - lam
    rhs = hat[..., 0] * hat[..., 1] * hat[..., 2] + lam * e2 - lam * lam * e1 + lam**3
    return np.abs(e3 - rhs) / np.maximum(1.0, np.maximum(s[..., 2] ** 3, lam**3))


def tangency_ratios(lam: float, u, hs) -> np.ndarray:
    """|G(lam I + hU)| / h^3 for each h; bounded as h -> 0 since G is third-order flat at lam*I."""
    u = np.asarray(u, dtype=float)
    hs = np.asarray(hs, dtype=float)
    a = lam * IDENTITY + hs[:, None, None] * u
    return np.abs(G(a, lam)) / hs**3


def rank_one_slice(lam: float, a, t_grid) -> list[tuple[float, float, float]]:
    """(t, P(lam I + t a (x) e1), lam(|lam + t a_1| - lam)) for each t."""
    a = np.asarray(a, dtype=float)
    rows = []
    for t in t_grid:
        m = lam * IDENTITY + float(t) * np.outer(a, [1.0, 0.0, 0.0])
        rows.append((float(t), float(P(m, lam)), lam * (abs(lam + float(t) * a[0]) - lam)))
    return rows


def slice_midpoint_gap(lam: float, rng: RngStream, n: int = 1000, scale: float = 3.0) -> float:
    """min over random rank-one pairs of (P(X) + P(Y))/2 - P((X + Y)/2), X, Y on one rank-one line through lam*I.

    Nonnegative when P is convex along rank-one lines through lam*I.
    """
    gen = rng.generator
    a = gen.normal(size=(n, 3))
    nv = gen.normal(size=(n, 3))
    nv /= np.linalg.norm(nv, axis=1, keepdims=True)
    t = gen.uniform(-scale, scale, size=(n, 2))
    d = a[:, :, None] * nv[:, None, :]
    x = lam * IDENTITY + t[:, 0, None, None] * d
    y = lam * IDENTITY + t[:, 1, None, None] * d
    gap = 0.5 * (P(x, lam) + P(y, lam)) - P(0.5 * (x + y), lam)
    return float(np.min(gap))


def polyconvexity_counterexample(lam: float) -> np.ndarray:
    """A = t e1 (x) e1 with P(A) < (tr cof A - 3 lam^2)/2.

    P(A) = -lam t and cof A = 0, so any t > 3 lam / 2 works; t = 3 lam max(1, lam)
    gives diag(3,0,0) at lam = 1 and t = 12 at lam = 2.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    t = 3.0 * lam * max(1.0, lam)
    a = np.zeros((3, 3))
    a[0, 0] = t
    lhs = float(P(a, lam))
    rhs = 0.5 * (float(trace_cof(a)) - 3 * lam * lam)
    if not lhs < rhs:
        raise AssertionError(f"counterexample failed at lam={lam}: {lhs} >= {rhs}")
    return a


def counterexample_margin(lam: float) -> float:
    """(tr cof A - 3 lam^2)/2 - P(A) for the counterexample; positive means the inequality is violated."""
    a = polyconvexity_counterexample(lam)
    return 0.5 * (float(trace_cof(a)) - 3 * lam * lam) - float(P(a, lam))


# --- null Lagrangian quadrature ---------------------------------------------------


@dataclass(frozen=True)
class SineField:
    """psi(x) = sum_k c_k prod_d b(x_d), b(x) = exp(s_kd x) sin(m_kd pi x), vanishing on the unit cube boundary.

    The exponential tilt keeps the midpoint rule from integrating the products exactly
    (pure sine products cancel to rounding), so the O(n^-2) quadrature error is visible.
    """

    coeffs: np.ndarray  # (K, 3)
    modes: np.ndarray  # (K, 3) positive integers
    tilts: np.ndarray  # (K, 3)

    @classmethod
    def random(cls, rng: RngStream, terms: int = 4, max_mode: int = 3, amplitude: float = 0.1) -> "SineField":
        gen = rng.generator
        coeffs = gen.normal(scale=amplitude, size=(terms, 3))
        modes = gen.integers(1, max_mode + 1, size=(terms, 3))
        return cls(coeffs, modes, gen.uniform(-1.0, 1.0, size=(terms, 3)))

    @classmethod
    def zero(cls) -> "SineField":
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=int), np.zeros((0, 3)))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Analytic Jacobian at points x of shape (..., 3), returned as (..., 3, 3)."""
        out = np.zeros(x.shape[:-1] + (3, 3))
        for c, m, tilt in zip(self.coeffs, self.modes, self.tilts):
            arg = np.pi * m * x
            ex = np.exp(tilt * x)
            b = ex * np.sin(arg)
            db = ex * (tilt * np.sin(arg) + np.pi * m * np.cos(arg))
            for j in range(3):
                dj = db[..., j]
                for k in range(3):
                    if k != j:
                        dj = dj * b[..., k]
                out[..., :, j] += c * dj[..., None]
        return out


def _n_shifted(f, lam):
    # N(lam I + B) = lam tr B + tr cof B, evaluated without the 3 lam^2 cancellation
    b = f - lam * IDENTITY
    return lam * trace(b) + trace_cof(b)


def quadrature_integrals(lam: float, n: int, field: SineField, which=("N", "P", "G")) -> dict[str, float]:
    """Midpoint-rule integrals of N, P and G of grad u, u = lam x + psi, over the unit cube.

    Sums run slab by slab along x1 in index order, so the result does not depend on
    how the work is split.
    """
    if n < 8:
        raise ValueError("n must be >= 8")
    c = (np.arange(n) + 0.5) / n
    yz = np.stack(np.meshgrid(c, c, indexing="ij"), axis=-1).reshape(-1, 2)
    fns = {"N": _n_shifted, "P": P, "G": G}
    tot = {k: 0.0 for k in which}
    for x1 in c:
        pts = np.column_stack([np.full(len(yz), x1), yz])
        f = lam * IDENTITY + field.gradient(pts)
        for k in which:
            tot[k] += float(np.sum(fns[k](f, lam)))
    w = 1.0 / n**3
    return {k: v * w for k, v in tot.items()}


def null_lagrangian_quadrature(lam: float, n: int, rng: RngStream, terms: int = 4) -> float:
    """Midpoint integral of N(grad u) for a random sine perturbation; zero up to O(n^-2). terms=0 gives psi = 0."""
    if n < 8:
        raise ValueError("n must be >= 8")
    field = SineField.zero() if terms == 0 else SineField.random(rng, terms)
    return quadrature_integrals(lam, n, field, which=("N",))["N"]
