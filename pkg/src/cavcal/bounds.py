"""Post-processing: model fits, the c* fixed point, the explicit lam bound,
and sampled checks of the lower bounds on g(R) and H(A).

Supremum constants enter through injected handles ``M(lam, c0) -> float`` so
that the same code runs on conjectured constants or on sampled estimates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateGrid, EmptyGrid, NegativeWeight, NoBracket, NonpositiveDeterminant, OrderViolation, ParamRange
from .mat3core import RngStream, determinant, random_rotation
from .paperfn import SQRT2, MaterialParams, H, dist_to_stretch, default_hprime, singular_values

MHandle = Callable[[float, float], float]

# fitted constants as reported alongside the tables
NU1 = 0.4501
NU2 = 1.764e-3
NU3 = 1.842
NU1_NEG = 0.1923


# --- least-squares fits ---------------------------------------------------------


@dataclass
class FitResult:
    model: str  # "inverse": nu/lam, "affine": nu2 + nu3*lam
    coefficients: list[float]
    max_abs_deviation: float
    grid: list[tuple[float, float]]

    def predict(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.model == "inverse":
            return self.coefficients[0] / lam
        return self.coefficients[0] + self.coefficients[1] * lam

    @property
    def argmax_deviation(self) -> float:
        lam, val = np.array(self.grid).T
        return float(lam[np.argmax(np.abs(self.predict(lam) - val))])


def _as_grid(grid) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(grid, dtype=float).reshape(-1, 2)
    if arr.shape[0] < 2:
        raise EmptyGrid("need at least two (lam, value) points")
    return arr[:, 0], arr[:, 1]


def fit_inverse(grid) -> FitResult:
    """Least-squares nu for value ~ nu/lam: nu = sum(v/lam) / sum(1/lam^2)."""
    lam, val = _as_grid(grid)
    if np.any(lam <= 0):
        raise ValueError("lam must be positive")
    nu = float(np.sum(val / lam) / np.sum(1.0 / lam**2))
    dev = float(np.max(np.abs(nu / lam - val)))
    return FitResult("inverse", [nu], dev, list(zip(lam.tolist(), val.tolist())))


def fit_affine(grid) -> FitResult:
    """Ordinary least squares for value ~ nu2 + nu3*lam."""
    lam, val = _as_grid(grid)
    if np.ptp(lam) == 0:
        raise DegenerateGrid("all lam values coincide")
    design = np.column_stack([np.ones_like(lam), lam])
    (nu2, nu3), *_ = np.linalg.lstsq(design, val, rcond=None)
    dev = float(np.max(np.abs(nu2 + nu3 * lam - val)))
    return FitResult("affine", [float(nu2), float(nu3)], dev, list(zip(lam.tolist(), val.tolist())))


# --- supremum handles ---------------------------------------------------------------


def conjecture_handles(nu1: float = NU1, nu2: float = NU2, nu3: float = NU3) -> tuple[MHandle, MHandle]:
    """M2 = sqrt(2); M3 = nu1/lam once c0 >= c1(lam) = nu2 + nu3*lam.

    Below c1 the restricted M3 is not known in closed form; it is modelled as
    the linear ramp (nu1/lam) * c0/c1, which is nondecreasing and only matters
    when the fixed point falls below c1 (it does not for lam >= 1).
    """

    def m2(lam: float, c0: float) -> float:
        return SQRT2

    def m3(lam: float, c0: float) -> float:
        c1 = nu2 + nu3 * lam
        return (nu1 / lam) * min(1.0, c0 / c1)

    return m2, m3


def sampled_handles(profiles) -> tuple[MHandle, MHandle]:
    """Handles backed by grid-method profiles, restricted to the shells |A - lam I| >= c0 / < c0."""
    from .gridsup import ball_supremum

    def m2(lam: float, c0: float) -> float:
        return ball_supremum(profiles, lam, c0, 2, "abs")

    def m3(lam: float, c0: float) -> float:
        return ball_supremum(profiles, lam, c0, 3, "abs")

    return m2, m3


def xi_profile(c0: float, lam: float, q: float, m2: MHandle, m3: MHandle) -> tuple[float, float, float]:
    """f1 = c0^(q-2)/M2, f2 = c0^(q-3)/M3 and xi = max(f1, f2)."""
    if c0 <= 0:
        raise ValueError("c0 must be positive")
    f1 = c0 ** (q - 2) / m2(lam, c0)
    f2 = c0 ** (q - 3) / m3(lam, c0)
    return f1, f2, max(f1, f2)


def fixed_point_cstar(lam: float, m2: MHandle, m3: MHandle, tol: float = 1e-10) -> float:
    """Unique c with M2(lam, c)/M3(lam, c) = c, by bisection on p(c) - c (a decreasing function)."""

    def h(c):
        top, bottom = m2(lam, c), m3(lam, c)
        # an empty sampled shell gives M3 = 0, read as p = +inf
        return (math.inf if bottom == 0 else top / bottom) - c

    lo = hi = 1.0
    if h(1.0) > 0:
        while h(hi) > 0:
            lo, hi = hi, hi * 2.0
            if hi > 1e6:
                raise NoBracket("p(c) - c keeps its sign up to c = 1e6")
    else:
        while h(lo) <= 0:
            if h(lo) == 0:
                return lo
            hi, lo = lo, lo / 2.0
            if lo < 1e-6:
                raise NoBracket("p(c) - c keeps its sign down to c = 1e-6")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi) * 1e-3:
            break
    # with step-like sampled handles p may jump at c*, so |p(c*) - c*| is only small for continuous handles
    return 0.5 * (lo + hi)


# --- the explicit bound -------------------------------------------------------------


def _check_q(q):
    if not 2 < q < 3:
        raise ParamRange(f"q must lie in (2, 3), got {q}")


def est1_term(q: float, kappa: float) -> float:
    """(kappa/2) (q-2)^((2-q)/2) q^(q/2)."""
    return 0.5 * kappa * (q - 2) ** ((2 - q) / 2) * q ** (q / 2)


@dataclass
class BoundReport:
    q: float
    kappa: float
    lam: float
    term_est1: float
    term_cstar: float
    rhs: float
    cstar: float
    exponent_convention: str = "M2^(q-3) M3^(2-q)"

    @property
    def satisfied_for_hprime(self) -> float:
        """Largest admissible value of lam^(3-q) h'(lam^3)."""
        return self.rhs

    def admits(self, hprime: float) -> bool:
        """True when 0 <= lam^(3-q) h'(lam^3) <= rhs for the given h'(lam^3)."""
        v = self.lam ** (3 - self.q) * hprime
        return 0 <= v <= self.rhs


def lambda_bound(q: float, kappa: float, lam: float, nu1: float = NU1, m2: MHandle | None = None, m3: MHandle | None = None) -> BoundReport:
    """Both terms of the upper bound on lam^(3-q) h'(lam^3) and their minimum.

    With no handles the conjectured constants are used (M2 = sqrt 2, M3 = nu1/lam),
    giving a c* term (kappa/2) sqrt(2)^(q-3) nu1^(2-q) independent of lam.
    """
    _check_q(q)
    if m2 is None or m3 is None:
        m2, m3 = conjecture_handles(nu1)
    cstar = fixed_point_cstar(lam, m2, m3)
    term_c = 0.5 * kappa * lam ** (2 - q) * m2(lam, cstar) ** (q - 3) * m3(lam, cstar) ** (2 - q)
    term_1 = est1_term(q, kappa)
    return BoundReport(q, kappa, lam, term_1, term_c, min(term_1, term_c), cstar)


def lambda_zero(q: float, kappa: float, nu1: float = NU1, hprime: Callable = default_hprime, lam_max: float = 100.0) -> float:
    """Largest lam >= 1 with lam^(3-q) h'(lam^3) <= the bound, for a given h'.

    Uses the lam-independent conjectured bound; requires lam^(3-q) h'(lam^3)
    to cross it once on [1, lam_max].
    """
    rhs = lambda_bound(q, kappa, 1.0, nu1).rhs

    def excess(lam):
        return lam ** (3 - q) * hprime(lam**3) - rhs

    if excess(1.0) > 0:
        raise NoBracket("bound already violated at lam = 1")
    if excess(lam_max) <= 0:
        raise NoBracket(f"bound still satisfied at lam = {lam_max}")
    return float(brentq(excess, 1.0, lam_max, xtol=1e-14))


def kappa_for_mode(q: float, mode: str, value: float | None = None) -> float:
    lo, hi = 2.0 ** (2 - q), q * 2.0 ** (1 - q)
    if mode == "min":
        return lo
    if mode == "max":
        return hi
    if mode == "value":
        if value is None or not lo - 1e-12 <= value <= hi + 1e-12:
            raise ParamRange(f"kappa must lie in [{lo:.6g}, {hi:.6g}]")
        return float(value)
    raise ParamRange(f"unknown kappa mode {mode!r}")


def zy_compare(q: float, nu: float) -> tuple[float, float, bool]:
    """z(q) = sqrt(2)^(q-3) nu^(2-q) against y(q) = (q-2)^((2-q)/2) q^(q/2); y(2) is the limit 2."""
    if not 2 <= q <= 3:
        raise ParamRange("q must lie in [2, 3]")
    z = SQRT2 ** (q - 3) * nu ** (2 - q)
    y = 2.0 if q == 2 else (q - 2) ** ((2 - q) / 2) * q ** (q / 2)
    return z, y, z < y


# --- inequality checks at the stretch -------------------------------------------------------


def _diag_candidates():
    return [np.diag(d) for d in ((1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0))]


def g_values(rotations, abc) -> np.ndarray:
    """g(R) for a stack of rotations (no membership check; callers sample SO(3) directly)."""
    r = np.asarray(rotations, dtype=float)
    a, b, c = abc
    return (1 - r[..., 0, 0]) * a + (1 - r[..., 1, 1]) * b + (1 - r[..., 2, 2]) * c


def g_bound_check(abc, samples: int, rng: RngStream) -> tuple[float, float, bool]:
    """Sampled min of g over Haar rotations plus the four diagonal candidates, vs min{2(beta+gamma), 0}."""
    a, b, c = (float(x) for x in abc)
    if a < b or b < c:
        raise OrderViolation("need alpha >= beta >= gamma")
    bound = min(2 * (b + c), 0.0)
    rots = random_rotation(rng, samples)
    emp = float(min(g_values(rots, (a, b, c)).min(), g_values(np.stack(_diag_candidates()), (a, b, c)).min()))
    scale = max(1.0, abs(a), abs(b), abs(c))
    return emp, bound, emp >= bound - 1e-12 * scale


def symmetric_rotations(rng: RngStream, samples: int) -> np.ndarray:
    """Q^T D Q with Haar Q and D drawn from the four proper diagonal sign matrices."""
    q = random_rotation(rng, samples)
    d = np.stack(_diag_candidates())[rng.generator.integers(0, 4, size=samples)]
    return np.swapaxes(q, -1, -2) @ d @ q


def mintrace_check(rng: RngStream, samples: int) -> bool:
    """Every sampled symmetric rotation has trace in [-1, 3]."""
    tr = np.trace(symmetric_rotations(rng, samples), axis1=-2, axis2=-1)
    return bool(np.all((tr >= -1 - 1e-12) & (tr <= 3 + 1e-12)))


def bartok_check(a, lam: float) -> tuple[float, float, str, bool]:
    """H(A) against (l1-lam)(l2-lam)(l3-lam) if l1 >= lam, else (l1-lam)(l2+lam)(l3+lam)."""
    a = np.asarray(a, dtype=float)
    if determinant(a) <= 0:
        raise NonpositiveDeterminant("the H lower bound is checked for det A > 0 only")
    l1, l2, l3 = singular_values(a)
    hv = float(H(a, lam))
    if l1 >= lam:
        branch, bound = "l1>=lam", (l1 - lam) * (l2 - lam) * (l3 - lam)
    else:
        branch, bound = "l1<=lam", (l1 - lam) * (l2 + lam) * (l3 + lam)
    scale = max(1.0, lam, l3) ** 3
    return hv, float(bound), branch, hv >= bound - 1e-10 * scale


def bartok_batch(a, lam: float) -> np.ndarray:
    """Vectorised margin H(A) - bound(A) for a stack of det-positive matrices."""
    a = np.asarray(a, dtype=float)
    s = singular_values(a)
    hv = H(a, lam)
    below = (s[..., 0] - lam) * (s[..., 1] + lam) * (s[..., 2] + lam)
    above = (s[..., 0] - lam) * (s[..., 1] - lam) * (s[..., 2] - lam)
    return hv - np.where(s[..., 0] >= lam, above, below)


def cornishelm_report(samples: Sequence[tuple[float, np.ndarray]], lam: float, mat: MaterialParams) -> tuple[float, float]:
    """Weighted sums of the two sides of the necessary condition for I(u) <= I(u_lam).

    lhs sums h'(l1-lam)(l2-lam)(l3-lam) + kappa|A - lam I|^q over samples with l1 >= lam;
    rhs sums h'(lam - l1)(lam + l2)(lam + l3) over samples with l1 <= lam.
    """
    lhs = rhs = 0.0
    for w, a in samples:
        if w < 0:
            raise NegativeWeight("quadrature weights must be nonnegative")
        l1, l2, l3 = singular_values(a)
        if l1 >= lam:
            lhs += w * (mat.hprime * (l1 - lam) * (l2 - lam) * (l3 - lam) + mat.kappa * float(dist_to_stretch(a, lam)) ** mat.q)
        if l1 <= lam:
            rhs += w * mat.hprime * (lam - l1) * (lam + l2) * (lam + l3)
    return float(lhs), float(rhs)
