"""Scalar functions of a 3x3 matrix at boundary stretch ``lam``.

All functions broadcast over stacks ``(..., 3, 3)``. Singular values are
always taken in ascending order, lambda_1 <= lambda_2 <= lambda_3.

    P(A)  = sum_{i<j} l_i l_j - lam * sum_i l_i
    N(A)  = tr cof A - lam tr A           (null Lagrangian)
    G(A)  = P(A) - N(A)                   (vanishes to third order at lam*I)
    H(A)  = prod_i (l_i - lam) + lam G(A)
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import DegenerateArgument, NotARotation, ParamRange
from .mat3core import IDENTITY, frobenius_norm, is_rotation, singular_values, trace, trace_cof

Variant = Literal["abs", "neg"]

SQRT2 = math.sqrt(2.0)
# the maximiser of K on the unit sphere
A0 = np.diag([-0.5, -0.5, 1.0 / SQRT2])


def _sym(sigma):
    """Elementary symmetric sums (e1, e2, e3) of a trailing 3-vector."""
    s1, s2, s3 = sigma[..., 0], sigma[..., 1], sigma[..., 2]
    return s1 + s2 + s3, s1 * s2 + s1 * s3 + s2 * s3, s1 * s2 * s3


def P(a, lam: float):
    e1, e2, _ = _sym(singular_values(a))
    return e2 - lam * e1


def N(a, lam: float):
    a = np.asarray(a, dtype=float)
    return trace_cof(a) - lam * trace(a)


def G(a, lam: float):
    a = np.asarray(a, dtype=float)
    e1, e2, _ = _sym(singular_values(a))
    return (e2 - trace_cof(a)) + lam * (trace(a) - e1)


def G_minus(a, lam: float):
    return np.maximum(-G(a, lam), 0.0)


def dist_to_stretch(a, lam: float):
    """|A - lam*I|."""
    return frobenius_norm(np.asarray(a, dtype=float) - lam * IDENTITY)


def _numerator(g, variant: Variant):
    if variant == "abs":
        return np.abs(g)
    if variant == "neg":
        return np.maximum(-g, 0.0)
    raise ValueError(f"unknown variant {variant!r}")


def m_l(a, lam: float, l: int = 3, variant: Variant = "abs"):
    """|G(A)| / |A - lam I|^l (or G^-(A) / ... for ``variant='neg'``)."""
    if l not in (2, 3):
        raise ValueError("l must be 2 or 3")
    r = dist_to_stretch(a, lam)
    if np.any(r < 1e-14 * max(1.0, lam)):
        raise DegenerateArgument("m_l is undefined at A = lam*I")
    return _numerator(G(a, lam), variant) / r**l


@dataclass(frozen=True)
class RationalProfile:
    """G(A, lam) = a1 + a2 lam and |A - lam I|^2 = b1 + b2 lam + b3 lam^2.

    Fields may be scalars or equal-length arrays (one entry per cached matrix).
    """

    a1: np.ndarray | float
    a2: np.ndarray | float
    b1: np.ndarray | float
    b2: np.ndarray | float
    b3: np.ndarray | float = 3.0

    def __len__(self) -> int:
        return int(np.size(self.a1))

    def take(self, idx) -> "RationalProfile":
        return RationalProfile(*(np.asarray(f)[idx] for f in (self.a1, self.a2, self.b1, self.b2)), self.b3)


def rational_profile(a) -> RationalProfile:
    a = np.asarray(a, dtype=float)
    e1, e2, _ = _sym(singular_values(a))
    tr = trace(a)
    return RationalProfile(
        a1=e2 - trace_cof(a),
        a2=tr - e1,
        b1=np.sum(a * a, axis=(-2, -1)),
        b2=-2.0 * tr,
        b3=3.0,
    )


def eval_profile(p: RationalProfile, lam: float, l: int = 3, variant: Variant = "abs"):
    den = p.b1 + p.b2 * lam + p.b3 * lam * lam
    if np.any(den <= 0):
        raise DegenerateArgument("profile denominator vanishes (A = lam*I)")
    return _numerator(p.a1 + p.a2 * lam, variant) / den ** (0.5 * l)


def K_hat(a):
    """K on the unit sphere: sum_{i<j} l_i l_j - tr cof, evaluated at A/|A|. Maximum sqrt(2)."""
    a = np.asarray(a, dtype=float)
    nrm = frobenius_norm(a)
    if np.any(nrm == 0):
        raise DegenerateArgument("K_hat needs A != 0")
    ah = a / np.asarray(nrm)[..., None, None]
    _, e2, _ = _sym(singular_values(ah))
    return e2 - trace_cof(ah)


def alpha_beta_gamma(a, lam: float):
    s = singular_values(a)
    l1, l2, l3 = s[..., 0], s[..., 1], s[..., 2]
    return l2 * l3 - lam * l1, l1 * l3 - lam * l2, l1 * l2 - lam * l3


def g_of_R(r, abc) -> float:
    """(1 - R11) alpha + (1 - R22) beta + (1 - R33) gamma for a rotation R."""
    r = np.asarray(r, dtype=float)
    if not is_rotation(r):
        raise NotARotation("g_of_R expects R in SO(3)")
    alpha, beta, gamma = abc
    return (1 - r[..., 0, 0]) * alpha + (1 - r[..., 1, 1]) * beta + (1 - r[..., 2, 2]) * gamma


def H(a, lam: float):
    a = np.asarray(a, dtype=float)
    s = singular_values(a)
    hat = s - lam
    e1, e2, _ = _sym(s)
    g = (e2 - trace_cof(a)) + lam * (trace(a) - e1)
    return hat[..., 0] * hat[..., 1] * hat[..., 2] + lam * g


# --- stored energy pieces ---------------------------------------------------


def kappa_bounds(q: float) -> tuple[float, float]:
    """Admissible range 2^(2-q) <= kappa <= q 2^(1-q)."""
    return 2.0 ** (2 - q), q * 2.0 ** (1 - q)


@dataclass(frozen=True)
class MaterialParams:
    q: float
    kappa: float
    hprime: float = 0.0  # h'(lam^3)

    def __post_init__(self):
        if not 2 < self.q < 3:
            raise ParamRange(f"q must lie in (2, 3), got {self.q}")
        lo, hi = kappa_bounds(self.q)
        if not lo - 1e-12 <= self.kappa <= hi + 1e-12:
            raise ParamRange(f"kappa={self.kappa} outside [{lo:.6g}, {hi:.6g}]")
        if self.hprime < 0:
            raise ParamRange("h'(lam^3) must be nonnegative")


def default_h(t):
    """h(t) = t + 1/t for t > 0, +inf otherwise."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(t > 0, t + 1.0 / np.where(t > 0, t, 1.0), np.inf)
    return out[()] if out.ndim == 0 else out


def default_hprime(t):
    t = np.asarray(t, dtype=float)
    out = 1.0 - 1.0 / (t * t)
    return out[()] if out.ndim == 0 else out


def F1(sigma, lam: float, mat: MaterialParams):
    """(kappa/2)|Lambda - Lambda_0|^q + h'(lam^3) prod_i (l_i - lam)."""
    sigma = np.asarray(sigma, dtype=float)
    hat = sigma - lam
    dist = np.sqrt(np.sum(hat * hat, axis=-1))
    return 0.5 * mat.kappa * dist**mat.q + mat.hprime * hat[..., 0] * hat[..., 1] * hat[..., 2]


def F2(a, lam: float, mat: MaterialParams):
    """(kappa/2)|A - lam I|^q + lam h'(lam^3) G(A)."""
    return 0.5 * mat.kappa * dist_to_stretch(a, lam) ** mat.q + lam * mat.hprime * G(a, lam)


def stored_energy(a, mat: MaterialParams, h: Callable = default_h):
    """W(A) = |A|^q + h(det A), +inf when det A <= 0 (the cofactor term is taken to be zero)."""
    a = np.asarray(a, dtype=float)
    det = np.linalg.det(a)
    hv = np.where(det > 0, h(np.where(det > 0, det, 1.0)), np.inf)
    out = frobenius_norm(a) ** mat.q + hv
    return out[()] if np.ndim(out) == 0 else out
