"""Random-restart Polak-Ribiere conjugate-gradient ascent of m_l(., lam).

Restarts are advanced in lock-step as a batch (one numpy call evaluates every
active restart), in fixed-size chunks. A chunk's result depends only on its
restart indices, so any number of worker processes gives bit-identical output.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateArgument
from .mat3core import IDENTITY, RngStream, random_matrix
from .paperfn import Variant, dist_to_stretch, m_l

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
CHUNK = 128  # restarts per batch; fixed so results never depend on the worker count
TOP_K = 15
MAX_RADIUS = 1e12  # cap on |A - lam I|; m_2 approaches its supremum only at infinity
RESET_EVERY = 9


@dataclass
class AscentResult:
    maximizer: np.ndarray
    value: float
    iterations: int
    converged: bool
    start_was_symmetric: bool = False
    restart_index: int = -1


@dataclass
class SupEstimate:
    lam: float
    l: int
    variant: str
    value: float
    top_k: list[AscentResult] = field(default_factory=list)
    c1_spread: tuple[float, float] = (math.nan, math.nan)
    restarts: int = 0
    n_converged: int = 0

    @property
    def maximizer(self) -> np.ndarray:
        return self.top_k[0].maximizer

    @property
    def c1(self) -> float:
        return float(dist_to_stretch(self.maximizer, self.lam))


# --- batched value / gradient ---------------------------------------------


def _numer(g, variant):
    return np.abs(g) if variant == "abs" else np.maximum(-g, 0.0)


def _batch_value(a, lam, l, variant):
    """m_l on a stack (n, 3, 3); NaN (from A = lam I) is mapped to -inf."""
    s = np.linalg.svd(a, compute_uv=False)
    e1 = s[:, 0] + s[:, 1] + s[:, 2]
    e2 = s[:, 0] * s[:, 1] + s[:, 0] * s[:, 2] + s[:, 1] * s[:, 2]
    tr = a[:, 0, 0] + a[:, 1, 1] + a[:, 2, 2]
    tr_sq = np.einsum("nij,nji->n", a, a)
    g = (e2 - 0.5 * (tr * tr - tr_sq)) + lam * (tr - e1)
    d = a - lam * IDENTITY
    r2 = np.einsum("nij,nij->n", d, d)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = _numer(g, variant) / r2 ** (0.5 * l)
    return np.where(np.isfinite(v), v, -np.inf)


def _batch_grad(a, lam, l, variant):
    """Analytic gradient of m_l with a central-difference fallback near the kinks.

    The symmetric functions sum(l_i) and sum_{i<j} l_i l_j are smooth wherever A
    is nonsingular (grad sum(l_i) = U V^T, the polar factor), including at
    coincident singular values, so the only true kinks are det A = 0 and G = 0.
    """
    u, s, vh = np.linalg.svd(a)
    e1 = s[:, 0] + s[:, 1] + s[:, 2]
    e2 = s[:, 0] * s[:, 1] + s[:, 0] * s[:, 2] + s[:, 1] * s[:, 2]
    tr = a[:, 0, 0] + a[:, 1, 1] + a[:, 2, 2]
    tr_sq = np.einsum("nij,nji->n", a, a)
    g = (e2 - 0.5 * (tr * tr - tr_sq)) + lam * (tr - e1)
    polar = u @ vh
    at = np.swapaxes(a, -1, -2)
    grad_p = (e1 - lam)[:, None, None] * polar - a
    grad_n = (tr - lam)[:, None, None] * IDENTITY - at
    grad_g = grad_p - grad_n
    d = a - lam * IDENTITY
    r = np.sqrt(np.einsum("nij,nij->n", d, d))
    if variant == "abs":
        num, dnum = np.abs(g), np.sign(g)[:, None, None] * grad_g
    else:
        neg = g < 0
        num, dnum = np.where(neg, -g, 0.0), np.where(neg[:, None, None], -grad_g, 0.0)
    grad = dnum / (r**l)[:, None, None] - (l * num / r ** (l + 2))[:, None, None] * d

    kink = (s[:, 2] < 1e-6 * np.maximum(1.0, s[:, 0])) | (np.abs(g) < 1e-10)
    if np.any(kink):
        grad[kink] = _fd_grad(a[kink], lam, l, variant)
    return grad


def _fd_grad(a, lam, l, variant):
    n = a.shape[0]
    step = 1e-6 * np.maximum(1.0, np.sqrt(np.einsum("nij,nij->n", a, a)))
    out = np.empty_like(a)
    for k in range(9):
        i, j = divmod(k, 3)
        ap, am = a.copy(), a.copy()
        ap[:, i, j] += step
        am[:, i, j] -= step
        out[:, i, j] = (_batch_value(ap, lam, l, variant) - _batch_value(am, lam, l, variant)) / (2 * step)
    return out.reshape(n, 3, 3)


def grad_m(a, lam: float, l: int = 3, variant: Variant = "abs") -> np.ndarray:
    """Gradient of m_l at A (single matrix or stack)."""
    arr = np.asarray(a, dtype=float)
    single = arr.ndim == 2
    stack = arr.reshape(-1, 3, 3)
    if np.any(dist_to_stretch(stack, lam) < 1e-14 * max(1.0, lam)):
        raise DegenerateArgument("gradient undefined at A = lam*I")
    g = _batch_grad(stack, lam, l, variant)
    return g[0] if single else g.reshape(arr.shape)


# --- line search ------------------------------------------------------------


def _line_max(a, d, f0, lam, l, variant, max_doublings=60, golden_iters=52):
    """Maximise sigma -> m(A + sigma d) for each row; d has unit norm per row.

    Bracket by doubling sigma from a row-dependent unit max(1, |A - lam I|)
    until the value drops (or MAX_RADIUS is reached), then golden-section
    search on the last three-point bracket. Returns the best sigma found and
    its value; rows with no improvement get sigma = 0 and f0.
    """
    n = a.shape[0]
    unit = np.maximum(1.0, np.sqrt(np.einsum("nij,nij->n", a - lam * IDENTITY, a - lam * IDENTITY)))

    def f(sig):
        return _batch_value(a + sig[:, None, None] * d, lam, l, variant)

    prev2 = np.zeros(n)
    prev = np.zeros(n)
    fprev = f0.copy()
    best_sig = np.zeros(n)
    best_f = f0.copy()
    cur = unit.copy()
    growing = np.ones(n, dtype=bool)
    lo = np.zeros(n)
    hi = unit.copy()
    for _ in range(max_doublings):
        if not growing.any():
            break
        idx = np.flatnonzero(growing)
        fc = _batch_value(a[idx] + cur[idx, None, None] * d[idx], lam, l, variant)
        better = fc > best_f[idx]
        best_f[idx[better]] = fc[better]
        best_sig[idx[better]] = cur[idx[better]]
        dropped = fc < fprev[idx]
        # |A + sigma d - lam I| <= unit + sigma
        capped = unit[idx] + cur[idx] >= MAX_RADIUS
        stop = dropped | capped
        lo[idx[stop]] = prev2[idx[stop]]
        hi[idx[stop]] = cur[idx[stop]]
        growing[idx[stop]] = False
        go = idx[~stop]
        prev2[go] = prev[go]
        prev[go] = cur[go]
        fprev[go] = fc[~stop]
        cur[go] = 2.0 * cur[go]
    lo[growing] = prev2[growing]
    hi[growing] = prev[growing]

    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(golden_iters):
        right = f1 < f2  # maximum lies in [x1, hi]
        lo = np.where(right, x1, lo)
        hi = np.where(right, hi, x2)
        nx1 = np.where(right, x2, hi - GOLDEN * (hi - lo))
        nx2 = np.where(right, lo + GOLDEN * (hi - lo), x1)
        fnew = f(np.where(right, nx2, nx1))
        f1, f2 = np.where(right, f2, fnew), np.where(right, fnew, f1)
        x1, x2 = nx1, nx2
    for x, fx in ((x1, f1), (x2, f2)):
        better = fx > best_f
        best_f = np.where(better, fx, best_f)
        best_sig = np.where(better, x, best_sig)
    return best_sig, best_f


# --- conjugate gradient ------------------------------------------------------


def _stop_rule(m_new, m_old, eps):
    return np.abs(m_new - m_old) <= 0.5 * eps * (np.abs(m_new) + np.abs(m_old))


def cg_batch(starts, lam, l=3, variant="abs", epsilon=1e-9, max_iter=10_000):
    """Run independent ascents from each start in lock-step.

    Returns (maximizers, values, iterations, converged) arrays.
    """
    a = np.array(starts, dtype=float).reshape(-1, 3, 3)
    n = a.shape[0]
    val = _batch_value(a, lam, l, variant)
    grad = _batch_grad(a, lam, l, variant)
    direc = grad.copy()
    iters = np.zeros(n, dtype=int)
    converged = np.zeros(n, dtype=bool)
    active = np.ones(n, dtype=bool)
    since_reset = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        d = direc[idx]
        dn = np.sqrt(np.einsum("nij,nij->n", d, d))
        flat = dn == 0
        if flat.any():
            converged[idx[flat]] = True
            active[idx[flat]] = False
            idx, d, dn = idx[~flat], d[~flat], dn[~flat]
            if idx.size == 0:
                break
        d = d / dn[:, None, None]
        sig, fnew = _line_max(a[idx], d, val[idx], lam, l, variant)
        moved = fnew > val[idx]
        iters[idx] += 1
        # no improvement along the search line: a stationary point to working precision
        stuck = idx[~moved]
        converged[stuck] = iters[stuck] > 1
        active[stuck] = False

        mv = idx[moved]
        old = val[mv]
        a[mv] = a[mv] + sig[moved][:, None, None] * d[moved]
        val[mv] = fnew[moved]
        done = _stop_rule(val[mv], old, epsilon)
        converged[mv[done]] = True
        active[mv[done]] = False

        cont = mv[~done]
        if cont.size == 0:
            continue
        g_new = _batch_grad(a[cont], lam, l, variant)
        g_old = grad[cont]
        num = np.einsum("nij,nij->n", g_new, g_new - g_old)
        den = np.einsum("nij,nij->n", g_old, g_old)
        with np.errstate(divide="ignore", invalid="ignore"):
            beta = np.where(den > 0, num / den, 0.0)
        since_reset[cont] += 1
        reset = (beta < 0) | (since_reset[cont] >= RESET_EVERY)
        beta = np.where(reset, 0.0, beta)
        since_reset[cont[reset]] = 0
        new_dir = g_new + beta[:, None, None] * direc[cont]
        # keep an ascent direction
        uphill = np.einsum("nij,nij->n", new_dir, g_new) > 0
        new_dir = np.where(uphill[:, None, None], new_dir, g_new)
        direc[cont] = new_dir
        grad[cont] = g_new
    return a, val, iters, converged


def cg_ascend(start, lam: float, l: int = 3, variant: Variant = "abs", epsilon: float = 1e-9, max_iter: int = 10_000) -> AscentResult:
    """Single Polak-Ribiere ascent from ``start``.

    A start from which the first line search cannot improve comes back with
    ``converged=False`` and the start as maximiser.
    """
    start = np.asarray(start, dtype=float)
    if dist_to_stretch(start, lam) < 1e-14 * max(1.0, lam):
        raise DegenerateArgument("start must differ from lam*I")
    a, v, it, conv = cg_batch(start[None], lam, l, variant, epsilon, max_iter)
    return AscentResult(
        maximizer=a[0],
        value=float(m_l(a[0], lam, l, variant)),
        iterations=int(it[0]),
        converged=bool(conv[0]),
        start_was_symmetric=bool(np.array_equal(start, start.T)),
    )


# --- random restarts -----------------------------------------------------------


def restart_start(seed: int, index: int, alpha: float) -> tuple[np.ndarray, bool]:
    """Start matrix for restart ``index``: even indices symmetric, odd ones general."""
    symmetric = index % 2 == 0
    return random_matrix(RngStream(seed, index), alpha, symmetric=symmetric), symmetric


def _run_chunk(args):
    lam, l, variant, seed, alpha, lo, hi, epsilon, max_iter, top_k = args
    starts, syms = zip(*(restart_start(seed, i, alpha) for i in range(lo, hi)))
    a, v, it, conv = cg_batch(np.stack(starts), lam, l, variant, epsilon, max_iter)
    order = sorted(range(hi - lo), key=lambda k: (-v[k], k))[:top_k]
    results = [
        AscentResult(a[k].copy(), float(v[k]), int(it[k]), bool(conv[k]), bool(syms[k]), lo + k) for k in order
    ]
    return results, int(conv.sum())


def estimate_M(
    lam: float,
    l: int = 3,
    variant: Variant = "abs",
    restarts: int = 5000,
    alpha: float = 5.0,
    seed: int = 0,
    *,
    workers: int = 1,
    top_k: int = TOP_K,
    epsilon: float = 1e-9,
    max_iter: int = 10_000,
) -> SupEstimate:
    """Best value of m_l over ``restarts`` seeded ascents, keeping the top ``top_k`` maximisers."""
    if restarts < 2:
        raise ValueError("need at least two restarts")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    jobs = [
        (lam, l, variant, seed, alpha, lo, min(lo + CHUNK, restarts), epsilon, max_iter, top_k)
        for lo in range(0, restarts, CHUNK)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    pool_results = [r for res, _ in parts for r in res]
    pool_results.sort(key=lambda r: (-r.value, r.restart_index))
    best = pool_results[:top_k]
    radii = [float(dist_to_stretch(r.maximizer, lam)) for r in best]
    return SupEstimate(
        lam=lam,
        l=l,
        variant=variant,
        value=best[0].value,
        top_k=best,
        c1_spread=(min(radii), max(radii)),
        restarts=restarts,
        n_converged=sum(c for _, c in parts),
    )


def estimate_c1(
    lam: float,
    variant: Variant = "abs",
    restarts: int = 5000,
    alpha: float = 5.0,
    seed: int = 0,
    *,
    workers: int = 1,
) -> tuple[float, tuple[float, float], SupEstimate]:
    """c1(lam) = |A*_3 - lam I| for the best m_3 maximiser, with the top-15 spread."""
    est = estimate_M(lam, 3, variant, restarts, alpha, seed, workers=workers)
    return est.c1, est.c1_spread, est
