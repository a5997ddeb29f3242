"""Pointwise supremum of m_l over cached rational profiles (the grid method).

Each random matrix A_i is reduced once to five coefficients with
G(A_i, lam) = a1 + a2 lam and |A_i - lam I|^2 = b1 + b2 lam + 3 lam^2, after
which f_i(lam) = m_l(A_i, lam) is closed form for every lam on the grid.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np

from .errors import GridMismatch
from .mat3core import RngStream
from .paperfn import RationalProfile, Variant, eval_profile, rational_profile

SAMPLE_CHUNK = 1 << 16
# disjoint from the per-restart streams used by the ascent
STREAM_OFFSET = 1 << 40

Sampling = Literal["half", "symmetric", "general"]


@dataclass
class SupremumTable:
    lambda_grid: np.ndarray
    values: np.ndarray
    l: int
    variant: str
    sample_count: int
    best_index: np.ndarray = field(default=None, repr=False)

    def rows(self) -> list[tuple[float, float]]:
        return [(float(x), float(v)) for x, v in zip(self.lambda_grid, self.values)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "value"])
        for x, v in self.rows():
            w.writerow([f"{x:.8g}", f"{v:.8g}"])
        return buf.getvalue()


def lambda_grid(lambda_minus: float, lambda_plus: float, n_points: int) -> np.ndarray:
    """lam_j = lam_- + j * dlam, dlam = (lam_+ - lam_-)/n_points, j = 0..n_points."""
    if not lambda_plus > lambda_minus > 0:
        raise ValueError("need lambda_plus > lambda_minus > 0")
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    step = (lambda_plus - lambda_minus) / n_points
    return lambda_minus + step * np.arange(n_points + 1)


def sample_matrices(chunk: int, count: int, alpha: float, seed: int, sampling: Sampling = "symmetric", offset: int = 0) -> np.ndarray:
    """Matrices ``chunk*SAMPLE_CHUNK + offset .. + count`` of the sample sequence.

    Every matrix consumes nine uniforms from its chunk stream; symmetric ones
    use the first six for the upper triangle. This keeps the sequence
    prefix-stable, so a smaller sample set is always a subset of a larger one.
    """
    gen = RngStream(seed, STREAM_OFFSET + chunk).generator
    raw = gen.uniform(-alpha, alpha, size=(offset + count, 9))[offset:]
    out = raw.reshape(-1, 3, 3).copy()
    if sampling == "general":
        return out
    if sampling == "symmetric":
        sym = np.ones(count, dtype=bool)
    elif sampling == "half":
        sym = (np.arange(count) + chunk * SAMPLE_CHUNK + offset) % 2 == 0
    else:
        raise ValueError(f"unknown sampling {sampling!r}")
    iu = np.triu_indices(3)
    upper = raw[sym, :6]
    s = np.empty((upper.shape[0], 3, 3))
    s[:, iu[0], iu[1]] = upper
    s[:, iu[1], iu[0]] = upper
    out[sym] = s
    return out


def grid_max(profiles: RationalProfile, grid: np.ndarray, l: int, variant: Variant) -> tuple[np.ndarray, np.ndarray]:
    """Per-grid-point maximum over the profiles and the index attaining it."""
    vals = np.empty(len(grid))
    arg = np.empty(len(grid), dtype=np.int64)
    for j, lam in enumerate(grid):
        f = eval_profile(profiles, float(lam), l, variant)
        k = int(np.argmax(f))
        vals[j], arg[j] = f[k], k
    return vals, arg


def _chunk_max(args):
    chunk, count, alpha, seed, sampling, grid, l, variant = args
    prof = rational_profile(sample_matrices(chunk, count, alpha, seed, sampling))
    vals, arg = grid_max(prof, grid, l, variant)
    return vals, arg + chunk * SAMPLE_CHUNK


def algorithm_b(
    l: int = 3,
    variant: Variant = "abs",
    lambda_minus: float = 1.0,
    lambda_plus: float = 2.0,
    n_points: int = 100,
    n_samples: int = 1_000_000,
    alpha: float = 3.0,
    seed: int = 0,
    *,
    sampling: Sampling = "symmetric",
    workers: int = 1,
) -> SupremumTable:
    """F_j = max_i m_l(A_i, lam_j) over ``n_samples`` random matrices."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    grid = lambda_grid(lambda_minus, lambda_plus, n_points)
    jobs = []
    for chunk, lo in enumerate(range(0, n_samples, SAMPLE_CHUNK)):
        jobs.append((chunk, min(SAMPLE_CHUNK, n_samples - lo), alpha, seed, sampling, grid, l, variant))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_max, jobs))
    else:
        parts = [_chunk_max(j) for j in jobs]
    return merge_tables(grid, parts, l, variant, n_samples)


def merge_tables(grid, parts: Iterable[tuple[np.ndarray, np.ndarray]], l, variant, n_samples) -> SupremumTable:
    """Commutative max-merge of per-chunk maxima; ties go to the lower sample index."""
    vals = np.full(len(grid), -np.inf)
    arg = np.full(len(grid), np.iinfo(np.int64).max, dtype=np.int64)
    for v, a in parts:
        better = (v > vals) | ((v == vals) & (a < arg))
        vals = np.where(better, v, vals)
        arg = np.where(better, a, arg)
    return SupremumTable(grid, vals, l, variant, n_samples, arg)


def table_from_matrices(matrices, grid, l: int = 3, variant: Variant = "abs") -> SupremumTable:
    """Grid supremum over an explicit matrix set (no random sampling)."""
    mats = np.asarray(matrices, dtype=float).reshape(-1, 3, 3)
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    vals, arg = grid_max(rational_profile(mats), grid, l, variant)
    return SupremumTable(grid, vals, l, variant, mats.shape[0], arg)


def ball_supremum(profiles: RationalProfile, lam: float, c0: float, l: int, variant: Variant = "abs") -> float:
    """Sampled M_l(lam, c0): l = 3 over 0 < |A - lam I| < c0, l = 2 over |A - lam I| >= c0."""
    r2 = profiles.b1 + profiles.b2 * lam + profiles.b3 * lam * lam
    mask = (r2 > 0) & (r2 < c0 * c0) if l == 3 else r2 >= c0 * c0
    if not np.any(mask):
        return 0.0
    return float(np.max(eval_profile(profiles.take(mask), lam, l, variant)))


@dataclass
class CrossCheckRow:
    lam: float
    grid_value: float
    ascent_value: float
    difference: float
    ok: bool


@dataclass
class CrossCheckReport:
    rows: list[CrossCheckRow]
    tol: float

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def max_difference(self) -> float:
        return max(abs(r.difference) for r in self.rows)


def cross_check(table: SupremumTable, ascents, tol: float = 0.01) -> CrossCheckReport:
    """Compare grid suprema with ascent estimates at matching lam values.

    ``ascents`` is a list of SupEstimate (or anything with ``lam`` and ``value``).
    Every ascent lam must sit on the table grid.
    """
    rows = []
    for est in ascents:
        hit = np.flatnonzero(np.isclose(table.lambda_grid, est.lam, rtol=0, atol=1e-12))
        if hit.size == 0:
            raise GridMismatch(f"lam={est.lam} is not on the table grid")
        fv = float(table.values[hit[0]])
        diff = float(est.value) - fv
        rows.append(CrossCheckRow(float(est.lam), fv, float(est.value), diff, abs(diff) <= tol))
    return CrossCheckReport(rows, tol)
