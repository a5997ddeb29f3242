"""3x3 linear algebra used everywhere else: norms, minors, SVD, sampling.

Every function accepts either a single matrix of shape ``(3, 3)`` or a stack
of shape ``(..., 3, 3)`` and broadcasts over the leading axes.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NonpositiveDeterminant

IDENTITY = np.eye(3)


def as_mat3(a) -> np.ndarray:
    """Coerce ``a`` to a float array of trailing shape (3, 3), rejecting NaN/Inf."""
    arr = np.asarray(a, dtype=float)
    if arr.shape[-1:] == (9,):
        arr = arr.reshape(arr.shape[:-1] + (3, 3))
    if arr.ndim < 2 or arr.shape[-2:] != (3, 3):
        raise ValueError(f"expected trailing shape (3, 3), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return arr


def frobenius_norm(a) -> np.ndarray | float:
    a = np.asarray(a, dtype=float)
    return np.sqrt(np.sum(a * a, axis=(-2, -1)))


def trace(a):
    a = np.asarray(a, dtype=float)
    return a[..., 0, 0] + a[..., 1, 1] + a[..., 2, 2]


def cofactor(a) -> np.ndarray:
    """Cofactor matrix; rows are cross products of the other two rows, so singular input is fine."""
    a = np.asarray(a, dtype=float)
    r0, r1, r2 = a[..., 0, :], a[..., 1, :], a[..., 2, :]
    return np.stack([np.cross(r1, r2), np.cross(r2, r0), np.cross(r0, r1)], axis=-2)


def determinant(a):
    a = np.asarray(a, dtype=float)
    return np.sum(a[..., 0, :] * np.cross(a[..., 1, :], a[..., 2, :]), axis=-1)


def trace_cof(a):
    """tr cof A = ((tr A)^2 - tr(A^2)) / 2, without forming the cofactor."""
    a = np.asarray(a, dtype=float)
    tr = trace(a)
    tr_sq = np.einsum("...ij,...ji->...", a, a)
    return 0.5 * (tr * tr - tr_sq)


class Minors(NamedTuple):
    trace: float | np.ndarray
    cofactor: np.ndarray
    determinant: float | np.ndarray
    trace_cof: float | np.ndarray


def minors(a) -> Minors:
    a = np.asarray(a, dtype=float)
    cof = cofactor(a)
    return Minors(trace(a), cof, determinant(a), trace(cof))


@dataclass(frozen=True)
class Svd3:
    """Singular triple in ascending order with factors: ``A = U diag(sigma) V^T``."""

    sigma: np.ndarray
    u_factor: np.ndarray
    v_factor: np.ndarray

    @property
    def sign(self):
        """det(U) det(V); equals sign(det A) whenever A is nonsingular."""
        return np.sign(np.linalg.det(self.u_factor) * np.linalg.det(self.v_factor))

    def reconstruct(self) -> np.ndarray:
        return (self.u_factor * self.sigma[..., None, :]) @ np.swapaxes(self.v_factor, -1, -2)


def singular_values(a) -> np.ndarray:
    """Ascending singular values, shape ``(..., 3)``."""
    return np.linalg.svd(np.asarray(a, dtype=float), compute_uv=False)[..., ::-1]


def svd3(a) -> Svd3:
    a = as_mat3(a)
    u, s, vh = np.linalg.svd(a)
    # LAPACK returns descending order; flip columns to ascending
    return Svd3(
        sigma=s[..., ::-1].copy(),
        u_factor=u[..., :, ::-1].copy(),
        v_factor=np.swapaxes(vh, -1, -2)[..., :, ::-1].copy(),
    )


def polar_rotation(a) -> np.ndarray:
    """Orthogonal polar factor U V^T (the gradient of the nuclear norm at nonsingular A)."""
    u, _, vh = np.linalg.svd(np.asarray(a, dtype=float))
    return u @ vh


def alignment_rotation(a) -> np.ndarray:
    """R = V^T U in SO(3), with N(A) = tr(R (cof D - lambda D)) for D = diag(sigma).

    Requires det A > 0, in which case det U det V = 1 and R is a proper rotation.
    """
    a = as_mat3(a)
    if np.any(determinant(a) <= 0):
        raise NonpositiveDeterminant("alignment_rotation needs det A > 0")
    dec = svd3(a)
    return np.swapaxes(dec.v_factor, -1, -2) @ dec.u_factor


def is_rotation(r, tol: float = 1e-9) -> bool:
    r = np.asarray(r, dtype=float)
    if r.shape[-2:] != (3, 3):
        return False
    gram = np.swapaxes(r, -1, -2) @ r
    return bool(np.all(np.abs(gram - IDENTITY) <= tol) and np.all(np.abs(np.linalg.det(r) - 1.0) <= tol))


# --- random streams -------------------------------------------------------


@dataclass
class RngStream:
    """Counter-based (Philox 4x64) stream keyed by ``(seed, stream_index)``.

    Same key gives the same draws on every platform. Streams are single-owner:
    parallel code builds one per task from its index and never shares it.
    """

    seed: int
    stream_index: int = 0
    _gen: np.random.Generator | None = field(default=None, init=False, repr=False, compare=False)

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(entropy=int(self.seed) & (2**64 - 1), spawn_key=(int(self.stream_index),))
            self._gen = np.random.Generator(np.random.Philox(ss))
        return self._gen


def random_matrix(rng: RngStream, alpha: float, symmetric: bool = False, size: int | None = None) -> np.ndarray:
    """Entries i.i.d. uniform on [-alpha, alpha]; with ``symmetric`` only the upper triangle is drawn."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    gen = rng.generator
    n = 1 if size is None else int(size)
    if symmetric:
        upper = gen.uniform(-alpha, alpha, size=(n, 6))
        out = np.empty((n, 3, 3))
        iu = np.triu_indices(3)
        out[:, iu[0], iu[1]] = upper
        out[:, iu[1], iu[0]] = upper
    else:
        out = gen.uniform(-alpha, alpha, size=(n, 3, 3))
    return out[0] if size is None else out


def quaternion_to_rotation(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    q = q / np.linalg.norm(q, axis=-1, keepdims=True)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    return np.stack(
        [
            np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], axis=-1),
            np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], axis=-1),
            np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], axis=-1),
        ],
        axis=-2,
    )


def random_rotation(rng: RngStream, size: int | None = None) -> np.ndarray:
    """Haar-uniform rotation(s): a standard normal 4-vector normalised to a unit quaternion."""
    n = 1 if size is None else int(size)
    q = rng.generator.standard_normal((n, 4))
    r = quaternion_to_rotation(q)
    return r[0] if size is None else r


# --- matrix text format -------------------------------------------------------

_SPLIT = re.compile(r"[,;\s]+")


def parse_matrix_text(text: str) -> np.ndarray:
    """Nine numbers, row-major, separated by commas, semicolons and/or whitespace; ``#`` lines are comments."""
    body = " ".join(line for line in text.splitlines() if not line.lstrip().startswith("#"))
    tokens = [t for t in _SPLIT.split(body.strip()) if t]
    if len(tokens) != 9:
        raise ValueError(f"expected 9 numbers, got {len(tokens)}")
    return as_mat3(np.array([float(t) for t in tokens]).reshape(3, 3))


def format_matrix_text(a, digits: int = 17) -> str:
    a = as_mat3(a)
    return "\n".join(" ".join(f"{x:.{digits}g}" for x in row) for row in a) + "\n"
