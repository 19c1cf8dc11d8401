from __future__ import annotations

import os
from dataclasses import dataclass
from functools import partial
from typing import Iterator

import jax
import jax.numpy as jnp
import pandas as pd
from jaxtyping import Array, Float
from tqdm import tqdm

from finite_rect.errors import UsageError
from finite_rect.poly import NonnegPoly, RectParams, from_roots, roots
from finite_rect.utils.chunk_manager import ChunkManager, create_chunk_manager

DEFAULT_CHUNK = 4096
EXACT_TOL = 1e-9  # |mean - value| accepted as exact when the standard error is 0


@dataclass(frozen=True, eq=False)
class RectMatrix:
    entries: Float[Array, "m d"]

    def __post_init__(self):
        if self.entries.ndim != 2:
            raise UsageError(f"expected a matrix, got shape {self.entries.shape}")
        if self.m < self.d:
            raise UsageError(f"need rows >= cols, got {self.m}x{self.d}")

    @property
    def m(self) -> int:
        return int(self.entries.shape[0])

    @property
    def d(self) -> int:
        return int(self.entries.shape[1])


@partial(jax.tree_util.register_dataclass,
         data_fields=['mean_coeffs', 'stderr_coeffs'],
         meta_fields=['n_samples', 'seed', 'chunk'])
@dataclass(frozen=True)
class EmpiricalConv:
    mean_coeffs: Float[Array, "d+1"]    # decreasing degree, mean_coeffs[0] == 1
    stderr_coeffs: Float[Array, "d+1"]  # standard error of each mean
    n_samples: int
    seed: int
    chunk: int

    def to_json(self) -> dict:
        return {"mean_coeffs": [float(c) for c in self.mean_coeffs],
                "stderr_coeffs": [float(c) for c in self.stderr_coeffs],
                "n_samples": self.n_samples, "seed": self.seed, "chunk": self.chunk}


def haar_orthogonal(n: int, key: jnp.ndarray) -> Float[Array, "n n"]:
    """
    Haar distributed orthogonal n x n matrix: QR of a standard Gaussian matrix with the
    columns of Q multiplied by the signs of diag(R), so that R has a positive diagonal.
    """
    z = jax.random.normal(key, (n, n))
    q, r = jnp.linalg.qr(z)
    return q * jnp.sign(jnp.diagonal(r))[None, :]


def matrix_from_poly(p: NonnegPoly, params: RectParams) -> RectMatrix:
    """m x d matrix whose singular values are the square roots of the roots of p."""
    if p.degree != params.d:
        raise UsageError(f"polynomial has degree {p.degree}, expected d={params.d}")
    singular = jnp.sqrt(roots(p).roots)
    return RectMatrix(jnp.zeros((params.m, params.d)).at[jnp.arange(params.d), jnp.arange(params.d)].set(singular))


def char_poly_gram(M: RectMatrix) -> NonnegPoly:
    """Characteristic polynomial of M^T M from its symmetric eigenvalues."""
    e = M.entries
    return from_roots(jnp.maximum(jnp.linalg.eigvalsh(e.T @ e), 0.0))


def _sample(key: jnp.ndarray, a: jnp.ndarray, b: jnp.ndarray) -> jnp.ndarray:
    m, d = a.shape
    kq, kr = jax.random.split(key)
    c = a + haar_orthogonal(m, kq) @ b @ haar_orthogonal(d, kr).T
    return jnp.poly(jnp.maximum(jnp.linalg.eigvalsh(c.T @ c), 0.0))


_MANAGER = create_chunk_manager(_sample)


def _check_pair(a: RectMatrix, b: RectMatrix):
    if a.entries.shape != b.entries.shape:
        raise UsageError(f"matrix shapes differ: {a.entries.shape} vs {b.entries.shape}")


def sample_chunks(
        a: RectMatrix, b: RectMatrix, n_samples: int, seed: int, chunk: int = DEFAULT_CHUNK,
        progress: bool = False, manager: ChunkManager | None = None
) -> Iterator[jnp.ndarray]:
    """
    Per-sample characteristic polynomial coefficients of (A + Q B R^T)^T (A + Q B R^T), chunk by chunk.

    Chunk c always draws `chunk` samples from the key fold_in(PRNGKey(seed), c); the last chunk
    is cut to size, so the sample sequence only depends on (seed, chunk).
    """
    _check_pair(a, b)
    if n_samples < 1:
        raise UsageError(f"n_samples must be positive, got {n_samples}")
    if chunk < 1:
        raise UsageError(f"chunk must be positive, got {chunk}")
    manager = _MANAGER if manager is None else manager
    n_chunks = -(-n_samples // chunk)
    for index in tqdm(range(n_chunks), disable=not progress, desc="mc chunks"):
        size = min(chunk, n_samples - index * chunk)
        yield manager.run_chunk(a.entries, b.entries, seed, index, chunk)[:size]


def empirical_convolution_matrices(
        a: RectMatrix, b: RectMatrix, n_samples: int, seed: int, chunk: int = DEFAULT_CHUNK,
        progress: bool = False
) -> EmpiricalConv:
    """
    Coefficientwise mean and standard error of the sampled characteristic polynomials.
    Args:
        a, b: RectMatrix of equal shape m x d
        n_samples: number of (Q, R) draws
        seed: 64-bit seed
        chunk: samples per compiled batch
        progress: show a tqdm bar over chunks
    Returns:
        EmpiricalConv

    Notes:
        Sums are taken around the first sample, so identical samples give a standard error of
        exactly 0, and chunks are reduced in order.
    """
    shift, total, total_sq, count = None, 0.0, 0.0, 0
    for samples in sample_chunks(a, b, n_samples, seed, chunk, progress):
        if shift is None:
            shift = samples[0]
        centred = samples - shift
        total = total + jnp.sum(centred, axis=0)
        total_sq = total_sq + jnp.sum(centred * centred, axis=0)
        count += samples.shape[0]
    mean = shift + total / count
    var = jnp.maximum(total_sq - total * total / count, 0.0) / max(count - 1, 1)
    stderr = jnp.sqrt(var / count)
    return EmpiricalConv(mean.at[0].set(1.0), stderr.at[0].set(0.0), count, seed, chunk)


def empirical_convolution(
        p: NonnegPoly, q: NonnegPoly, params: RectParams, n_samples: int, seed: int,
        chunk: int = DEFAULT_CHUNK, progress: bool = False
) -> EmpiricalConv:
    return empirical_convolution_matrices(
        matrix_from_poly(p, params), matrix_from_poly(q, params), n_samples, seed, chunk, progress)


@dataclass(frozen=True, eq=False)
class MCComparison:
    algebraic: Float[Array, "d+1"]
    empirical: EmpiricalConv
    z: Float[Array, "d+1"]

    def passed(self, threshold: float) -> bool:
        return bool(jnp.all(jnp.abs(self.z) <= threshold))

    def rows(self) -> list[dict]:
        # an unbounded z (zero standard error, mismatched mean) is written as null
        return [{"coefficient": i,
                 "algebraic": float(self.algebraic[i]),
                 "mc_mean": float(self.empirical.mean_coeffs[i]),
                 "stderr": float(self.empirical.stderr_coeffs[i]),
                 "z": float(self.z[i]) if bool(jnp.isfinite(self.z[i])) else None}
                for i in range(self.algebraic.shape[0])]


def z_scores(ec: EmpiricalConv, algebraic: NonnegPoly) -> Float[Array, "d+1"]:
    """(mean - algebraic) / stderr; a zero standard error gives 0 for an exact match, inf otherwise."""
    diff = ec.mean_coeffs - algebraic.coeffs
    exact = jnp.abs(diff) <= EXACT_TOL * (1.0 + jnp.abs(algebraic.coeffs))
    safe = jnp.where(ec.stderr_coeffs > 0.0, ec.stderr_coeffs, 1.0)
    return jnp.where(ec.stderr_coeffs > 0.0, diff / safe, jnp.where(exact, 0.0, jnp.inf))


def compare(ec: EmpiricalConv, algebraic: NonnegPoly) -> MCComparison:
    if ec.mean_coeffs.shape != algebraic.coeffs.shape:
        raise UsageError("empirical and algebraic polynomials have different degrees")
    return MCComparison(algebraic.coeffs, ec, z_scores(ec, algebraic))


def export_samples_csv(
        p: NonnegPoly, q: NonnegPoly, params: RectParams, n_samples: int, seed: int, path: str,
        chunk: int = DEFAULT_CHUNK
) -> str:
    """
    Write the per-sample coefficients (one row per sample, columns c0..cd) to path.
    Regenerates exactly the samples empirical_convolution averages for the same seed and chunk.
    """
    a, b = matrix_from_poly(p, params), matrix_from_poly(q, params)
    frames = [pd.DataFrame(jax.device_get(s), columns=[f"c{i}" for i in range(params.d + 1)])
              for s in sample_chunks(a, b, n_samples, seed, chunk)]
    df = pd.concat(frames, ignore_index=True)
    df.index.name = "sample"
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    df.to_csv(path, float_format="%.17g")
    return path
