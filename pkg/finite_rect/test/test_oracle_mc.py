import json

import jax
import jax.numpy as jnp
import pandas as pd
import pytest

from finite_rect.conv import rect_convolve
from finite_rect.errors import UsageError
from finite_rect.oracle_mc import (EmpiricalConv, RectMatrix, char_poly_gram, compare, empirical_convolution,
                                   empirical_convolution_matrices, export_samples_csv, haar_orthogonal,
                                   matrix_from_poly, sample_chunks)
from finite_rect.poly import RectParams, from_roots
from finite_rect.test.conftest import monomial, random_pairs
from finite_rect.utils.math_helper import rel_err

MC_SHAPES = [(1, 2), (2, 2), (2, 4), (3, 6)]


def test_haar_orthogonal(key):
    assert abs(float(haar_orthogonal(1, key)[0, 0])) == 1.0
    q = haar_orthogonal(5, key)
    assert jnp.allclose(q.T @ q, jnp.eye(5), atol=1e-12)
    keys = jax.random.split(key, 20_000)
    q11 = jax.vmap(lambda k: haar_orthogonal(4, k)[0, 0])(keys)
    assert float(jnp.mean(q11 ** 2)) == pytest.approx(0.25, abs=0.01)
    assert float(jnp.mean(q11)) == pytest.approx(0.0, abs=0.02)


def test_matrix_from_poly():
    params = RectParams(2, 3)
    M = matrix_from_poly(from_roots([1.0, 4.0]), params)
    assert (M.m, M.d) == (3, 2)
    assert jnp.allclose(M.entries, jnp.array([[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]]), rtol=1e-14)
    p = from_roots([0.3, 0.7, 2.5])
    assert rel_err(char_poly_gram(matrix_from_poly(p, RectParams(3, 5))).coeffs, p.coeffs) <= 1e-12
    with pytest.raises(UsageError):
        RectMatrix(jnp.zeros((2, 3)))
    with pytest.raises(UsageError):
        matrix_from_poly(p, params)


def test_zero_summand_is_exact():
    params = RectParams(3, 4)
    p = from_roots([0.5, 1.0, 2.0])
    ec = empirical_convolution(p, monomial(3), params, n_samples=1000, seed=3, chunk=256)
    assert jnp.array_equal(ec.stderr_coeffs, jnp.zeros(4))
    result = compare(ec, rect_convolve(p, monomial(3), params))
    assert jnp.array_equal(result.z, jnp.zeros(4))
    assert result.passed(4.0)


def test_degree_one_mean():
    params = RectParams(1, 3)
    ec = empirical_convolution(from_roots([1.0]), from_roots([4.0]), params, n_samples=50_000, seed=1)
    assert float(ec.mean_coeffs[1]) == pytest.approx(-5.0, abs=5 * float(ec.stderr_coeffs[1]))
    assert ec.n_samples == 50_000


def test_square_two_by_two():
    params = RectParams(2, 2)
    p = from_roots([0.0, 1.0])
    result = compare(empirical_convolution(p, p, params, n_samples=100_000, seed=2), rect_convolve(p, p, params))
    assert float(result.algebraic[2]) == pytest.approx(0.25, rel=1e-14)
    assert result.passed(4.0)


def test_matches_algebraic_convolution():
    for d, m, p, q in random_pairs(12, MC_SHAPES, per_shape=2):
        params = RectParams(d, m)
        ec = empirical_convolution(p, q, params, n_samples=100_000, seed=d * 100 + m)
        result = compare(ec, rect_convolve(p, q, params))
        assert result.passed(4.0), result.rows()


def test_deterministic():
    params = RectParams(2, 3)
    p, q = from_roots([0.2, 0.9]), from_roots([0.4, 1.3])
    first = empirical_convolution(p, q, params, n_samples=3000, seed=7, chunk=512)
    second = empirical_convolution(p, q, params, n_samples=3000, seed=7, chunk=512)
    other = empirical_convolution(p, q, params, n_samples=3000, seed=8, chunk=512)
    assert jnp.array_equal(first.mean_coeffs, second.mean_coeffs)
    assert jnp.array_equal(first.stderr_coeffs, second.stderr_coeffs)
    assert not jnp.array_equal(first.mean_coeffs, other.mean_coeffs)
    assert first.to_json()["seed"] == 7


def test_last_chunk_is_cut():
    params = RectParams(2, 2)
    a = matrix_from_poly(from_roots([0.2, 0.9]), params)
    sizes = [s.shape[0] for s in sample_chunks(a, a, 1000, seed=0, chunk=300)]
    assert sizes == [300, 300, 300, 100]
    with pytest.raises(UsageError):
        next(sample_chunks(a, a, 0, seed=0))


def test_bi_invariance(key):
    params = RectParams(2, 3)
    a = matrix_from_poly(from_roots([0.5, 1.5]), params)
    b = matrix_from_poly(from_roots([0.2, 1.0]), params)
    ku, kv = jax.random.split(key)
    rotated = RectMatrix(haar_orthogonal(3, ku) @ a.entries @ haar_orthogonal(2, kv).T)
    plain = empirical_convolution_matrices(a, b, 50_000, seed=4)
    turned = empirical_convolution_matrices(rotated, b, 50_000, seed=5)
    spread = jnp.sqrt(plain.stderr_coeffs ** 2 + turned.stderr_coeffs ** 2)
    assert bool(jnp.all(jnp.abs(plain.mean_coeffs - turned.mean_coeffs) <= 5.0 * spread + 1e-12))


def test_export_samples(tmp_path):
    params = RectParams(2, 4)
    p, q = from_roots([0.3, 0.8]), from_roots([0.1, 1.1])
    path = export_samples_csv(p, q, params, 700, seed=9, path=str(tmp_path / "mc" / "samples.csv"), chunk=256)
    df = pd.read_csv(path, index_col="sample")
    assert list(df.columns) == ["c0", "c1", "c2"]
    assert len(df) == 700
    ec = empirical_convolution(p, q, params, 700, seed=9, chunk=256)
    assert jnp.allclose(jnp.asarray(df.mean().values), ec.mean_coeffs, rtol=1e-10, atol=1e-12)


def test_unbounded_z_written_as_null():
    params = RectParams(1, 2)
    exact = EmpiricalConv(jnp.array([1.0, 1e3]), jnp.zeros(2), n_samples=10, seed=0, chunk=10)
    result = compare(exact, rect_convolve(from_roots([1.0]), from_roots([1.0]), params))
    assert not result.passed(4.0)
    rows = result.rows()
    assert rows[0]["z"] == 0.0 and rows[1]["z"] is None
    json.dumps(rows, allow_nan=False)
