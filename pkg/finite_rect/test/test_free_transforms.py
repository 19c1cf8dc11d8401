import jax
import jax.numpy as jnp
import pytest

from finite_rect.errors import DomainError, UsageError
from finite_rect.free_transforms import (J_eval, cauchy_G_atoms, cauchy_G_eval, free_rect_R_eval, free_rect_R_series,
                                         rect_H_eval, rect_H_series, spectral_edge, symmetric_moments)
from finite_rect.poly import RectParams, from_roots, root_mean
from finite_rect.test.conftest import monomial, random_poly

BERNOULLI = from_roots([1.0])


def test_symmetric_moments():
    mom = symmetric_moments(from_roots([1.0, 3.0]), 2)
    assert jnp.allclose(mom.even_moments, jnp.array([1.0, 2.0, 5.0]), rtol=1e-14)
    assert mom.K == 2
    assert symmetric_moments(BERNOULLI, 0).K == 0
    with pytest.raises(UsageError):
        mom.series(4)
    with pytest.raises(UsageError):
        symmetric_moments(BERNOULLI, -1)


def test_spectral_edge():
    assert spectral_edge(from_roots([0.5, 2.0])) == pytest.approx(2.0, rel=1e-12)
    assert spectral_edge(monomial(3)) == 0.0
    # fourfold root, where the companion matrix eigenvalues split into the complex plane
    assert spectral_edge(from_roots([1.0, 1.0, 1.0, 1.0])) == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(DomainError):
        spectral_edge(monomial(0))


def test_cauchy_G():
    assert cauchy_G_eval(monomial(3), 2.0) == pytest.approx(0.5, rel=1e-14)
    assert cauchy_G_eval(BERNOULLI, 2.0) == pytest.approx(2 / 3, rel=1e-14)
    p = random_poly(jax.random.PRNGKey(3), 5)
    for x in (1.2, 2.0, 7.5):
        assert cauchy_G_eval(p, x) == pytest.approx(cauchy_G_atoms(p, x), rel=1e-12)
    with pytest.raises(DomainError):
        cauchy_G_eval(from_roots([4.0]), 1.5)


def test_rect_H():
    assert rect_H_eval(monomial(2), RectParams(2, 5), 3.0) == pytest.approx(1 / 9, rel=1e-14)
    assert rect_H_eval(BERNOULLI, RectParams(1, 1), 2.0) == pytest.approx(4 / 9, rel=1e-14)
    p = random_poly(jax.random.PRNGKey(4), 4)
    params = RectParams(4, 10)
    grid = jnp.linspace(1.1, 6.0, 25)
    values = jnp.array([rect_H_eval(p, params, float(x)) for x in grid])
    assert bool(jnp.all(jnp.diff(values) < 0.0))


def test_J():
    params = RectParams(3, 7)
    for u in (0.01, 0.25, 4.0):
        assert J_eval(monomial(3), params, u) == pytest.approx(1.0 / u ** 0.5, rel=1e-12)
    assert J_eval(BERNOULLI, RectParams(1, 1), 4 / 9) == pytest.approx(2.0, rel=1e-12)
    p = random_poly(jax.random.PRNGKey(5), 4)
    params = RectParams(4, 6)
    for x in (1.05, 1.7, 5.0):
        assert J_eval(p, params, rect_H_eval(p, params, x)) == pytest.approx(x, rel=1e-10)
    with pytest.raises(DomainError):
        J_eval(p, params, 0.0)


def test_J_repeated_root():
    p = from_roots([1.0, 1.0, 1.0])
    params = RectParams(3, 6)
    x = J_eval(p, params, 0.01)
    assert x > 1.0
    assert rect_H_eval(p, params, x) == pytest.approx(0.01, rel=1e-8)


def test_H_series():
    h = rect_H_series(symmetric_moments(monomial(2), 4), 0.5, 6)
    assert jnp.allclose(h.coeffs, jnp.array([0.0, 1.0, 0.0, 0.0, 0.0, 0.0]), atol=1e-15)
    h = rect_H_series(symmetric_moments(BERNOULLI, 5), 1.0, 7)
    assert jnp.allclose(h.coeffs, jnp.arange(7.0), rtol=1e-14)
    with pytest.raises(UsageError):
        rect_H_series(symmetric_moments(BERNOULLI, 3), 1.0, 1)
    with pytest.raises(DomainError):
        rect_H_series(symmetric_moments(BERNOULLI, 3), 1.5, 3)


def test_R_series():
    r = free_rect_R_series(symmetric_moments(monomial(3), 5), 0.25, 6)
    assert jnp.allclose(r.coeffs, 0.0, atol=1e-14)
    p = random_poly(jax.random.PRNGKey(6), 5)
    r = free_rect_R_series(symmetric_moments(p, 3), 0.4, 4)
    assert float(r[1]) == pytest.approx(root_mean(p), rel=1e-12)
    r = free_rect_R_series(symmetric_moments(BERNOULLI, 3), 0.5, 4)
    assert jnp.allclose(r.coeffs, jnp.array([0.0, 1.0, -0.5, 0.5]), rtol=1e-12, atol=1e-14)
    with pytest.raises(UsageError):
        free_rect_R_series(symmetric_moments(BERNOULLI, 2), 0.5, 4)
    with pytest.raises(DomainError):
        free_rect_R_series(symmetric_moments(BERNOULLI, 3), 0.0, 4)


def test_R_eval():
    params = RectParams(2, 4)
    assert free_rect_R_eval(monomial(2), params, 0.3) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DomainError):
        free_rect_R_eval(monomial(2), params, 0.0)
    p = random_poly(jax.random.PRNGKey(7), 3)
    params = RectParams(3, 5)
    s = 0.05
    series = free_rect_R_series(symmetric_moments(p, 19), params.lam, 20)
    assert free_rect_R_eval(p, params, s) == pytest.approx(float(series.evaluate(s * s)), abs=1e-6)


def test_evaluation_just_above_the_edge():
    p = from_roots([0.5, 2.0])
    x = 2.0 ** 0.5 * (1.0 + 1e-11)
    assert spectral_edge(p) <= 2.0 * (1.0 + 1e-14)
    assert cauchy_G_eval(p, x) > 0.0
    assert rect_H_eval(p, RectParams(2, 3), x) > 0.0


def test_degree_zero_has_no_moments():
    with pytest.raises(DomainError):
        symmetric_moments(monomial(0), 2)


@pytest.mark.parametrize("d, m", [(1, 2), (2, 2), (3, 5), (5, 9), (8, 8), (8, 20)])
def test_R_eval_matches_series(d, m):
    p = random_poly(jax.random.PRNGKey(40 + d * m), d)
    params = RectParams(d, m)
    series = free_rect_R_series(symmetric_moments(p, 19), params.lam, 20)
    for s in (0.03, 0.05):
        assert free_rect_R_eval(p, params, s) == pytest.approx(float(series.evaluate(s * s)), abs=1e-6)
