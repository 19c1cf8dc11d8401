import jax
import jax.numpy as jnp
import pytest

from finite_rect.conv import (BivariateRepr, _weights, convolve_many, convolve_power, identity, laguerre_poly,
                              rect_convolve, rect_convolve_diffop)
from finite_rect.errors import DomainError, UsageError
from finite_rect.poly import NonnegPoly, RectParams, from_roots, root_mean, roots, variance_sym
from finite_rect.test.conftest import monomial, random_pairs, random_poly
from finite_rect.utils.math_helper import rel_err, root_distance

CROSS_SHAPES = [(1, 1), (1, 3), (2, 2), (2, 4), (3, 3), (3, 7), (4, 8), (5, 5), (6, 9), (8, 8), (8, 16),
                (10, 30), (12, 24), (16, 16), (16, 40), (16, 64)]


def test_identity_element():
    key = jax.random.PRNGKey(1)
    for i in range(50):
        key, kp, kd, km = jax.random.split(key, 4)
        d = int(jax.random.randint(kd, (), 1, 17))
        m = int(jax.random.randint(km, (), d, 65))
        params = RectParams(d, m)
        p = random_poly(kp, d)
        out = rect_convolve(p, monomial(d), params)
        assert rel_err(out.coeffs, p.coeffs) <= 1e-12
        assert rel_err(rect_convolve(identity(params), p, params).coeffs, p.coeffs) <= 1e-12


@pytest.mark.parametrize("m", [1, 2, 3, 7])
def test_degree_one_adds_roots(m):
    params = RectParams(1, m)
    out = rect_convolve(from_roots([0.25]), from_roots([2.0]), params)
    assert jnp.allclose(out.coeffs, jnp.array([1.0, -2.25]), rtol=1e-15)


def test_square_two_by_two():
    p = NonnegPoly.from_coeffs([1.0, -1.0, 0.0])
    out = rect_convolve(p, p, RectParams(2, 2))
    assert jnp.allclose(out.coeffs, jnp.array([1.0, -2.0, 0.25]), rtol=1e-15)


def test_monomial_weight():
    assert float(_weights(RectParams(2, 4))[1, 1]) == pytest.approx(3 / 8, rel=1e-15)
    w = _weights(RectParams(5, 9))
    assert jnp.array_equal(w[:, 0], jnp.ones(6))
    assert jnp.array_equal(w, w.T)


def test_weights_no_overflow_for_large_m():
    w = _weights(RectParams(4, 1_000_000))
    assert bool(jnp.all(jnp.isfinite(w)))


def test_degree_mismatch():
    with pytest.raises(UsageError):
        rect_convolve(from_roots([1.0]), from_roots([1.0, 2.0]), RectParams(2, 2))
    with pytest.raises(UsageError):
        rect_convolve_diffop(from_roots([1.0]), from_roots([1.0]), RectParams(2, 2))


def test_cross_route_agreement():
    count = 0
    for d, m, p, q in random_pairs(7, CROSS_SHAPES, per_shape=13):
        params = RectParams(d, m)
        a = rect_convolve(p, q, params)
        b = rect_convolve_diffop(p, q, params)
        assert rel_err(b.coeffs, a.coeffs) <= 1e-9
        count += 1
    assert count >= 200


def test_diffop_identity_and_monomial():
    params = RectParams(3, 5)
    p = from_roots([0.5, 1.0, 2.0])
    assert rel_err(rect_convolve_diffop(p, monomial(3), params).coeffs, p.coeffs) <= 1e-14
    # x^(d-1) coefficient weight for i = j = 1 at (2, 4)
    e = NonnegPoly(jnp.array([1.0, -1.0, 0.0]))
    out = rect_convolve_diffop(e, e, RectParams(2, 4))
    assert float(out.coeffs[2]) == pytest.approx(3 / 8, rel=1e-14)


def test_bivariate_repr():
    params = RectParams(2, 3)
    p = from_roots([1.0, 2.0])
    b = BivariateRepr(params, p)
    assert float(b.evaluate(0.7, 1.0)) == pytest.approx(float(p(0.7)), rel=1e-14)
    # y^(m-d) p(xy) at x = 0.25, y = 2
    assert float(b.evaluate(0.25, 2.0)) == pytest.approx(2.0 * float(p(0.5)), rel=1e-14)
    # (d/dx d/dy) of x^2 y^3 is 6 x y^2; normalized by d m = 6
    top = b.apply_dxdy(1)
    assert float(top[1]) == pytest.approx(1.0, rel=1e-15)
    assert jnp.allclose(b.apply_dxdy(1, normalized=False), top * 6.0)
    with pytest.raises(UsageError):
        b.apply_dxdy(3)


def test_commutative():
    for d, m, p, q in random_pairs(3, [(4, 6), (7, 7)], per_shape=5):
        params = RectParams(d, m)
        assert rel_err(rect_convolve(p, q, params).coeffs, rect_convolve(q, p, params).coeffs) <= 1e-13


def test_associative():
    key = jax.random.PRNGKey(11)
    for d, m in [(3, 5), (6, 6), (12, 20)]:
        params = RectParams(d, m)
        for _ in range(4):
            key, k1, k2, k3 = jax.random.split(key, 4)
            p, q, r = random_poly(k1, d), random_poly(k2, d), random_poly(k3, d)
            left = rect_convolve(rect_convolve(p, q, params), r, params)
            right = rect_convolve(p, rect_convolve(q, r, params), params)
            assert rel_err(left.coeffs, right.coeffs) <= 1e-9


def test_closure_real_rooted():
    for d, m, p, q in random_pairs(5, [(2, 3), (5, 10), (8, 8), (10, 25)], per_shape=125):
        r = roots(rect_convolve(p, q, RectParams(d, m)))
        assert r.backward_residual < 1e-8
        assert float(r.roots[0]) >= -1e-9


def test_mean_and_variance_additive():
    for d, m, p, q in random_pairs(9, [(3, 4), (9, 27)], per_shape=5):
        out = rect_convolve(p, q, RectParams(d, m))
        assert root_mean(out) == pytest.approx(root_mean(p) + root_mean(q), rel=1e-12)
        assert variance_sym(out) == pytest.approx(variance_sym(p) + variance_sym(q), rel=1e-12)


def test_laguerre_degree_one_and_mean():
    assert roots(laguerre_poly(RectParams(1, 5), 0.3)).max() == pytest.approx(1.5, rel=1e-14)
    params = RectParams(6, 10)
    assert root_mean(laguerre_poly(params, 0.2)) == pytest.approx(10 * 0.2, rel=1e-13)
    with pytest.raises(DomainError):
        laguerre_poly(params, 0.0)


@pytest.mark.parametrize("d", [2, 4, 8, 16])
def test_laguerre_divisibility(d):
    params = RectParams(d, 2 * d)
    sigma2, tau2 = 1.0 / (params.m * d), 2.0 / (params.m * d)
    left = laguerre_poly(params, sigma2 + tau2)
    right = rect_convolve(laguerre_poly(params, sigma2), laguerre_poly(params, tau2), params)
    assert root_distance(roots(left).roots, roots(right).roots) < 1e-8


def test_convolve_many_and_power():
    params = RectParams(3, 6)
    p = from_roots([0.2, 0.5, 0.9])
    assert rel_err(convolve_many([], params).coeffs, identity(params).coeffs) == 0.0
    folded = convolve_many([p] * 5, params)
    assert rel_err(convolve_power(p, 5, params).coeffs, folded.coeffs) <= 1e-11
    assert rel_err(convolve_power(p, 0, params).coeffs, identity(params).coeffs) == 0.0
    with pytest.raises(UsageError):
        convolve_power(p, -1, params)
