import jax
import jax.numpy as jnp
import pytest

import finite_rect  # noqa: F401  (double precision)
from finite_rect.poly import NonnegPoly, from_roots


def random_poly(key, d: int, scale: float = 1.0) -> NonnegPoly:
    """Monic degree d polynomial with roots uniform in (0, scale)."""
    return from_roots(jax.random.uniform(key, (d,), minval=0.0, maxval=scale))


def random_pairs(seed: int, shapes, per_shape: int):
    """Yields (params d, m, p, q) with random p, q for every (d, m) in shapes."""
    key = jax.random.PRNGKey(seed)
    for d, m in shapes:
        for _ in range(per_shape):
            key, kp, kq = jax.random.split(key, 3)
            yield d, m, random_poly(kp, d), random_poly(kq, d)


def monomial(d: int) -> NonnegPoly:
    return NonnegPoly(jnp.zeros(d + 1).at[0].set(1.0))


@pytest.fixture
def key():
    return jax.random.PRNGKey(0)
