import jax.numpy as jnp


def rel_err(a, b, floor: float = 0.0) -> float:
    """
    Largest coefficientwise relative error max |a - b| / max(|b|, floor).
    Args:
        a: computed values
        b: reference values
        floor: lower bound on the denominator, for references with zero entries

    Returns:
        float
    """
    a, b = jnp.asarray(a), jnp.asarray(b)
    denom = jnp.maximum(jnp.abs(b), floor)
    err = jnp.where(denom > 0.0, jnp.abs(a - b) / jnp.where(denom > 0.0, denom, 1.0),
                    jnp.where(a == b, 0.0, jnp.inf))
    return float(jnp.max(err))


def root_distance(a, b) -> float:
    """Largest gap between two sorted root lists of equal length."""
    a, b = jnp.sort(jnp.asarray(a)), jnp.sort(jnp.asarray(b))
    if a.shape != b.shape:
        raise ValueError(f"root lists differ in length: {a.shape} vs {b.shape}")
    return float(jnp.max(jnp.abs(a - b))) if a.size else 0.0
