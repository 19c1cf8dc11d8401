from typing import Callable
from dataclasses import field
import equinox as eqx
import jax
import jax.numpy as jnp


class ChunkManager(eqx.Module):
    _sample_compiled: Callable[[jnp.ndarray, jnp.ndarray, jnp.ndarray], jnp.ndarray] = field(default=None)

    def __init__(self, sample):
        self._sample_compiled = sample

    def chunk_key(self, seed: int, index: int) -> jnp.ndarray:
        # chunk streams depend only on (seed, index), never on scheduling
        return jax.random.fold_in(jax.random.PRNGKey(seed), index)

    def run_chunk(
            self, a: jnp.ndarray, b: jnp.ndarray, seed: int, index: int, size: int
    ) -> jnp.ndarray:
        keys = jax.random.split(self.chunk_key(seed, index), size)
        return self._sample_compiled(keys, a, b)


def create_chunk_manager(sample: Callable[[jnp.ndarray, jnp.ndarray, jnp.ndarray], jnp.ndarray]) -> ChunkManager:
    """
    Wrap a per-key sampler sample(key, a, b) into a compiled batch over a vector of keys.
    """
    return ChunkManager(jax.jit(jax.vmap(sample, in_axes=(0, None, None))))
