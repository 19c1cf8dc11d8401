from jax import config

# every coefficient manipulation in this package assumes double precision
config.update("jax_enable_x64", True)

__version__ = "0.1"
