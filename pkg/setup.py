from setuptools import setup, find_packages

setup(
    name='finite_rect',
    version='0.1',
    packages=find_packages(exclude=['examples', 'examples.*']),
    include_package_data=True,
    install_requires=[
        'jax',
        'equinox',
        'jaxtyping',
        'pandas',
        'tqdm',
        'wandb',
    ],
    extras_require={
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': ['finite-rect = finite_rect.runner:main'],
    },
)
