"""Small labeled datasets with known decision structure."""
import numpy as np

from .core import Dataset
from .errors import PrelimError, UnknownSpec

SPECS = ("two-gaussians", "rings", "checkerboard")


def _flip(y, noise, rng):
    if noise <= 0:
        return y
    return np.where(rng.random(y.size) < noise, 1 - y, y)


def two_gaussians(size, noise, rng, m=8, margin=0.25):
    """Classes separated by the sign of x0, kept at least ``margin`` apart."""
    y = (np.arange(size) % 2).astype(np.int64)
    rng.shuffle(y)
    X = rng.standard_normal((size, m))
    x0 = np.abs(rng.standard_normal(size)) + margin
    X[:, 0] = np.where(y == 1, x0, -x0)
    return X, _flip(y, noise, rng)


def rings(size, noise, rng):
    """Inner disc versus outer annulus in two dimensions, plus a nuisance feature."""
    y = (np.arange(size) % 2).astype(np.int64)
    rng.shuffle(y)
    radius = np.where(y == 1, rng.uniform(0.0, 1.0, size), rng.uniform(1.3, 2.0, size))
    angle = rng.uniform(0.0, 2 * np.pi, size)
    X = np.column_stack([radius * np.cos(angle), radius * np.sin(angle), rng.random(size)])
    return X, _flip(y, noise, rng)


def checkerboard(size, noise, rng, cells=4):
    X = rng.random((size, 2))
    idx = np.floor(X * cells).astype(np.int64)
    y = ((idx[:, 0] + idx[:, 1]) % 2).astype(np.int64)
    return X, _flip(y, noise, rng)


def make_synthetic(spec: str, size: int = 2000, noise: float = 0.0, seed=0) -> Dataset:
    if spec not in SPECS:
        raise UnknownSpec(f"unknown synthetic dataset {spec!r}; choose from {SPECS}")
    if size < 200:
        raise PrelimError("synthetic datasets need at least 200 rows")
    rng = np.random.default_rng(seed)
    X, y = {"two-gaussians": two_gaussians, "rings": rings, "checkerboard": checkerboard}[spec](
        int(size), float(noise), rng)
    return Dataset(X, y)
