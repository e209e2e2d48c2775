"""Statistical and geometric checks shared by the unit and acceptance suites."""
import numpy as np
from scipy.spatial import cKDTree


def segment_distances(p, a, b):
    """Row-wise distance from p[i] to segment a[i] b[i]."""
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    u = np.einsum("ij,ij->i", p - a, ab) / np.where(denom == 0, 1.0, denom)
    u = np.clip(np.where(denom == 0, 0.0, u), 0.0, 1.0)
    return np.linalg.norm(p - (a + u[:, None] * ab), axis=1)


def uniform_means_ok(samples, low, high):
    """Every column mean within 3 sigma / sqrt(L) of the range midpoint."""
    L = samples.shape[0]
    sigma = (high - low) / np.sqrt(12)
    dev = np.abs(samples.mean(axis=0) - (low + high) / 2)
    return bool(np.all(dev <= 3 * sigma / np.sqrt(L))), dev


def kde_variance_ok(samples, X, h, rel=0.02):
    """Per-feature sample variance within ``rel`` of train variance + h^2."""
    target = X.var(axis=0) + h ** 2
    got = samples.var(axis=0)
    err = np.abs(got - target) / target
    return bool(np.all(err <= rel)), err


def frequencies_ok(draws, probs):
    """Observed category counts within 3 binomial sigma of expectation."""
    L = draws.size
    counts = np.bincount(draws, minlength=probs.size)
    sigma = np.sqrt(L * probs * (1 - probs))
    dev = np.abs(counts - L * probs)
    return bool(np.all(dev <= 3 * sigma + 1e-12)), dev / np.maximum(sigma, 1e-300)


def max_distance_to_set(points, X):
    """Largest distance from any point to its nearest row of X."""
    d, _ = cKDTree(X).query(points, k=1)
    return float(d.max()) if d.size else 0.0
