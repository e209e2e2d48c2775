"""Gaussian kernel density samplers (kdem, kde) and the ball sampler kdeb."""
import numpy as np
from scipy.spatial import cKDTree

from .base import Generator, features

BANDWIDTH_FLOOR = 1e-6
KDEB_NEIGHBOR = 10


def silverman_bandwidth(x) -> float:
    """0.9 * min(std, IQR / 1.349) * n^(-1/5).

    When the IQR is zero but the spread is not, the std alone is used; a fully
    constant feature gets ``BANDWIDTH_FLOOR``.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    std = float(np.std(x, ddof=1)) if n > 1 else 0.0
    q75, q25 = np.percentile(x, [75, 25])
    iqr = float(q75 - q25) / 1.349
    spread = [v for v in (std, iqr) if v > 0]
    if not spread:
        return BANDWIDTH_FLOOR
    return max(0.9 * min(spread) * n ** (-0.2), BANDWIDTH_FLOOR)


def bandwidths(X):
    return np.array([silverman_bandwidth(X[:, j]) for j in range(X.shape[1])])


def bandwidth_matrix(hs):
    """Isotropic bandwidth: mean per-feature bandwidth times the identity."""
    hs = np.asarray(hs, dtype=np.float64)
    return float(np.mean(hs)) * np.eye(hs.size)


class MarginalKDE(Generator):
    """Each feature drawn independently from its own 1-D Gaussian KDE."""

    kind = "kdem"

    def __init__(self, X, seed=None):
        super().__init__(seed)
        self.X = X
        self.h = bandwidths(X)
        self.m = X.shape[1]

    def _sample(self, L, rng):
        n = self.X.shape[0]
        rows = rng.integers(n, size=(L, self.m))
        base = self.X[rows, np.arange(self.m)]
        return base + self.h * rng.standard_normal((L, self.m))


class KDE(Generator):
    """Multivariate Gaussian KDE with bandwidth matrix mean(h) * I."""

    kind = "kde"

    def __init__(self, X, seed=None):
        super().__init__(seed)
        self.X = X
        self.h = bandwidths(X)
        self.H = bandwidth_matrix(self.h)
        self.scale = float(self.H[0, 0]) if self.H.size else 0.0
        self.m = X.shape[1]

    def _sample(self, L, rng):
        rows = rng.integers(self.X.shape[0], size=L)
        return self.X[rows] + self.scale * rng.standard_normal((L, self.m))


def kdeb_radius(X, neighbor=KDEB_NEIGHBOR) -> float:
    """Mean distance from each point to its ``neighbor``-th nearest other point."""
    n = X.shape[0]
    if n < 2:
        return 0.0
    kth = min(neighbor, n - 1)
    dist, _ = cKDTree(X).query(X, k=kth + 1)
    return float(np.mean(dist[:, kth]))


def ball_offsets(L, m, radius, rng):
    """Uniform draws from the m-ball of the given radius."""
    z = rng.standard_normal((L, m))
    norm = np.linalg.norm(z, axis=1, keepdims=True)
    norm[norm == 0] = 1.0
    u = rng.random((L, 1)) ** (1.0 / m)
    return z / norm * (radius * u)


class BallKDE(Generator):
    kind = "kdeb"

    def __init__(self, X, seed=None):
        super().__init__(seed)
        self.X = X
        self.radius = kdeb_radius(X)
        self.m = X.shape[1]

    def _sample(self, L, rng):
        rows = rng.integers(self.X.shape[0], size=L)
        return self.X[rows] + ball_offsets(L, self.m, self.radius, rng)


def fit_kde_family(d, kind, seed=None) -> Generator:
    X = features(d)
    cls = {"kdem": MarginalKDE, "kde": KDE, "kdeb": BallKDE}.get(kind)
    if cls is None:
        raise ValueError(f"not a kde generator: {kind!r}")
    return cls(X, seed)
