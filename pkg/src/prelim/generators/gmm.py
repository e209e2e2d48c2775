"""Gaussian mixture sampler with BIC model selection.

EM fitting is delegated to scikit-learn; sampling is done here so it draws
from the same seeded stream as every other generator.
"""
import warnings

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.mixture import GaussianMixture

from .base import Generator, features

MAX_COMPONENTS = 29
COVARIANCE_TYPES = ("full", "diag", "spherical", "tied")
N_INIT = 5
MAX_ITER = 200
REG_COVAR = 1e-6


def _full_covariances(gm):
    k, m = gm.means_.shape
    c = gm.covariances_
    if gm.covariance_type == "full":
        return np.array(c)
    if gm.covariance_type == "diag":
        return np.array([np.diag(v) for v in c])
    if gm.covariance_type == "spherical":
        return np.array([v * np.eye(m) for v in c])
    return np.repeat(c[None], k, axis=0)  # tied


def select_mixture(X, diagonal_only=False, max_components=MAX_COMPONENTS, seed=None):
    """Fit every (k, covariance type) pair and keep the lowest BIC.

    Returns the fitted mixture and a table of BIC values.
    """
    types = ("diag",) if diagonal_only else COVARIANCE_TYPES
    kmax = max(1, min(max_components, X.shape[0]))
    best, best_bic, table = None, np.inf, {}
    for cov in types:
        for k in range(1, kmax + 1):
            gm = GaussianMixture(n_components=k, covariance_type=cov, n_init=N_INIT,
                                 max_iter=MAX_ITER, reg_covar=REG_COVAR, random_state=seed)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ConvergenceWarning)
                gm.fit(X)
            bic = float(gm.bic(X))
            table[(cov, k)] = bic
            if bic < best_bic:
                best, best_bic = gm, bic
    return best, table


class Mixture(Generator):
    kind = "gmm"

    def __init__(self, weights, means, covariances, seed=None, kind="gmm"):
        super().__init__(seed)
        w = np.asarray(weights, dtype=np.float64)
        self.weights = w / w.sum()
        self.means = np.asarray(means, dtype=np.float64)
        self.covariances = np.asarray(covariances, dtype=np.float64)
        self.m = self.means.shape[1]
        self.kind = kind
        self._chol = np.array([_safe_cholesky(c) for c in self.covariances])

    @property
    def n_components(self):
        return self.weights.size

    def _sample(self, L, rng):
        comp = rng.choice(self.n_components, size=L, p=self.weights)
        z = rng.standard_normal((L, self.m))
        return self.means[comp] + np.einsum("lij,lj->li", self._chol[comp], z)


def _safe_cholesky(c):
    try:
        return np.linalg.cholesky(c)
    except np.linalg.LinAlgError:
        return np.linalg.cholesky(c + REG_COVAR * np.eye(c.shape[0]))


def fit_gmm(d, diagonal_only=False, seed=None, max_components=MAX_COMPONENTS) -> Mixture:
    X = features(d)
    gm, table = select_mixture(X, diagonal_only, max_components, seed)
    g = Mixture(gm.weights_, gm.means_, _full_covariances(gm), seed,
                "gmmal" if diagonal_only else "gmm")
    g.covariance_type_ = gm.covariance_type
    g.bic_ = table
    return g
