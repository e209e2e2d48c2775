"""Point generators behind a common ``fit`` / ``sample(L)`` interface."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import UnknownSpec
from .base import Generator, Replay, features
from .cmm import RegionSampler, fit_cmm
from .gmm import Mixture, fit_gmm
from .kde import (BANDWIDTH_FLOOR, bandwidth_matrix, bandwidths, fit_kde_family, kdeb_radius,
                  silverman_bandwidth)
from .neighbors import fit_munge, fit_smote_family, fit_vva
from .simple import fit_rerx, fit_simple, fit_ssl, ssl_size

KINDS = ("dummy", "unif", "norm", "gmm", "gmmal", "kdem", "kde", "kdeb", "cmm", "rerx", "vva",
         "smote", "adasyn", "munge", "ssl")
# generators that need the fitted black box
NEEDS_BB = ("rerx", "vva")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnknownSpec(f"unknown generator {self.kind!r}; choose from {KINDS}")


def fit_generator(spec, X, y=None, *, bb=None, forest=None, pool=None, seed=None) -> Generator:
    """Fit the generator named by ``spec`` (a GeneratorSpec or a kind string).

    ``bb`` is required by rerx and vva, ``forest`` by cmm, ``pool`` (rows
    outside the train set) by ssl.
    """
    if isinstance(spec, str):
        spec = GeneratorSpec(spec)
    k, p = spec.kind, dict(spec.params)
    if k in ("dummy", "unif", "norm"):
        return fit_simple(X, k, seed)
    if k in ("kdem", "kde", "kdeb"):
        return fit_kde_family(X, k, seed)
    if k in ("gmm", "gmmal"):
        return fit_gmm(X, diagonal_only=k == "gmmal", seed=seed, **p)
    if k == "cmm":
        return fit_cmm(X, forest, seed)
    if k == "rerx":
        return fit_rerx(X, bb, y, seed)
    if k == "vva":
        return fit_vva(X, bb, seed, **p)
    if k in ("smote", "adasyn"):
        return fit_smote_family(X, k, seed=seed, **p)
    if k == "munge":
        return fit_munge(X, seed=seed, **p)
    return fit_ssl(pool, features(X).shape[0], seed)


__all__ = [
    "BANDWIDTH_FLOOR", "Generator", "GeneratorSpec", "KINDS", "Mixture", "NEEDS_BB",
    "RegionSampler", "Replay", "bandwidth_matrix", "bandwidths", "fit_cmm", "fit_generator",
    "fit_gmm", "fit_kde_family", "fit_munge", "fit_rerx", "fit_simple", "fit_smote_family",
    "fit_ssl", "fit_vva", "kdeb_radius", "silverman_bandwidth", "ssl_size",
]
