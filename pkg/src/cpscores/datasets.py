"""Bundled empirical example: three-occasion CFA of gender stereotypes (n = 242)."""

from importlib import resources

import numpy as np

from .matrixio import parse_matrix
from .model import FactorModel

_FILES = {
    "loadings": "empirical_loadings.csv",
    "phi": "empirical_phi.csv",
    "sigma": "empirical_sigma.csv",
    "sigma_lower": "empirical_sigma_lower.csv",
}


def fixture_path(name):
    """Filesystem path of a bundled fixture file (``loadings``, ``phi``, ``sigma``)."""
    return resources.files("cpscores") / "data" / _FILES[name]


def _load(name):
    return parse_matrix(fixture_path(name).read_text(), source=_FILES[name])[0]


def empirical_example():
    """
    The empirical example's estimated model and observed correlation matrix.

    Returns
    -------
    model : FactorModel
        Loadings (15 x 3) and factor correlations, with unique loadings
        ``sqrt(1 - communality)``.
    sigma : numpy.ndarray, shape (15, 15)
        Model-estimated correlations including four correlated errors, rebuilt
        from the published lower triangle as ``S + S' - I``.
    """
    lower = _load("sigma_lower")
    sigma = lower + lower.T - np.eye(lower.shape[0])
    model = FactorModel.from_loadings(_load("loadings"), _load("phi"))
    return model, sigma
