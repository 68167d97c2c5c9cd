"""
Factor score predictors and their diagnostics.

Every predictor here is linear in the observed variables, ``scores = X @ B``
with a p x q weight matrix ``B``:

* ``regression`` -- Thurstone's predictor, ``B' = Phi L' Sigma^-1``; maximal
  determinacy, but its inter-correlations overstate ``Phi``.
* ``mcdonald`` -- McDonald's correlation-preserving predictor,
  ``B' = N (N'L'Psi^-2 Sigma Psi^-2 L N)^{-1/2} N'L'Psi^-2`` with
  ``N = Phi^{1/2}``.
* ``cp-from-regression`` -- the correlation-preserving transform of the
  regression predictor, ``B' = Phi^{1/2} (L'Sigma^-1 L)^{-1/2} L'Sigma^-1``.

Determinacy is the correlation of each standardized predictor with its
factor, ``diag(B'L Phi) / sqrt(diag(B'Sigma B))``, which covers all three
kinds (and any other linear predictor) with one formula.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateWeights, DimensionMismatch, HeywoodCase, TooFewRows
from .linalg import as_symmetric, cov_to_corr, invert_spd, sym_inv_sqrt, sym_sqrt

REGRESSION = "regression"
MCDONALD = "mcdonald"
CP_FROM_REGRESSION = "cp-from-regression"
KINDS = (REGRESSION, MCDONALD, CP_FROM_REGRESSION)

_MIN_VARIANCE = 1e-14


@dataclass(frozen=True, eq=False)
class ScoreWeights:
    """Weight matrix ``B`` (p x q) of a linear factor score predictor."""

    weights: np.ndarray
    kind: str

    def apply(self, data):
        """Scores for an n x p data matrix (one row per observation)."""
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[1] != self.weights.shape[0]:
            raise DimensionMismatch(
                f"data has shape {data.shape}; expected {self.weights.shape[0]} columns"
            )
        return data @ self.weights


@dataclass(frozen=True, eq=False)
class PredictorReport:
    """
    Diagnostics of one predictor.

    Attributes
    ----------
    determinacy : ndarray, shape (q,)
    intercorrelations : ndarray, shape (q, q)
    bias : ndarray, shape (q, q)
        ``intercorrelations - Phi``.
    loss : ndarray, shape (q,)
        Determinacy minus that of the regression predictor (<= 0).
    """

    kind: str
    determinacy: np.ndarray
    intercorrelations: np.ndarray
    bias: np.ndarray
    loss: np.ndarray


class BiasLoss(NamedTuple):
    bias: np.ndarray
    loss_c: np.ndarray
    loss_c2: np.ndarray


def _sigma(model, sigma):
    if sigma is None:
        return model.sigma
    S = as_symmetric(sigma)
    if S.shape != (model.p, model.p):
        raise DimensionMismatch(f"sigma has shape {S.shape}, expected {(model.p, model.p)}")
    return S


def _weights(w):
    return w.weights if isinstance(w, ScoreWeights) else np.asarray(w, dtype=float)


def regression_weights(model, sigma=None):
    """Regression predictor weights ``Sigma^-1 L Phi``."""
    S_inv = invert_spd(_sigma(model, sigma))
    return ScoreWeights(S_inv @ model.loadings @ model.phi, REGRESSION)


def mcdonald_weights(model, sigma=None):
    """McDonald's correlation-preserving predictor weights."""
    S = _sigma(model, sigma)
    psi2 = model.unique_loadings**2
    if np.any(psi2 <= 0):
        raise HeywoodCase("McDonald weights need positive unique loadings")
    W = model.loadings / psi2[:, None]
    N = model.phi_sqrt
    inner = N @ W.T @ S @ W @ N
    return ScoreWeights(W @ N @ sym_inv_sqrt(inner) @ N, MCDONALD)


def cp_from_regression_weights(model, sigma=None):
    """Weights of the correlation-preserving transform of the regression predictor."""
    S_inv = invert_spd(_sigma(model, sigma))
    SiL = S_inv @ model.loadings
    M = model.loadings.T @ SiL
    return ScoreWeights(SiL @ sym_inv_sqrt(M) @ model.phi_sqrt, CP_FROM_REGRESSION)


WEIGHT_FUNCTIONS = {
    REGRESSION: regression_weights,
    MCDONALD: mcdonald_weights,
    CP_FROM_REGRESSION: cp_from_regression_weights,
}


def score_weights(model, kind, sigma=None):
    try:
        fn = WEIGHT_FUNCTIONS[kind]
    except KeyError:
        raise ValueError(f"unknown predictor kind {kind!r}; expected one of {KINDS}") from None
    return fn(model, sigma)


def _predictor_covariance(model, w, sigma):
    B = _weights(w)
    if B.shape != model.loadings.shape:
        raise DimensionMismatch(f"weights have shape {B.shape}, expected {model.loadings.shape}")
    S = _sigma(model, sigma)
    C = B.T @ S @ B
    C = (C + C.T) / 2
    if np.any(np.diag(C) < _MIN_VARIANCE):
        raise DegenerateWeights("a predictor has (near) zero variance")
    return B, C


def determinacy(model, w, sigma=None):
    """
    Correlation of each standardized predictor with its factor.

    Parameters
    ----------
    model : FactorModel
    w : ScoreWeights or array-like, shape (p, q)
    sigma : array-like, optional
        Observed covariance; defaults to the model-implied matrix.

    Returns
    -------
    numpy.ndarray, shape (q,)
    """
    B, C = _predictor_covariance(model, w, sigma)
    cross = np.einsum("ij,ij->j", B, model.loadings @ model.phi)
    return cross / np.sqrt(np.diag(C))


def predictor_intercorrelations(model, w, sigma=None):
    """Correlation matrix of the predictors, ``cov_to_corr(B' Sigma B)``."""
    _, C = _predictor_covariance(model, w, sigma)
    return cov_to_corr(C)


def predictor_report(model, w, sigma=None, reference=None):
    """
    Determinacy, inter-correlations, bias against ``Phi`` and determinacy loss.

    ``reference`` is the regression predictor's determinacy vector; it is
    computed when omitted.
    """
    kind = w.kind if isinstance(w, ScoreWeights) else "custom"
    rho = determinacy(model, w, sigma)
    cor = predictor_intercorrelations(model, w, sigma)
    if reference is None:
        reference = rho if kind == REGRESSION else determinacy(
            model, regression_weights(model, sigma), sigma
        )
    return PredictorReport(kind, rho, cor, cor - model.phi, rho - reference)


def diagnose(model, sigma=None, kinds=KINDS):
    """Reports for several predictor kinds, keyed by kind."""
    ref = determinacy(model, regression_weights(model, sigma), sigma)
    return {
        kind: predictor_report(model, score_weights(model, kind, sigma), sigma, ref)
        for kind in kinds
    }


def bias_and_loss(model, report_r, report_c, report_c2):
    """
    Over-estimation of ``Phi`` by the regression predictor and the
    determinacy given up by the two correlation-preserving predictors.
    """
    bias = report_r.intercorrelations - model.phi
    np.fill_diagonal(bias, 0.0)
    return BiasLoss(
        bias,
        report_c.determinacy - report_r.determinacy,
        report_c2.determinacy - report_r.determinacy,
    )


def standardize(data):
    """Center columns and scale them to unit variance (denominator n - 1)."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise TooFewRows("standardizing needs at least two rows")
    centered = data - data.mean(axis=0)
    sd = centered.std(axis=0, ddof=1)
    if np.any(sd < np.sqrt(_MIN_VARIANCE)):
        raise DegenerateWeights("a column has zero variance")
    return centered / sd


def transform_scores(scores, phi):
    """
    Turn any set of factor scores into scores whose correlations equal ``Phi``.

    The columns are standardized, whitened by the inverse square root of their
    sample correlation matrix and colored by ``Phi^{1/2}``. Moments use the
    denominator n - 1.

    Parameters
    ----------
    scores : array-like, shape (n, q)
        One row per observation.
    phi : array-like, shape (q, q)
        Target correlation matrix.

    Returns
    -------
    numpy.ndarray, shape (n, q)
        Standardized scores with sample correlation matrix ``Phi``.

    Raises
    ------
    TooFewRows
        If ``n < q + 1``.
    NotPD
        If the score columns are collinear.
    """
    X = np.asarray(scores, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, q = X.shape
    phi = as_symmetric(phi)
    if phi.shape != (q, q):
        raise DimensionMismatch(f"phi has shape {phi.shape}, expected {(q, q)}")
    if n < q + 1:
        raise TooFewRows(f"need at least {q + 1} rows, got {n}")
    Z = standardize(X)
    C = cov_to_corr(Z.T @ Z / (n - 1))
    return Z @ sym_inv_sqrt(C) @ sym_sqrt(phi)
