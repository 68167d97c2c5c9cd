"""
Dense symmetric-matrix kernels.

All routines work on small (at most a few hundred rows), well-conditioned
correlation-scale matrices and use the symmetric eigendecomposition
throughout, so square roots are the unique symmetric roots.

Tolerances are relative: an eigenvalue ``w`` is compared against
``tol * max(|w|)``.
"""

import numpy as np

from .errors import DimensionMismatch, NonPositiveDiagonal, NotPD, NotPSD, ValidationError

DEFAULT_TOL = 1e-10


def as_symmetric(a, atol=1e-8):
    """
    Validate a square matrix and return an exactly symmetric float copy.

    Parameters
    ----------
    a : array-like
        Candidate matrix.
    atol : float
        Largest tolerated asymmetry ``max|a - a'|`` before raising, relative
        to ``max(1, max|a|)``.

    Returns
    -------
    numpy.ndarray
        ``(a + a') / 2``; entry ``(i, j)`` and ``(j, i)`` are bit-identical.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix contains non-finite entries")
    if a.size and np.max(np.abs(a - a.T)) > atol * max(1.0, np.max(np.abs(a))):
        raise ValidationError("matrix is not symmetric")
    return (a + a.T) / 2


def _eigh(S):
    w, V = np.linalg.eigh(S)
    scale = np.max(np.abs(w)) if w.size else 0.0
    return w, V, scale


def _rebuild(V, d):
    R = (V * d) @ V.T
    return (R + R.T) / 2


def sym_sqrt(S, tol=DEFAULT_TOL):
    """
    Symmetric square root of a positive semi-definite matrix.

    Eigenvalues in ``[-tol, 0)`` (relative to the largest eigenvalue) are
    clamped to zero, so rank-deficient inputs are accepted.

    Raises
    ------
    NotPSD
        If the smallest eigenvalue is below ``-tol`` (relative).
    """
    S = as_symmetric(S)
    w, V, scale = _eigh(S)
    if w.size and w[0] < -tol * scale:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3g} is negative")
    return _rebuild(V, np.sqrt(np.clip(w, 0.0, None)))


def sym_inv_sqrt(S, tol=DEFAULT_TOL):
    """Symmetric inverse square root ``S^{-1/2}`` of a positive definite matrix."""
    S = as_symmetric(S)
    w, V, scale = _eigh(S)
    if w.size and w[0] <= tol * scale:
        raise NotPD(f"smallest eigenvalue {w[0]:.3g} is not positive")
    return _rebuild(V, 1.0 / np.sqrt(w))


def invert_spd(S, tol=DEFAULT_TOL):
    """Inverse of a symmetric positive definite matrix."""
    S = as_symmetric(S)
    w, V, scale = _eigh(S)
    if w.size and w[0] <= tol * scale:
        raise NotPD(f"smallest eigenvalue {w[0]:.3g} is not positive")
    return _rebuild(V, 1.0 / w)


def cov_to_corr(S):
    """
    Standardize a covariance matrix to a correlation matrix.

    ``C = D^{-1/2} S D^{-1/2}`` with ``D = diag(S)``; the diagonal of the
    result is set to exactly one.
    """
    S = as_symmetric(S)
    d = np.diag(S)
    if np.any(d <= 0):
        raise NonPositiveDiagonal("covariance matrix has a non-positive diagonal entry")
    s = np.sqrt(d)
    C = S / np.outer(s, s)
    C = (C + C.T) / 2
    np.fill_diagonal(C, 1.0)
    return C


def offdiag(C):
    """Upper-triangle (off-diagonal) entries of a square matrix, row-major."""
    C = np.asarray(C)
    return C[np.triu_indices(C.shape[0], 1)]
