"""
Common factor models in correlation metric.

A model is ``x = L xi + Psi eps`` with loadings ``L`` (p x q), factor
correlations ``Phi`` (q x q, unit diagonal) and a diagonal matrix of unique
loadings ``Psi``. The observed covariance it implies is

    Sigma = L Phi L' + Psi^2

(unique *loadings* enter squared, so Sigma has unit diagonal whenever
``Psi_ii = sqrt(1 - communality_i)``).
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, HeywoodCase, ValidationError
from .linalg import as_symmetric, sym_sqrt

#: Offsets added to the mean salient loading when salient loadings vary.
SALIENT_OFFSETS = np.array([-0.10, -0.05, 0.0, 0.05, 0.10])

# Two five-row columns of cross-loadings. The variables of factor k load
# NONSALIENT_SEQUENCE[i - 1] on factor k + i (mod q), i = 1, ..., q - 1; with
# three factors only A and B are used. The longer sequence keeps every grid
# model free of Heywood cases and of negative regression-score bias.
_NONSALIENT_A = np.array([0.10, 0.10, 0.10, 0.00, -0.10])
_NONSALIENT_B = np.array([-0.10, -0.10, 0.10, 0.10, 0.00])
_ZERO = np.zeros(5)
NONSALIENT_SEQUENCE = (
    _NONSALIENT_A, _NONSALIENT_B, _NONSALIENT_A, -_NONSALIENT_A,
    _ZERO, _NONSALIENT_B, -_NONSALIENT_A, _NONSALIENT_A,
)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FactorModel:
    """
    Factor model parameters.

    Parameters
    ----------
    loadings : array-like, shape (p, q)
    phi : array-like, shape (q, q)
        Factor correlation matrix; the diagonal must be one.
    unique_loadings : array-like, shape (p,)
        Diagonal of ``Psi``; strictly positive.
    """

    loadings: np.ndarray
    phi: np.ndarray
    unique_loadings: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.loadings, dtype=float)
        if L.ndim == 1:
            L = L[:, None]
        if L.ndim != 2:
            raise DimensionMismatch(f"loadings must be 2-D, got shape {L.shape}")
        p, q = L.shape
        phi = as_symmetric(self.phi)
        if phi.shape != (q, q):
            raise DimensionMismatch(f"phi has shape {phi.shape}, expected {(q, q)}")
        if np.max(np.abs(np.diag(phi) - 1.0)) > 1e-10:
            raise ValidationError("phi must have a unit diagonal")
        np.fill_diagonal(phi, 1.0)
        sym_sqrt(phi)  # raises NotPSD
        psi = np.asarray(self.unique_loadings, dtype=float).ravel()
        if psi.shape != (p,):
            raise DimensionMismatch(f"unique_loadings has length {psi.size}, expected {p}")
        if not np.all(np.isfinite(L)) or not np.all(np.isfinite(psi)):
            raise ValidationError("model parameters must be finite")
        if np.any(psi <= 0):
            raise HeywoodCase("unique loadings must be strictly positive")
        object.__setattr__(self, "loadings", _frozen(L))
        object.__setattr__(self, "phi", _frozen(phi))
        object.__setattr__(self, "unique_loadings", _frozen(psi))

    @classmethod
    def from_loadings(cls, loadings, phi=None, heywood_clamp=None):
        """Build a correlation-metric model, deriving ``Psi`` from the communalities."""
        L = np.asarray(loadings, dtype=float)
        if L.ndim == 1:
            L = L[:, None]
        if phi is None:
            phi = np.eye(L.shape[1])
        return cls(L, phi, uniqueness_from_loadings(L, phi, heywood_clamp=heywood_clamp))

    @property
    def p(self):
        return self.loadings.shape[0]

    @property
    def q(self):
        return self.loadings.shape[1]

    @property
    def communalities(self):
        return communalities(self.loadings, self.phi)

    @cached_property
    def sigma(self):
        """Implied covariance matrix ``L Phi L' + Psi^2``."""
        return implied_covariance(self)

    @cached_property
    def phi_sqrt(self):
        return sym_sqrt(self.phi)


def communalities(loadings, phi):
    """``diag(L Phi L')``."""
    L = np.asarray(loadings, dtype=float)
    return np.einsum("ij,jk,ik->i", L, np.asarray(phi, dtype=float), L)


def implied_covariance(model):
    """
    Observed covariance implied by a factor model.

    Returns
    -------
    numpy.ndarray, shape (p, p)
        ``L Phi L' + diag(Psi)^2``, exactly symmetric.
    """
    L = model.loadings
    S = L @ model.phi @ L.T
    S = (S + S.T) / 2
    S[np.diag_indices_from(S)] += model.unique_loadings**2
    return S


def uniqueness_from_loadings(loadings, phi, heywood_clamp=None):
    """
    Unique loadings that give the model a unit-diagonal covariance.

    ``Psi_ii = sqrt(1 - (L Phi L')_ii)``.

    Parameters
    ----------
    heywood_clamp : float, optional
        If given, communalities are capped at ``1 - heywood_clamp`` instead
        of raising.

    Raises
    ------
    HeywoodCase
        If any communality is >= 1 and no clamp was requested.
    """
    h = communalities(loadings, phi)
    if heywood_clamp is not None:
        h = np.minimum(h, 1.0 - heywood_clamp)
    elif np.any(h >= 1.0):
        bad = np.flatnonzero(h >= 1.0)
        raise HeywoodCase(f"communality >= 1 for variable(s) {bad.tolist()}")
    return np.sqrt(1.0 - h)


@dataclass(frozen=True)
class LoadingCondition:
    """
    One population condition of the simulation design.

    Attributes
    ----------
    q : int
        Number of factors.
    sl : float
        Mean salient loading.
    phi_val : float
        Common off-diagonal factor correlation.
    p_per_q : int
        Salient variables per factor.
    var_sl : bool
        Salient loadings vary around ``sl`` by -.10, -.05, 0, .05, .10.
    nl : bool
        Non-zero (+/-.10) non-salient loadings.
    """

    q: int
    sl: float
    phi_val: float
    p_per_q: int = 5
    var_sl: bool = False
    nl: bool = False

    def __post_init__(self):
        if self.q < 1 or self.p_per_q < 1:
            raise ValidationError("q and p_per_q must be positive")
        if (self.var_sl or self.nl) and self.p_per_q % 5:
            raise ValidationError("loading variability patterns need p_per_q divisible by 5")

    @property
    def p(self):
        return self.q * self.p_per_q

    def as_dict(self):
        return {
            "q": self.q,
            "sl": self.sl,
            "phi": self.phi_val,
            "p_per_q": self.p_per_q,
            "var_sl": int(self.var_sl),
            "nl": int(self.nl),
        }


def loading_pattern(cond):
    """Population loading matrix for a condition (no validation of communalities)."""
    q, k = cond.q, cond.p_per_q
    reps = k // 5 if k % 5 == 0 else 0
    L = np.zeros((cond.p, q))
    for f in range(q):
        rows = slice(f * k, (f + 1) * k)
        salient = np.full(k, float(cond.sl))
        if cond.var_sl:
            salient = np.round(salient + np.tile(SALIENT_OFFSETS, reps), 10)
        L[rows, f] = salient
        if cond.nl:
            for i in range(1, q):
                L[rows, (f + i) % q] = np.tile(NONSALIENT_SEQUENCE[(i - 1) % len(NONSALIENT_SEQUENCE)], reps)
    return L


def factor_correlations(q, phi_val):
    """Equicorrelation matrix with ``phi_val`` off the diagonal."""
    phi = np.full((q, q), float(phi_val))
    np.fill_diagonal(phi, 1.0)
    return phi


def build_loading_pattern(cond):
    """
    Population factor model for a simulation condition.

    Raises
    ------
    HeywoodCase
        If some variable's communality reaches one.
    """
    L = loading_pattern(cond)
    return FactorModel.from_loadings(L, factor_correlations(cond.q, cond.phi_val))
