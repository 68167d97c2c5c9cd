import numpy as np

from cpscores.linalg import cov_to_corr
from cpscores.model import FactorModel


def random_correlation(rng, q):
    G = rng.standard_normal((q, q + 2))
    return cov_to_corr(G @ G.T + 0.5 * np.eye(q))


def random_model(rng, q=None, p=None, max_communality=0.85):
    """A random valid correlation-metric factor model."""
    q = q or int(rng.integers(1, 6))
    p = p or int(rng.integers(q + 2, 21))
    L = rng.uniform(-0.3, 0.9, size=(p, q))
    phi = random_correlation(rng, q)
    h = np.einsum("ij,jk,ik->i", L, phi, L)
    L = L * np.sqrt(np.minimum(1.0, max_communality / np.maximum(h, 1e-12)))[:, None]
    return FactorModel.from_loadings(L, phi)


def random_spd(rng, n, ridge=0.1):
    G = rng.standard_normal((n, n))
    return G @ G.T + ridge * np.eye(n)


def data_with_covariance(rng, sigma, n):
    """n x p data whose sample mean is zero and sample covariance (n - 1) is exactly sigma."""
    p = sigma.shape[0]
    W = rng.standard_normal((n, p))
    W -= W.mean(axis=0)
    C = W.T @ W / (n - 1)
    w, V = np.linalg.eigh(C)
    W = W @ (V / np.sqrt(w)) @ V.T
    s, U = np.linalg.eigh(sigma)
    return W @ (U * np.sqrt(s)) @ U.T
