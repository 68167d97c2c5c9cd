"""
Monte Carlo sample simulation.

Each replicate draws normal data from a population model, extracts ``q``
factors by iterative principal axis factoring, rotates them obliquely toward
the population loading pattern, and evaluates the three score predictors
built from the estimated model and the sample correlation matrix.

Random streams: replicate ``r`` of a condition uses
``numpy.random.SeedSequence(seed, spawn_key=condition_key + (r,))`` where the
condition key is made of the condition's own levels (see
:meth:`SampleCondition.stream_key`). A replicate's data therefore depends
only on the seed, the condition and the replicate index, never on how the
grid was filtered, ordered or split across worker processes.
"""

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import linear_sum_assignment

from .errors import DomainError, FactorScoreError, RankDeficient, ValidationError
from .linalg import as_symmetric, offdiag
from .model import FactorModel, LoadingCondition, build_loading_pattern
from .predictors import KINDS, determinacy, predictor_intercorrelations, score_weights, standardize
from .summary import METRICS, SummaryRow, SummaryTable, group_label, moments

Q_LEVELS = (3, 6, 9)
SL_LEVELS = (0.40, 0.50, 0.60)
PHI_LEVELS = (0.00, 0.30, 0.50)
N_LEVELS = (300, 600, 900)
DEFAULT_REPLICATES = 1000

PAF_EPS = 1e-6
PAF_MAX_ITER = 1000
HEYWOOD_CLAMP = 1e-6

_SUFFIX = ("r", "c", "c2")

#: Replicate-level metrics: mean validity (correlation with the true factor
#: scores), mean off-diagonal predictor correlation, mean model-based
#: determinacy, and the mean off-diagonal estimated factor correlation.
REPLICATE_METRICS = METRICS + ("Pm_r", "Pm_c", "Pm_c2", "phi_hat")

FIGURE_COLUMNS = (
    "sl", "phi_pop", "nl", "n", "var_sl",
    "P_r_mean", "P_r_sd", "P_c_mean", "P_c_sd",
    "Cor_r_mean", "Cor_r_sd", "Cor_c_mean", "Cor_c_sd",
    "replicates", "excluded_count",
)


@dataclass(frozen=True)
class SampleCondition:
    """One cell of the sample design: a population condition plus sample size."""

    base: LoadingCondition
    n: int
    replicates: int = DEFAULT_REPLICATES
    seed: int = 0

    def __post_init__(self):
        if self.replicates < 1:
            raise ValidationError("replicates must be >= 1")
        if self.n < self.base.p + 1:
            raise ValidationError(f"n = {self.n} is too small for p = {self.base.p}")

    def stream_key(self):
        b = self.base
        return (
            b.q, round(b.sl * 1000), round(b.phi_val * 1000), b.p_per_q,
            int(b.var_sl), int(b.nl), self.n,
        )

    def replicate_rng(self, replicate):
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream_key() + (replicate,))
        return np.random.Generator(np.random.PCG64(ss))

    def as_dict(self):
        return {**self.base.as_dict(), "n": self.n}


def enumerate_sample_grid(replicates=DEFAULT_REPLICATES, seed=0):
    """The 3 x 3 x 3 x 2 x 2 x 3 = 324 sample conditions (p/q = 5)."""
    return [
        SampleCondition(LoadingCondition(q, sl, phi, 5, var, nl), n, replicates, seed)
        for q, sl, phi, var, nl, n in itertools.product(
            Q_LEVELS, SL_LEVELS, PHI_LEVELS, (False, True), (False, True), N_LEVELS
        )
    ]


# -- random numbers ----------------------------------------------------------


def normal_pair(u1, u2):
    """
    Box-Muller transform of two uniforms into two independent standard normals.

    Parameters
    ----------
    u1 : float or ndarray in (0, 1]
    u2 : float or ndarray in [0, 1)

    Returns
    -------
    z1, z2
        ``sqrt(-2 ln u1) cos(2 pi u2)`` and ``sqrt(-2 ln u1) sin(2 pi u2)``.
    """
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if np.any(u1 <= 0) or np.any(u1 > 1):
        raise DomainError("u1 must lie in (0, 1]")
    if np.any(u2 < 0) or np.any(u2 >= 1):
        raise DomainError("u2 must lie in [0, 1)")
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    z1, z2 = r * np.cos(theta), r * np.sin(theta)
    if z1.ndim == 0:
        return float(z1), float(z2)
    return z1, z2


def box_muller(rng, shape):
    """Standard normal array of the given shape drawn via :func:`normal_pair`."""
    size = int(np.prod(shape))
    m = (size + 1) // 2
    u1 = 1.0 - rng.random(m)
    u2 = rng.random(m)
    z1, z2 = normal_pair(u1, u2)
    return np.concatenate([z1, z2])[:size].reshape(shape)


def generate_sample(model, n, rng, return_factors=False):
    """
    Draw ``n`` observations from a factor model.

    Factor scores are ``z Phi^{1/2}`` with ``z`` iid standard normal, unique
    factor scores are iid standard normal, and ``x = L xi + Psi eps`` row by
    row.

    Returns
    -------
    X : ndarray, shape (n, p)
    xi : ndarray, shape (n, q)
        Only when ``return_factors`` is true.
    """
    xi = box_muller(rng, (n, model.q)) @ model.phi_sqrt
    eps = box_muller(rng, (n, model.p))
    X = xi @ model.loadings.T + eps * model.unique_loadings
    return (X, xi) if return_factors else X


# -- estimation --------------------------------------------------------------


class PAFResult(NamedTuple):
    loadings: np.ndarray
    communalities: np.ndarray
    iterations: int
    change: float
    converged: bool
    heywood: bool


def _initial_communalities(R):
    try:
        w = np.linalg.eigvalsh(R)
        if w[0] <= 1e-12 * w[-1]:
            raise np.linalg.LinAlgError
        return 1.0 - 1.0 / np.diag(np.linalg.inv(R))
    except np.linalg.LinAlgError:
        A = np.abs(R - np.diag(np.diag(R)))
        return A.max(axis=1)


def principal_axis(R, q, max_iter=PAF_MAX_ITER, eps=PAF_EPS, clamp=HEYWOOD_CLAMP):
    """
    Iterative principal axis factoring.

    Starts from squared multiple correlations (or the largest absolute
    correlation per row when ``R`` is singular), then repeatedly replaces the
    diagonal of ``R`` by the current communalities and takes the ``q``
    leading eigenpairs until the largest communality change is below ``eps``.
    Communalities are capped at ``1 - clamp``.

    Returns
    -------
    PAFResult
        Unrotated loadings plus convergence metadata; ``converged`` is false
        when ``max_iter`` was reached (the last iterate is returned).
    """
    R = as_symmetric(R)
    p = R.shape[0]
    if not 1 <= q < p:
        raise ValidationError(f"need 1 <= q < p, got q = {q}, p = {p}")
    h = np.minimum(_initial_communalities(R), 1.0 - clamp)
    Rr = R.copy()
    diag = np.diag_indices(p)
    change = np.inf
    it = 0
    L = np.zeros((p, q))
    while it < max_iter:
        it += 1
        Rr[diag] = h
        w, V = eigh(Rr, subset_by_index=(p - q, p - 1), check_finite=False)
        L = V[:, ::-1] * np.sqrt(np.clip(w[::-1], 0.0, None))
        h_new = np.minimum(np.einsum("ij,ij->i", L, L), 1.0 - clamp)
        change = float(np.max(np.abs(h_new - h)))
        h = h_new
        if change < eps:
            break
    heywood = bool(np.any(h >= 1.0 - clamp))
    return PAFResult(L, h, it, change, change < eps, heywood)


def oblique_target_rotation(A, target):
    """
    Oblique least-squares (Procrustes) rotation toward a target pattern.

    Solves ``min ||A T - target||`` for an unconstrained ``T``, then rescales
    the columns of ``T`` so that the implied factor correlations
    ``Phi = (T'T)^{-1}`` have a unit diagonal. Columns are finally matched to
    the target columns by maximal absolute congruence and reflected so that
    the congruence is positive.

    Returns
    -------
    loadings : ndarray, shape (p, q)
        Rotated pattern ``A T``.
    phi : ndarray, shape (q, q)
        Factor correlations; ``loadings @ phi @ loadings.T == A @ A.T``.

    Raises
    ------
    RankDeficient
        If ``A`` or the least-squares transformation is singular.
    """
    A = np.asarray(A, dtype=float)
    target = np.asarray(target, dtype=float)
    if A.shape != target.shape:
        raise ValidationError(f"A has shape {A.shape}, target has shape {target.shape}")
    AtA = A.T @ A
    if np.linalg.matrix_rank(AtA) < A.shape[1]:
        raise RankDeficient("unrotated loadings are rank deficient")
    T = np.linalg.solve(AtA, A.T @ target)
    if np.linalg.matrix_rank(T) < A.shape[1]:
        raise RankDeficient("target transformation is singular")
    # Phi = (T'T)^-1 = T^-1 T^-T; normalizing the rows of T^-1 gives a unit
    # diagonal and the matching column scaling of T.
    T_inv = np.linalg.inv(T)
    d = np.sqrt(np.einsum("ij,ij->i", T_inv, T_inv))
    T_inv = T_inv / d[:, None]
    T = T * d
    phi = T_inv @ T_inv.T

    loadings = A @ T
    norms = np.linalg.norm(loadings, axis=0) * np.linalg.norm(target, axis=0)
    congruence = (loadings.T @ target) / np.where(norms > 0, norms, 1.0)[None, :]
    rows, cols = linear_sum_assignment(-np.abs(congruence))
    order = rows[np.argsort(cols)]
    signs = np.sign(congruence[order, np.arange(len(order))])
    signs[signs == 0] = 1.0
    loadings = loadings[:, order] * signs
    phi = phi[np.ix_(order, order)] * np.outer(signs, signs)
    phi = (phi + phi.T) / 2
    np.fill_diagonal(phi, 1.0)
    return loadings, phi


@dataclass(frozen=True, eq=False)
class SampleEstimate:
    """Rotated factor solution of one sample."""

    loadings: np.ndarray
    phi: np.ndarray
    R: np.ndarray
    iterations: int
    change: float
    converged: bool
    heywood: bool

    def model(self):
        """Estimated model with ``Psi = sqrt(1 - communality)`` (Heywood-clamped)."""
        return FactorModel.from_loadings(self.loadings, self.phi, heywood_clamp=HEYWOOD_CLAMP)


def estimate_model(R, target, max_iter=PAF_MAX_ITER, eps=PAF_EPS):
    """Principal axis factoring of ``R`` followed by target rotation."""
    paf = principal_axis(R, target.shape[1], max_iter=max_iter, eps=eps)
    loadings, phi = oblique_target_rotation(paf.loadings, target)
    return SampleEstimate(
        loadings, phi, as_symmetric(R), paf.iterations, paf.change, paf.converged, paf.heywood
    )


@dataclass(frozen=True, eq=False)
class SampleAnalysis:
    """Estimated model plus the three sample predictors and their diagnostics."""

    estimate: SampleEstimate
    model: FactorModel
    weights: dict
    determinacy: dict
    intercorrelations: dict


def analyze_correlation(R, target, max_iter=PAF_MAX_ITER, eps=PAF_EPS):
    """
    Estimate a model from a correlation matrix and evaluate all predictors,
    using ``R`` as the observed covariance and the estimated ``Phi``.
    """
    est = estimate_model(R, target, max_iter=max_iter, eps=eps)
    model = est.model()
    weights, det, cor = {}, {}, {}
    for kind, suffix in zip(KINDS, _SUFFIX):
        w = score_weights(model, kind, sigma=est.R)
        weights[suffix] = w
        det[suffix] = determinacy(model, w, sigma=est.R)
        cor[suffix] = predictor_intercorrelations(model, w, sigma=est.R)
    return SampleAnalysis(est, model, weights, det, cor)


def _column_correlations(a, b):
    a = a - a.mean(axis=0)
    b = b - b.mean(axis=0)
    return np.einsum("ij,ij->j", a, b) / np.sqrt(
        np.einsum("ij,ij->j", a, a) * np.einsum("ij,ij->j", b, b)
    )


def run_replicate(population, cond, replicate, max_iter=PAF_MAX_ITER, eps=PAF_EPS):
    """
    One replicate of a condition.

    Returns
    -------
    analysis : SampleAnalysis
    metrics : dict
        Replicate-level values of :data:`REPLICATE_METRICS`. ``P_*`` is the
        mean correlation of the predictor with the simulated factor scores.
    """
    rng = cond.replicate_rng(replicate)
    X, xi = generate_sample(population, cond.n, rng, return_factors=True)
    Z = standardize(X)
    R = Z.T @ Z / (cond.n - 1)
    analysis = analyze_correlation(R, population.loadings, max_iter=max_iter, eps=eps)
    metrics = {}
    for s in _SUFFIX:
        scores = Z @ analysis.weights[s].weights
        metrics[f"P_{s}"] = float(np.mean(_column_correlations(scores, xi)))
        metrics[f"Cor_{s}"] = float(np.mean(offdiag(analysis.intercorrelations[s])))
        metrics[f"Pm_{s}"] = float(np.mean(analysis.determinacy[s]))
    metrics["phi_hat"] = float(np.mean(offdiag(analysis.estimate.phi)))
    return analysis, metrics


@dataclass(eq=False)
class SampleAggregate:
    """
    Replicate-level results of one condition.

    ``values[metric]`` holds one entry per retained replicate, in replicate
    order. Excluded replicates (non-convergence, singular matrices) are
    counted in ``excluded`` by reason and never silently dropped.
    """

    condition: SampleCondition
    values: dict
    excluded: dict = field(default_factory=dict)
    heywood_count: int = 0

    @property
    def excluded_count(self):
        return sum(self.excluded.values())

    @property
    def retained(self):
        return len(self.values[REPLICATE_METRICS[0]])

    def mean(self, metric):
        return moments(self.values[metric])[0]

    def sd(self, metric):
        return moments(self.values[metric])[1]


def run_sample_condition(cond, max_iter=PAF_MAX_ITER, eps=PAF_EPS):
    """Run all replicates of a condition and collect replicate-level metrics."""
    population = build_loading_pattern(cond.base)
    values = {m: [] for m in REPLICATE_METRICS}
    excluded = {}
    heywood = 0
    for r in range(cond.replicates):
        try:
            analysis, metrics = run_replicate(population, cond, r, max_iter=max_iter, eps=eps)
        except FactorScoreError as exc:
            reason = type(exc).__name__
            excluded[reason] = excluded.get(reason, 0) + 1
            continue
        if not analysis.estimate.converged:
            excluded["NoConvergence"] = excluded.get("NoConvergence", 0) + 1
            continue
        heywood += analysis.estimate.heywood
        for m in REPLICATE_METRICS:
            values[m].append(metrics[m])
    return SampleAggregate(cond, {m: np.array(v) for m, v in values.items()}, excluded, heywood)


def run_sample_grid(conditions, workers=None, max_iter=PAF_MAX_ITER, eps=PAF_EPS):
    """
    Run many conditions, optionally in worker processes.

    Results come back in the order of ``conditions`` and are identical for
    any ``workers`` value.
    """
    conditions = list(conditions)
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(conditions) <= 1:
        return [run_sample_condition(c, max_iter, eps) for c in conditions]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_sample_condition, c, max_iter, eps) for c in conditions]
        return [f.result() for f in futures]


# -- aggregation ---------------------------------------------------------------


def _key_value(agg, key):
    if key is None:
        return None
    if key == "n":
        return agg.condition.n
    if key == "phi":
        return agg.condition.base.phi_val
    return getattr(agg.condition.base, key)


def aggregate_samples(aggregates, key=None, metrics=METRICS):
    """
    Grouped mean and SD over all retained replicates of the conditions in a
    group (each replicate contributes its factor-averaged value).
    """
    groups = {}
    for agg in aggregates:
        groups.setdefault(_key_value(agg, key), []).append(agg)
    rows = []
    for value in sorted(groups, key=lambda v: (v is None, v)):
        members = groups[value]
        for metric in metrics:
            mean, sd = moments(np.concatenate([a.values[metric] for a in members]))
            rows.append(SummaryRow(group_label(key, value), metric, mean, sd, len(members)))
    return SummaryTable(rows)


def sample_summary(aggregates, keys=("sl", None)):
    rows = []
    for key in keys:
        rows.extend(aggregate_samples(aggregates, key).rows)
    return SummaryTable(rows)


def condition_rows(aggregates):
    """Per-condition table: design levels, counts, and mean/SD of every metric."""
    header = ["q", "sl", "phi", "p_per_q", "var_sl", "nl", "n", "replicates",
              "retained", "excluded_count", "heywood_count"]
    for m in REPLICATE_METRICS:
        header += [f"{m}_mean", f"{m}_sd"]
    rows = []
    for a in aggregates:
        d = a.condition.as_dict()
        row = [d["q"], d["sl"], d["phi"], d["p_per_q"], d["var_sl"], d["nl"], d["n"],
               a.condition.replicates, a.retained, a.excluded_count, a.heywood_count]
        for m in REPLICATE_METRICS:
            mean, sd = moments(a.values[m]) if a.retained else (float("nan"), float("nan"))
            row += [mean, sd]
        rows.append(row)
    return header, rows


def figure_data_samples(aggregates, q=9):
    """
    Per-condition means and across-replicate SDs for the figures (``q`` = 9
    by default), keyed by (sl, phi_pop, nl, n, var_sl).
    """
    rows = []
    for a in aggregates:
        b = a.condition.base
        if b.q != q or a.retained == 0:
            continue
        row = {"sl": b.sl, "phi_pop": b.phi_val, "nl": int(b.nl), "n": a.condition.n,
               "var_sl": int(b.var_sl)}
        for m in ("P_r", "P_c", "Cor_r", "Cor_c"):
            row[f"{m}_mean"], row[f"{m}_sd"] = moments(a.values[m])
        row["replicates"] = a.condition.replicates
        row["excluded_count"] = a.excluded_count
        rows.append(row)
    rows.sort(key=lambda r: tuple(r[k] for k in FIGURE_COLUMNS[:5]))
    return rows
