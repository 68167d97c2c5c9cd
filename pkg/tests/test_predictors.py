import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import sqrtm

from cpscores.datasets import empirical_example
from cpscores.errors import DegenerateWeights, DimensionMismatch, NotPD, TooFewRows
from cpscores.model import FactorModel, LoadingCondition, build_loading_pattern
from cpscores.popsim import enumerate_population_grid
from cpscores.predictors import (
    CP_FROM_REGRESSION,
    KINDS,
    MCDONALD,
    REGRESSION,
    ScoreWeights,
    bias_and_loss,
    cp_from_regression_weights,
    determinacy,
    diagnose,
    mcdonald_weights,
    predictor_intercorrelations,
    regression_weights,
    score_weights,
    standardize,
    transform_scores,
)

from helpers import data_with_covariance, random_model
from reference_values import EMPIRICAL_DETERMINACY

def one_factor(sl, p):
    return FactorModel.from_loadings(np.full((p, 1), sl), [[1.0]])


def closed_form(sl, p):
    return np.sqrt(p * sl**2 / (1 + (p - 1) * sl**2))


# Direct transcriptions of the three determinacy formulas, using scipy's sqrtm.
def direct_regression(L, phi, S):
    return np.sqrt(np.diag(phi @ L.T @ np.linalg.solve(S, L) @ phi))


def direct_mcdonald(L, phi, S, psi):
    N = np.real(sqrtm(phi))
    W = L / psi[:, None] ** 2
    inner = N @ W.T @ S @ W @ N
    Bt = N @ np.linalg.inv(np.real(sqrtm(inner))) @ N @ W.T
    return np.diag(Bt @ L @ phi) / np.sqrt(np.diag(Bt @ S @ Bt.T))


def direct_cp(L, phi, S):
    M = L.T @ np.linalg.solve(S, L)
    return np.diag(np.real(sqrtm(phi)) @ np.real(sqrtm(M)) @ phi)


@pytest.fixture(scope="module")
def empirical():
    return empirical_example()


def test_one_factor_regression_determinacy():
    m = one_factor(0.5, 5)
    w = regression_weights(m)
    np.testing.assert_allclose(w.weights, w.weights[0, 0], rtol=1e-12)
    assert determinacy(m, w)[0] == pytest.approx(np.sqrt(0.625), abs=1e-12)
    assert determinacy(m, w)[0] == pytest.approx(0.7906, abs=5e-5)


@pytest.mark.parametrize("sl", [0.3, 0.5, 0.7, 0.9])
@pytest.mark.parametrize("p", [3, 8, 20])
def test_one_factor_closed_form(sl, p):
    m = one_factor(sl, p)
    for kind in KINDS:
        rho = determinacy(m, score_weights(m, kind))[0]
        assert abs(rho - closed_form(sl, p)) < 1e-12


def test_orthogonal_block_model_gives_block_weights():
    m = build_loading_pattern(LoadingCondition(3, 0.5, 0.0))
    B = regression_weights(m).weights
    mask = np.kron(np.eye(3), np.ones((5, 1))).astype(bool)
    assert np.all(B[~mask] == 0)
    assert np.all(B[mask] > 0)


def test_empirical_determinacies(empirical):
    model, sigma = empirical
    reports = diagnose(model, sigma)
    for kind, expected in EMPIRICAL_DETERMINACY.items():
        np.testing.assert_allclose(reports[kind].determinacy, expected, atol=0.005)


def test_generic_determinacy_matches_direct_formulas(empirical):
    model, sigma = empirical
    L, phi, psi = model.loadings, model.phi, model.unique_loadings
    np.testing.assert_allclose(
        determinacy(model, regression_weights(model, sigma), sigma),
        direct_regression(L, phi, sigma), atol=1e-12,
    )
    np.testing.assert_allclose(
        determinacy(model, mcdonald_weights(model, sigma), sigma),
        direct_mcdonald(L, phi, sigma, psi), atol=1e-12,
    )
    np.testing.assert_allclose(
        determinacy(model, cp_from_regression_weights(model, sigma), sigma),
        direct_cp(L, phi, sigma), atol=1e-12,
    )


def test_regression_overstates_empirical_correlations(empirical):
    model, sigma = empirical
    reports = diagnose(model, sigma)
    iu = np.triu_indices(3, 1)
    cor_r = reports[REGRESSION].intercorrelations[iu]
    phi = model.phi[iu]
    np.testing.assert_allclose(phi, [.822, .686, .838])
    assert np.all(cor_r > phi)
    assert np.mean(cor_r - phi) == pytest.approx(0.10, abs=0.02)
    for kind in (MCDONALD, CP_FROM_REGRESSION):
        np.testing.assert_allclose(reports[kind].intercorrelations, model.phi, atol=1e-10)


def test_bias_and_loss_on_empirical_example(empirical):
    model, sigma = empirical
    r = diagnose(model, sigma)
    bl = bias_and_loss(model, r[REGRESSION], r[MCDONALD], r[CP_FROM_REGRESSION])
    assert np.all(np.diag(bl.bias) == 0)
    assert bl.bias[np.triu_indices(3, 1)].mean() == pytest.approx(0.10, abs=0.02)
    assert -bl.loss_c2.mean() == pytest.approx(0.01, abs=0.005)
    assert np.all(bl.loss_c <= 0) and np.all(bl.loss_c2 <= 0)
    np.testing.assert_array_equal(r[MCDONALD].loss, bl.loss_c)


def test_bias_and_loss_vanish_for_orthogonal_symmetric_model():
    m = build_loading_pattern(LoadingCondition(3, 0.6, 0.0))
    r = diagnose(m)
    bl = bias_and_loss(m, r[REGRESSION], r[MCDONALD], r[CP_FROM_REGRESSION])
    assert np.max(np.abs(bl.bias)) < 1e-14
    assert np.max(np.abs(bl.loss_c)) < 1e-14
    assert np.max(np.abs(bl.loss_c2)) < 1e-14
    np.testing.assert_allclose(r[REGRESSION].intercorrelations, np.eye(3), atol=1e-14)


def test_q1_mcdonald_equals_regression():
    rng = np.random.default_rng(3)
    m = FactorModel.from_loadings(rng.uniform(0.2, 0.8, (7, 1)), [[1.0]])
    br = regression_weights(m).weights[:, 0]
    bc = mcdonald_weights(m).weights[:, 0]
    np.testing.assert_allclose(bc / np.linalg.norm(bc), br / np.linalg.norm(br), atol=1e-12)
    assert determinacy(m, bc[:, None]) == pytest.approx(determinacy(m, br[:, None]), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_preservation_and_dominance(seed):
    m = random_model(np.random.default_rng(seed))
    reports = diagnose(m)
    r = reports[REGRESSION].determinacy
    for kind in (MCDONALD, CP_FROM_REGRESSION):
        np.testing.assert_allclose(reports[kind].intercorrelations, m.phi, atol=1e-10)
        assert np.all(reports[kind].determinacy <= r + 1e-12)
    for rep in reports.values():
        assert np.all(rep.determinacy >= -1e-12) and np.all(rep.determinacy <= 1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100.0))
def test_scale_invariance(seed, scale):
    rng = np.random.default_rng(seed)
    m = random_model(rng)
    B = regression_weights(m).weights.copy()
    col = int(rng.integers(m.q))
    B2 = B.copy()
    B2[:, col] *= scale
    np.testing.assert_allclose(determinacy(m, B2), determinacy(m, B), atol=1e-12)
    np.testing.assert_allclose(
        predictor_intercorrelations(m, B2), predictor_intercorrelations(m, B), atol=1e-12
    )


def test_transform_matches_cp_weights_on_grid_models():
    rng = np.random.default_rng(11)
    conds = enumerate_population_grid()[::23]
    for c in conds:
        m = build_loading_pattern(c)
        X = data_with_covariance(rng, m.sigma, 4 * m.p)
        xs = regression_weights(m).apply(X)
        direct = cp_from_regression_weights(m).apply(X)
        np.testing.assert_allclose(transform_scores(xs, m.phi), direct, atol=1e-8)


def test_transform_and_cp_weights_differ_without_symmetry(empirical):
    # The two routes coincide only when the polar factor of
    # D^{-1/2} Phi (L' S^-1 L)^{1/2} is the identity.
    model, sigma = empirical
    X = data_with_covariance(np.random.default_rng(2), sigma, 242)
    xs = regression_weights(model, sigma).apply(X)
    t = transform_scores(xs, model.phi)
    d = cp_from_regression_weights(model, sigma).apply(X)
    np.testing.assert_allclose(np.corrcoef(t, rowvar=False), model.phi, atol=1e-10)
    np.testing.assert_allclose(np.corrcoef(d, rowvar=False), model.phi, atol=1e-10)
    assert np.max(np.abs(t - d)) > 1e-3


def test_transform_scores_examples():
    rng = np.random.default_rng(0)
    phi = np.array([[1, .3], [.3, 1]])
    out = transform_scores(rng.standard_normal((500, 2)), phi)
    np.testing.assert_allclose(np.corrcoef(out, rowvar=False), phi, atol=1e-10)
    np.testing.assert_allclose(out.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(out.std(axis=0, ddof=1), 1, atol=1e-12)

    ready = data_with_covariance(rng, phi, 50)
    np.testing.assert_allclose(transform_scores(ready, phi), ready, atol=1e-10)

    col = rng.standard_normal(20) * 3 + 1
    np.testing.assert_allclose(transform_scores(col, [[1.0]])[:, 0], standardize(col[:, None])[:, 0])


def test_transform_scores_errors():
    with pytest.raises(TooFewRows):
        transform_scores(np.ones((3, 3)), np.eye(3))
    x = np.random.default_rng(1).standard_normal((30, 1))
    with pytest.raises(NotPD):
        transform_scores(np.hstack([x, 2 * x]), np.eye(2))
    with pytest.raises(DimensionMismatch):
        transform_scores(np.ones((10, 2)), np.eye(3))


def test_degenerate_and_invalid_inputs():
    m = build_loading_pattern(LoadingCondition(3, 0.5, 0.3))
    B = regression_weights(m).weights.copy()
    B[:, 1] = 0
    with pytest.raises(DegenerateWeights):
        determinacy(m, B)
    with pytest.raises(DimensionMismatch):
        determinacy(m, B[:, :2])
    with pytest.raises(ValueError):
        score_weights(m, "bartlett")
    with pytest.raises(DimensionMismatch):
        ScoreWeights(B, "custom").apply(np.ones((4, 3)))
