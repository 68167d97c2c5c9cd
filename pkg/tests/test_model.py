import itertools

import numpy as np
import pytest

from cpscores.datasets import empirical_example
from cpscores.errors import DimensionMismatch, HeywoodCase, ValidationError
from cpscores.model import (
    FactorModel,
    LoadingCondition,
    build_loading_pattern,
    implied_covariance,
    uniqueness_from_loadings,
)
from cpscores.popsim import enumerate_population_grid

# Printed loading patterns for sl = .50, phi = .30, p/q = 5.
PRINTED_LEFT = np.array([
    [.40, .10, -.10], [.45, .10, -.10], [.50, .10, .10], [.55, .00, .10], [.60, -.10, .00],
    [-.10, .40, .10], [-.10, .45, .10], [.10, .50, .10], [.10, .55, .00], [.00, .60, -.10],
    [.10, -.10, .40], [.10, -.10, .45], [.10, .10, .50], [.00, .10, .55], [-.10, .00, .60],
])
PRINTED_MIDDLE = np.kron(np.eye(3), np.array([[.40], [.45], [.50], [.55], [.60]]))
PRINTED_RIGHT = np.kron(np.eye(3), np.full((5, 1), .50))


def test_implied_covariance_one_factor():
    model = FactorModel([0.5] * 5, [[1.0]], [np.sqrt(0.75)] * 5)
    S = implied_covariance(model)
    np.testing.assert_allclose(np.diag(S), 1.0, atol=1e-15)
    np.testing.assert_allclose(S[np.triu_indices(5, 1)], 0.25, atol=1e-15)


def test_implied_covariance_block_structure():
    model = build_loading_pattern(LoadingCondition(3, 0.5, 0.3, 5, False, False))
    S = model.sigma
    same = np.kron(np.eye(3), np.ones((5, 5))).astype(bool) & ~np.eye(15, dtype=bool)
    other = ~np.kron(np.eye(3), np.ones((5, 5))).astype(bool)
    np.testing.assert_allclose(S[same], 0.25, atol=1e-14)
    np.testing.assert_allclose(S[other], 0.5 * 0.5 * 0.3, atol=1e-14)


def test_implied_covariance_matches_empirical_entry():
    model, sigma = empirical_example()
    S = implied_covariance(model)
    assert round(S[1, 0], 3) == 0.201 == sigma[1, 0]
    np.testing.assert_allclose(np.diag(S), 1.0, atol=1e-12)


def test_uniqueness_examples():
    psi = uniqueness_from_loadings([[0.5, 0, 0]], np.eye(3))
    assert psi[0] == pytest.approx(np.sqrt(0.75), abs=1e-15)
    model, _ = empirical_example()
    assert model.unique_loadings[0] == pytest.approx(np.sqrt(1 - 0.346**2), abs=1e-15)
    assert model.unique_loadings[0] == pytest.approx(0.93823, abs=5e-6)
    with pytest.raises(HeywoodCase):
        uniqueness_from_loadings([[1.0]], [[1.0]])
    np.testing.assert_allclose(
        uniqueness_from_loadings([[1.0]], [[1.0]], heywood_clamp=1e-6), [1e-3], rtol=1e-9
    )


@pytest.mark.parametrize(
    "var_sl, nl, expected",
    [(True, True, PRINTED_LEFT), (True, False, PRINTED_MIDDLE), (False, False, PRINTED_RIGHT)],
)
def test_printed_patterns(var_sl, nl, expected):
    model = build_loading_pattern(LoadingCondition(3, 0.5, 0.3, 5, var_sl, nl))
    np.testing.assert_array_equal(model.loadings, expected)
    np.testing.assert_array_equal(model.phi, [[1, .3, .3], [.3, 1, .3], [.3, .3, 1]])


def test_orthogonal_simple_structure_is_block_diagonal():
    S = build_loading_pattern(LoadingCondition(3, 0.7, 0.0, 5)).sigma
    mask = ~np.kron(np.eye(3), np.ones((5, 5))).astype(bool)
    assert np.all(S[mask] == 0)


def test_ten_variables_per_factor_repeats_the_block():
    L = build_loading_pattern(LoadingCondition(3, 0.5, 0.3, 10, True, True)).loadings
    np.testing.assert_array_equal(L[:5], PRINTED_LEFT[:5])
    np.testing.assert_array_equal(L[5:10], PRINTED_LEFT[:5])
    np.testing.assert_array_equal(L[10:15], PRINTED_LEFT[5:10])


@pytest.mark.parametrize("q", [6, 9])
def test_nonsalient_sequence_for_more_factors(q):
    L = build_loading_pattern(LoadingCondition(q, 0.5, 0.0, 5, False, True)).loadings
    A = np.array([.1, .1, .1, 0, -.1])
    B = np.array([-.1, -.1, .1, .1, 0])
    Z = np.zeros(5)
    sequence = (A, B, A, -A, Z, B, -A, A)[: q - 1]
    for f in range(q):
        block = L[5 * f:5 * f + 5]
        for i, expected in enumerate(sequence, start=1):
            np.testing.assert_array_equal(block[:, (f + i) % q], expected)


@pytest.fixture(scope="module")
def grid_models():
    return [(c, build_loading_pattern(c)) for c in enumerate_population_grid()]


def test_grid_sigma_unit_diagonal_and_pd(grid_models):
    for _, m in grid_models:
        S = m.sigma
        assert np.max(np.abs(np.diag(S) - 1)) < 1e-12
        assert np.linalg.eigvalsh(S)[0] > 0


def test_grid_salient_means_and_nonsalient_values(grid_models):
    for c, m in grid_models:
        L = m.loadings
        for f in range(c.q):
            rows = slice(f * c.p_per_q, (f + 1) * c.p_per_q)
            assert abs(L[rows, f].mean() - c.sl) < 1e-12
            others = np.delete(L[rows], f, axis=1)
            if c.nl:
                assert np.all(np.isin(np.round(others, 12), [-0.1, 0.0, 0.1]))
            else:
                assert np.all(others == 0)


def test_uniqueness_then_covariance_is_a_projection(grid_models):
    for _, m in grid_models[::7]:
        again = FactorModel.from_loadings(m.loadings, m.phi)
        np.testing.assert_array_equal(implied_covariance(again), m.sigma)


def test_model_validation():
    with pytest.raises(ValidationError):
        FactorModel([[0.5]], [[0.9]], [0.5])
    with pytest.raises(DimensionMismatch):
        FactorModel(np.ones((3, 2)) * 0.3, np.eye(3), [0.5] * 3)
    with pytest.raises(DimensionMismatch):
        FactorModel(np.ones((3, 1)) * 0.3, [[1.0]], [0.5] * 2)
    with pytest.raises(HeywoodCase):
        FactorModel(np.ones((3, 1)) * 0.3, [[1.0]], [0.5, 0.0, 0.5])


def test_model_arrays_are_read_only():
    m = build_loading_pattern(LoadingCondition(3, 0.5, 0.3))
    with pytest.raises(ValueError):
        m.loadings[0, 0] = 1.0


def test_loading_condition_counts():
    c = LoadingCondition(6, 0.4, 0.2, 10)
    assert c.p == 60
    with pytest.raises(ValidationError):
        LoadingCondition(3, 0.5, 0.3, 7, var_sl=True)
    assert len({c for c in itertools.islice(enumerate_population_grid(), 100)}) == 100
