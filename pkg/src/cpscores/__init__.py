"""Factor score predictors: determinacy versus preservation of factor correlations."""

from .errors import (
    DegenerateWeights,
    DimensionMismatch,
    FactorScoreError,
    HeywoodCase,
    NotPD,
    NotPSD,
    NumericalError,
    TooFewRows,
    ValidationError,
)
from .linalg import cov_to_corr, invert_spd, sym_inv_sqrt, sym_sqrt
from .model import (
    FactorModel,
    LoadingCondition,
    build_loading_pattern,
    implied_covariance,
    uniqueness_from_loadings,
)
from .predictors import (
    PredictorReport,
    ScoreWeights,
    bias_and_loss,
    cp_from_regression_weights,
    determinacy,
    diagnose,
    mcdonald_weights,
    predictor_intercorrelations,
    regression_weights,
    transform_scores,
)

__version__ = "0.1.0"
