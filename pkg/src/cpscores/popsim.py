"""
Population simulation: exact (analytic) evaluation of the three predictors
over the full 672-condition design grid.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import EmptyGroup
from .linalg import offdiag
from .model import LoadingCondition, build_loading_pattern
from .predictors import CP_FROM_REGRESSION, MCDONALD, REGRESSION, diagnose
from .summary import METRICS, SummaryRow, SummaryTable, group_label, weighted_moments

Q_LEVELS = (3, 6, 9)
SL_LEVELS = (0.40, 0.50, 0.60, 0.70)
PHI_LEVELS = (0.00, 0.10, 0.20, 0.30, 0.40, 0.50, 0.60)
P_PER_Q_LEVELS = (5, 10)

FIGURE_COLUMNS = (
    "sl", "var_sl", "p_per_q", "nl", "phi_pop", "rho_reg", "phi_reg", "rho_cor", "phi_cor",
)
RECORD_COLUMNS = (
    "q", "sl", "phi", "p_per_q", "var_sl", "nl",
    "P_r", "P_c", "P_c2", "Cor_r", "Cor_c", "Cor_c2", "bias_mean", "loss_c_mean", "loss_c2_mean",
)

_KIND_SUFFIX = {REGRESSION: "r", MCDONALD: "c", CP_FROM_REGRESSION: "c2"}


@dataclass(frozen=True, eq=False)
class PopulationRecord:
    """
    Analytic results for one population condition.

    ``determinacy`` maps ``"r"``, ``"c"``, ``"c2"`` to length-q vectors and
    ``intercorrelations`` maps the same keys to the off-diagonal entries of
    the predictor correlation matrix.
    """

    condition: LoadingCondition
    determinacy: dict
    intercorrelations: dict
    phi_offdiag: np.ndarray

    def values(self, metric):
        """Entry-level values of a metric such as ``"P_r"`` or ``"Cor_c2"``."""
        name, kind = metric.split("_")
        return self.determinacy[kind] if name == "P" else self.intercorrelations[kind]

    @property
    def intercorr_offdiag_means(self):
        return {k: float(np.mean(v)) for k, v in self.intercorrelations.items()}

    @property
    def bias_mean(self):
        return float(np.mean(self.intercorrelations["r"] - self.phi_offdiag))

    @property
    def loss_mean(self):
        return float(np.mean(self.determinacy["c"] - self.determinacy["r"]))

    @property
    def loss_c2_mean(self):
        return float(np.mean(self.determinacy["c2"] - self.determinacy["r"]))

    def as_row(self):
        c = self.condition
        return (
            c.q, c.sl, c.phi_val, c.p_per_q, int(c.var_sl), int(c.nl),
            *(float(np.mean(self.values(m))) for m in METRICS),
            self.bias_mean, self.loss_mean, self.loss_c2_mean,
        )


def enumerate_population_grid():
    """All 3 x 4 x 7 x 2 x 2 x 2 = 672 population conditions."""
    return [
        LoadingCondition(q, sl, phi, ppq, var, nl)
        for q, sl, phi, ppq, var, nl in itertools.product(
            Q_LEVELS, SL_LEVELS, PHI_LEVELS, P_PER_Q_LEVELS, (False, True), (False, True)
        )
    ]


def evaluate_condition(cond):
    """
    Build the population model of a condition and evaluate all predictors
    exactly (no sampling).
    """
    model = build_loading_pattern(cond)
    reports = diagnose(model)
    return PopulationRecord(
        condition=cond,
        determinacy={_KIND_SUFFIX[k]: r.determinacy for k, r in reports.items()},
        intercorrelations={_KIND_SUFFIX[k]: offdiag(r.intercorrelations) for k, r in reports.items()},
        phi_offdiag=offdiag(model.phi),
    )


def run_population(conditions=None):
    """Evaluate a list of conditions (default: the full grid) in order."""
    if conditions is None:
        conditions = enumerate_population_grid()
    return [evaluate_condition(c) for c in conditions]


def _key_value(record, key):
    c = record.condition
    return {"phi": c.phi_val}.get(key, getattr(c, key, None)) if key else None


def aggregate_by(records, key=None, metrics=METRICS):
    """
    Grouped mean and SD of pooled determinacies and off-diagonal correlations.

    Each condition carries total weight one, shared equally by its factor-level
    determinacies (or its off-diagonal correlations), so that conditions with
    many factors do not dominate a group.

    Parameters
    ----------
    records : list of PopulationRecord
    key : str or None
        Condition attribute to group by (``"sl"``, ``"q"``, ``"phi"``, ...);
        ``None`` gives a single ``total`` group.

    Returns
    -------
    SummaryTable
    """
    records = list(records)
    if not records:
        raise EmptyGroup("no records to aggregate")
    groups = {}
    for rec in records:
        groups.setdefault(_key_value(rec, key), []).append(rec)
    rows = []
    for value in sorted(groups, key=lambda v: (v is None, v)):
        members = groups[value]
        for metric in metrics:
            vals = [m.values(metric) for m in members]
            weights = [np.full(v.size, 1.0 / v.size) for v in vals]
            mean, sd = weighted_moments(np.concatenate(vals), np.concatenate(weights))
            rows.append(SummaryRow(group_label(key, value), metric, mean, sd, len(members)))
    return SummaryTable(rows)


def summary_table(records, keys=("sl", None)):
    """Concatenate :func:`aggregate_by` over several keys (``None`` = total)."""
    rows = []
    for key in keys:
        rows.extend(aggregate_by(records, key).rows)
    return SummaryTable(rows)


def figure_data(records, q=3):
    """
    Condition-level data behind the population figures.

    One row per condition with the given ``q``: mean determinacy and mean
    off-diagonal inter-correlation of the regression (``reg``) and McDonald
    (``cor``) predictors.
    """
    rows = []
    for rec in records:
        c = rec.condition
        if c.q != q:
            continue
        rows.append({
            "sl": c.sl,
            "var_sl": int(c.var_sl),
            "p_per_q": c.p_per_q,
            "nl": int(c.nl),
            "phi_pop": c.phi_val,
            "rho_reg": float(np.mean(rec.determinacy["r"])),
            "phi_reg": float(np.mean(rec.intercorrelations["r"])),
            "rho_cor": float(np.mean(rec.determinacy["c"])),
            "phi_cor": float(np.mean(rec.intercorrelations["c"])),
        })
    rows.sort(key=lambda r: tuple(r[k] for k in FIGURE_COLUMNS[:5]))
    return rows
