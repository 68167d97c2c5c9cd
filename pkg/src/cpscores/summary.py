"""Grouped means and standard deviations in the layout of the result tables."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyGroup

SUMMARY_COLUMNS = ("group", "metric", "mean", "sd", "n_conditions")

#: Metric names, in table order.
METRICS = ("P_r", "P_c", "P_c2", "Cor_r", "Cor_c", "Cor_c2")


@dataclass(frozen=True)
class SummaryRow:
    group: str
    metric: str
    mean: float
    sd: float
    n_conditions: int

    def as_tuple(self):
        return (self.group, self.metric, self.mean, self.sd, self.n_conditions)


class SummaryTable:
    """Ordered collection of :class:`SummaryRow` with lookup by (group, metric)."""

    def __init__(self, rows):
        self.rows = list(rows)
        self._index = {(r.group, r.metric): r for r in self.rows}

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def get(self, group, metric):
        return self._index[(group, metric)]

    def groups(self):
        return list(dict.fromkeys(r.group for r in self.rows))

    def as_rows(self):
        return [r.as_tuple() for r in self.rows]


def group_label(key, value):
    if key is None:
        return "total"
    if isinstance(value, float):
        return f"{key}={value:.2f}"
    return f"{key}={value}"


def weighted_moments(values, weights):
    """
    Weighted mean and (population) standard deviation, summed with ``fsum``
    so that the result does not depend on the order of the inputs beyond
    their concatenation order.
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.size == 0:
        raise EmptyGroup("no values to summarize")
    total = math.fsum(w)
    mean = math.fsum(w * v) / total
    var = math.fsum(w * (v - mean) ** 2) / total
    return mean, math.sqrt(max(var, 0.0))


def moments(values):
    """Mean and sample standard deviation (n - 1) of a flat array."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise EmptyGroup("no values to summarize")
    mean = math.fsum(v) / v.size
    if v.size < 2:
        return mean, float("nan")
    return mean, math.sqrt(math.fsum((v - mean) ** 2) / (v.size - 1))
