"""Evaluating a fitted hypothesis at new points.

The exact route enumerates all sample pairs to find the value whose worst
Lipschitz ratio against the sample is minimal; the fast route rounds values
to an eta/2 grid, keeps one approximate nearest neighbor per value bucket,
and runs the exact routine on that constant-size candidate set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from . import ann
from .errors import DataError
from .metric import VECTOR_METRICS, Dataset
from .srm import Hypothesis


def extension_value(values: np.ndarray, dists: np.ndarray) -> float:
    """Minimum-Lipschitz extension value against (value, distance) anchors.

    The optimum is pinned by the pair maximizing (v_i - v_j)/(d_i + d_j);
    ties resolve toward the smaller output value. A zero distance pins the
    output to that anchor's value.
    """
    values = np.asarray(values, dtype=float)
    dists = np.asarray(dists, dtype=float)
    hit = np.where(dists == 0)[0]
    if hit.size:
        return float(values[hit[0]])
    if len(values) == 1:
        return float(values[0])
    demand = (values[:, None] - values[None, :]) / (dists[:, None] + dists[None, :])
    lip = max(0.0, float(demand.max()))
    # minimax achievers form an interval; its left end is the smallest tie
    return float((values - lip * dists).max())


def exact_extension(h: Hypothesis, d: Dataset, x) -> float:
    """Brute-force O(n^2) minimum Lipschitz extension of the fitted values at x."""
    return extension_value(h.values, d.query_dists(x))


@dataclass
class Predictor:
    """Per-bucket ANN indexes over grid-rounded fitted values."""

    hypothesis: Hypothesis
    dataset: Dataset
    eta: float
    bucket_values: np.ndarray  # rounded value per bucket, ascending
    indexes: list[ann.AnnIndex]
    rounded: np.ndarray  # per-sample rounded value

    def predict(self, x) -> float:
        """Approximate extension value at x, within eta of the exact one."""
        if self.dataset.metric_name == "matrix":
            # matrix-mode queries carry a full row; exact per-bucket lookup
            row = np.asarray(x, dtype=float)
            dvec = np.array([float(row[ix.subset].min()) for ix in self.indexes])
        else:
            dvec = np.array([ix.query(x)[1] for ix in self.indexes])
        return float(np.clip(extension_value(self.bucket_values, dvec), 0.0, 1.0))

    def predict_many(self, queries) -> np.ndarray:
        """Vectorized prediction: one exact nearest anchor per value bucket.

        ``queries`` is (k, dim) coordinates, or (k, n) distance rows in
        matrix mode. Exact per-bucket minima only tighten the per-bucket
        approximate distances, so the single-query guarantee carries over.
        """
        queries = np.asarray(queries, dtype=float)
        if self.dataset.metric_name == "matrix":
            dmat = queries
        else:
            dmat = cdist(queries, self.dataset.points,
                         metric=VECTOR_METRICS[self.dataset.metric_name])
        out = np.empty(len(queries))
        for k in range(len(queries)):
            dvec = np.array([dmat[k, ix.subset].min() for ix in self.indexes])
            out[k] = extension_value(self.bucket_values, dvec)
        return np.clip(out, 0.0, 1.0)


def build_predictor(h: Hypothesis, d: Dataset, eta: float) -> Predictor:
    """Round values up to multiples of eta/2 and index each non-empty bucket."""
    if not (0 < eta <= 1):
        raise DataError("eta must lie in (0, 1]")
    step = eta / 2
    grid = np.minimum(np.ceil(h.values / step - 1e-12), math.ceil(1 / step))
    rounded = grid * step
    bucket_values = []
    indexes = []
    for g in np.unique(grid):
        members = np.where(grid == g)[0]
        bucket_values.append(float(g * step))
        indexes.append(ann.build_index(d, members, epsilon=eta / 2))
    return Predictor(hypothesis=h, dataset=d, eta=eta,
                     bucket_values=np.array(bucket_values),
                     indexes=indexes, rounded=rounded)
