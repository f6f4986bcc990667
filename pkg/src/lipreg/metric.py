"""Point sets with metric access, greedy nets, and doubling-dimension estimation.

A :class:`Dataset` couples sample points, labels in [0,1], and a metric.
Vector metrics (l1, l2, linf) keep the coordinate matrix around so new query
points can be measured against the sample; matrix mode works from an explicit
n-by-n distance matrix instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DataError, InvalidMetricError

VECTOR_METRICS = {
    "l1": "cityblock",
    "l2": "euclidean",
    "linf": "chebyshev",
}

_TRIANGLE_EXHAUSTIVE_LIMIT = 512


def pairwise_distances(points: np.ndarray, metric: str) -> np.ndarray:
    if metric not in VECTOR_METRICS:
        raise DataError(f"unknown metric {metric!r}")
    return cdist(points, points, metric=VECTOR_METRICS[metric])


def _check_matrix(dm: np.ndarray, exhaustive: bool | None = None, seed: int = 0) -> None:
    if dm.ndim != 2 or dm.shape[0] != dm.shape[1]:
        raise InvalidMetricError("distance matrix must be square")
    if not np.all(np.isfinite(dm)):
        raise InvalidMetricError("non-finite distance entry")
    if np.any(dm < 0):
        raise InvalidMetricError("negative distance entry")
    if np.any(np.diag(dm) != 0):
        raise InvalidMetricError("nonzero diagonal entry")
    if not np.allclose(dm, dm.T, rtol=0, atol=1e-9 * max(1.0, float(dm.max()))):
        raise InvalidMetricError("distance matrix is not symmetric")
    n = dm.shape[0]
    tol = 1e-9 * max(1.0, float(dm.max()))
    if exhaustive is None:
        exhaustive = n <= _TRIANGLE_EXHAUSTIVE_LIMIT
    if exhaustive:
        for k in range(n):
            if np.any(dm > dm[:, k, None] + dm[None, k, :] + tol):
                raise InvalidMetricError(f"triangle inequality violated via point {k}")
    else:
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, n, size=(10 * n, 3))
        i, j, k = idx.T
        if np.any(dm[i, j] > dm[i, k] + dm[k, j] + tol):
            raise InvalidMetricError("triangle inequality violated on sampled triple")


def _check_labels(labels: np.ndarray) -> None:
    bad = np.where((labels < 0) | (labels > 1) | ~np.isfinite(labels))[0]
    if bad.size:
        raise DataError(f"label out of [0,1] at row {int(bad[0])}")


@dataclass
class Dataset:
    """Immutable sample: points, labels, and full pairwise-distance access.

    ``scale`` records the factor already applied to raw distances, so that
    Lipschitz constants fitted on the normalized data can be mapped back.
    """

    labels: np.ndarray
    dmatrix: np.ndarray
    metric_name: str
    points: np.ndarray | None = None
    scale: float = 1.0
    diam: float = field(init=False)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=float)
        self.dmatrix = np.asarray(self.dmatrix, dtype=float)
        self.diam = float(self.dmatrix.max()) if self.n > 1 else 0.0

    @property
    def n(self) -> int:
        return len(self.labels)

    @classmethod
    def from_points(cls, points, labels, metric: str = "l2") -> "Dataset":
        points = np.asarray(points, dtype=float)
        labels = np.asarray(labels, dtype=float)
        if points.ndim != 2 or len(points) != len(labels):
            raise DataError("points must be (n, d) with one label per point")
        if not np.all(np.isfinite(points)):
            raise DataError("non-finite coordinate")
        _check_labels(labels)
        dm = pairwise_distances(points, metric)
        return cls(labels=labels, dmatrix=dm, metric_name=metric, points=points)

    @classmethod
    def from_matrix(cls, dmatrix, labels, exhaustive_check: bool | None = None) -> "Dataset":
        dmatrix = np.asarray(dmatrix, dtype=float)
        labels = np.asarray(labels, dtype=float)
        if dmatrix.shape != (len(labels), len(labels)):
            raise DataError("distance matrix shape must match label count")
        _check_labels(labels)
        _check_matrix(dmatrix, exhaustive=exhaustive_check)
        return cls(labels=labels, dmatrix=dmatrix, metric_name="matrix")

    def dist(self, i: int, j: int) -> float:
        return float(self.dmatrix[i, j])

    def query_dists(self, query) -> np.ndarray:
        """Distances from one new point to every sample point.

        For vector metrics ``query`` is a coordinate vector in the same
        (already scaled) frame as ``self.points``; for matrix mode it is a
        precomputed distance row of length n.
        """
        query = np.asarray(query, dtype=float)
        if self.metric_name == "matrix":
            if query.shape != (self.n,):
                raise DataError("matrix-mode query needs a full distance row")
            if np.any(query < 0) or not np.all(np.isfinite(query)):
                raise InvalidMetricError("invalid distance row")
            return query
        if self.points is None:
            raise DataError("dataset has no coordinates")
        return cdist(query[None, :], self.points, metric=VECTOR_METRICS[self.metric_name])[0]


def normalize_diameter(d: Dataset) -> Dataset:
    """Rescale so the max pairwise distance is 1; no-op for n <= 1.

    Idempotent; the cumulative factor is tracked in ``scale``.
    """
    if not np.all(np.isfinite(d.dmatrix)):
        raise InvalidMetricError("non-finite distance")
    if np.any(d.dmatrix < 0):
        raise InvalidMetricError("negative distance")
    if d.n <= 1 or d.diam == 0:
        return d
    factor = 1.0 / d.diam
    points = d.points * factor if d.points is not None else None
    return Dataset(
        labels=d.labels.copy(),
        dmatrix=d.dmatrix * factor,
        metric_name=d.metric_name,
        points=points,
        scale=d.scale * factor,
    )


def build_net(d: Dataset, radius: float, ids=None) -> np.ndarray:
    """Greedy net over ``ids`` (default: all points), lowest id first.

    Output is > radius separated and radius-covering for the input set.
    """
    if radius <= 0:
        raise DataError("net radius must be positive")
    if ids is None:
        ids = np.arange(d.n)
    ids = np.asarray(ids, dtype=int)
    chosen: list[int] = []
    for i in ids:
        if all(d.dmatrix[i, c] > radius for c in chosen):
            chosen.append(int(i))
    return np.asarray(chosen, dtype=int)


def packing_bound(diam_s: float, alpha: float, ddim: float) -> float:
    """Packing ceiling: max count of alpha-separated points in a set of the given diameter."""
    if alpha <= 0:
        raise DataError("separation alpha must be positive")
    return (2.0 * diam_s / alpha) ** ddim


def estimate_ddim(d: Dataset, max_centers: int = 64) -> float:
    """Greedy doubling-dimension estimate.

    For a geometric ladder of radii and a spread of ball centers, greedily
    packs (R/2)-separated points inside each R-ball and reports the max of
    log2(packing count). A definitional stand-in, not a tight estimator.
    """
    if d.n < 2:
        raise DataError("need at least two points")
    if d.diam == 0:
        return 0.0
    pos = d.dmatrix[d.dmatrix > 0]
    d_min = float(pos.min()) if pos.size else d.diam
    if d.n <= max_centers:
        centers = range(d.n)
    else:
        centers = np.linspace(0, d.n - 1, max_centers).astype(int)
    best = 0.0
    radius = d.diam
    while radius >= d_min / 2:
        for c in centers:
            ball = np.where(d.dmatrix[c] <= radius)[0]
            if len(ball) < 2:
                continue
            packed = _greedy_separated(d.dmatrix, ball, radius / 2)
            if packed > 1:
                best = max(best, math.log2(packed))
        radius /= 2
    return best


def _greedy_separated(dm: np.ndarray, ids: np.ndarray, alpha: float) -> int:
    chosen: list[int] = []
    for i in ids:
        if all(dm[i, c] > alpha for c in chosen):
            chosen.append(int(i))
    return len(chosen)


@dataclass
class NetHierarchy:
    """Nested greedy nets at geometric radii, finest level first.

    ``levels[0]`` holds every (deduplicated) input point; each coarser level
    is a net of the one below it. ``parents[i][k]`` is the covering point in
    ``levels[i+1]`` for ``levels[i][k]`` (-1 at the top level).
    """

    radii: list[float]
    levels: list[np.ndarray]
    parents: list[np.ndarray]

    @property
    def num_levels(self) -> int:
        return len(self.levels)


def build_hierarchy(d: Dataset, ids=None, bottom_radius: float | None = None) -> NetHierarchy:
    """Nested net hierarchy over a point subset.

    Radii double from ``bottom_radius`` (default: just below the minimum
    positive interpoint distance) up to the subset diameter, so the top level
    is a single point. Exact duplicate locations are collapsed onto the
    lowest id.
    """
    if ids is None:
        ids = np.arange(d.n)
    ids = np.asarray(ids, dtype=int)
    if len(ids) == 0:
        raise DataError("empty point set")
    dm = d.dmatrix
    # collapse zero-distance duplicates so level-0 separation holds
    reps: list[int] = []
    for i in ids:
        if all(dm[i, r] > 0 for r in reps):
            reps.append(int(i))
    base = np.asarray(reps, dtype=int)
    if len(base) == 1:
        return NetHierarchy(radii=[1.0], levels=[base], parents=[np.array([-1])])
    sub = dm[np.ix_(base, base)]
    diam = float(sub.max())
    off = sub[sub > 0]
    d_min = float(off.min())
    if bottom_radius is None:
        bottom_radius = d_min / 2
    bottom_radius = min(bottom_radius, d_min / 2)
    num = max(1, math.ceil(math.log2(diam / bottom_radius))) + 1
    radii = [bottom_radius * 2**i for i in range(num)]
    levels = [base]
    parents: list[np.ndarray] = []
    for r in radii[1:]:
        prev = levels[-1]
        net = build_net(d, r, ids=prev)
        # parent = nearest net point (covering radius r by greedy construction)
        pmat = dm[np.ix_(prev, net)]
        parents.append(net[np.argmin(pmat, axis=1)])
        levels.append(net)
        if len(net) == 1:
            break
    radii = radii[: len(levels)]
    if len(levels[-1]) > 1:
        # force a singleton top so ascent always terminates
        top = levels[-1][:1]
        parents.append(np.full(len(levels[-1]), top[0], dtype=int))
        levels.append(top)
        radii.append(radii[-1] * 2)
    parents.append(np.array([-1]))
    return NetHierarchy(radii=radii, levels=levels, parents=parents)
