"""(1+epsilon)-approximate nearest neighbor queries via navigating-net descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DataError
from .metric import VECTOR_METRICS, Dataset, NetHierarchy, build_hierarchy


@dataclass
class AnnIndex:
    """Navigating-net index over a fixed subset of dataset points.

    Queries descend the net hierarchy keeping every net point within
    (2 + 4/eps) * level-radius of the query, and stop once the scale drops
    below eps * best / 4; the returned distance is then within a factor
    1+eps of the true nearest-neighbor distance. Ties go to the lowest id.
    """

    dataset: Dataset
    subset: np.ndarray
    epsilon: float
    hierarchy: NetHierarchy
    children: list[dict[int, list[int]]]  # per level i: parent id -> level-i members

    def query(self, x) -> tuple[int, float]:
        """Return (point id, distance) for an approximate nearest neighbor of x."""
        hier = self.hierarchy
        eps = min(self.epsilon, 1.0)
        dist = self._dist_fn(x)
        cache: dict[int, float] = {}

        def d(p: int) -> float:
            if p not in cache:
                cache[p] = dist(p)
            return cache[p]

        top = int(hier.levels[-1][0])
        best_id, best = top, d(top)
        cands = [top]
        for i in range(hier.num_levels - 2, -1, -1):
            members = sorted({c for p in cands for c in self.children[i].get(p, ())})
            for p in members:
                dp = d(p)
                if dp < best or (dp == best and p < best_id):
                    best_id, best = p, dp
            if best == 0.0 or hier.radii[i] < eps * best / 4:
                break
            thresh = (2 + 4 / eps) * hier.radii[i]
            cands = [p for p in members if d(p) <= thresh]
        return best_id, best

    def _dist_fn(self, x):
        ds = self.dataset
        if ds.metric_name == "matrix":
            row = np.asarray(x, dtype=float)
            if row.shape != (ds.n,):
                raise DataError("matrix-mode query needs a full distance row")
            return lambda p: float(row[p])
        q = np.asarray(x, dtype=float)[None, :]
        metric = VECTOR_METRICS[ds.metric_name]

        def dist(p: int) -> float:
            return float(cdist(q, ds.points[p : p + 1], metric=metric)[0, 0])

        return dist


def build_index(d: Dataset, subset, epsilon: float) -> AnnIndex:
    """Index ``subset`` (point ids into ``d``) for (1+epsilon)-approximate queries."""
    subset = np.asarray(subset, dtype=int)
    if subset.size == 0:
        raise DataError("cannot index an empty subset")
    if epsilon <= 0:
        raise DataError("epsilon must be positive")
    hier = build_hierarchy(d, ids=subset)
    children: list[dict[int, list[int]]] = []
    for i in range(hier.num_levels - 1):
        table: dict[int, list[int]] = {}
        for p, parent in zip(hier.levels[i], hier.parents[i]):
            table.setdefault(int(parent), []).append(int(p))
        children.append(table)
    return AnnIndex(dataset=d, subset=subset, epsilon=epsilon,
                    hierarchy=hier, children=children)
