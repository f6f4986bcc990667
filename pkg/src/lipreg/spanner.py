"""Low-hop spanner construction over a metric sample.

Three layers: a biased-partition DAG over weighted paths (skip-list style),
a heavy-path augmentation that gives any tree O(log n) node-to-ancestor hop
routes, and a hierarchical net-tree spanner whose ascend/descend tree routes
go through the augmented DAG. The result is a (1+delta)-stretch spanner with
logarithmic hop diameter on doubling instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import DataError
from .metric import Dataset, build_hierarchy


@dataclass
class WeightedPathDag:
    """DAG over an ordered path; every edge points to an antecedent node."""

    weights: np.ndarray
    edges: list[tuple[int, int]]

    @property
    def n(self) -> int:
        return len(self.weights)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg


def build_path_dag(weights) -> WeightedPathDag:
    """Skip-list style DAG over path nodes x_0..x_{n-1} (x_0 is the head).

    Middle nodes are recursively split at a weighted median so each child
    path carries at most half the parent's middle weight; edges follow the
    end-node rules of the biased construction. Reaching the head from x_i
    takes O(log(W / w_i)) hops and degrees stay at most 3.
    """
    weights = np.asarray(weights, dtype=float)
    if len(weights) == 0:
        raise DataError("empty path")
    if np.any(weights <= 0):
        raise DataError("path weights must be positive")
    edges: list[tuple[int, int]] = []

    def recurse(a: int, b: int, is_right_child: bool, parent_left: int | None):
        # edges leaving the end nodes of path [a, b]
        if b != a:
            edges.append((b, a))
        if is_right_child:
            edges.append((a, a - 1))  # left sibling's right end is adjacent
        elif parent_left is not None:
            edges.append((a, parent_left))
        if b - a <= 1:
            return
        edges.append((b, b - 1))  # right end of the right (or single) child
        m_lo, m_hi = a + 1, b - 1
        if m_hi - m_lo + 1 <= 3:
            recurse(m_lo, m_hi, False, a)
            return
        w_mid = weights[m_lo : m_hi + 1]
        total = float(w_mid.sum())
        prefix = np.cumsum(w_mid)
        # smallest median split: weight before t and after t both <= total/2
        for off in range(len(w_mid)):
            before = prefix[off] - w_mid[off]
            after = total - prefix[off]
            if before <= total / 2 and after <= total / 2:
                t = m_lo + off
                break
        recurse(m_lo, t, False, a)
        if t < m_hi:  # median on the last middle node leaves no right child
            recurse(t + 1, m_hi, True, None)

    recurse(0, len(weights) - 1, False, None)
    return WeightedPathDag(weights=weights, edges=sorted(set(edges)))


@dataclass
class AugmentedTreeDag:
    """A rooted tree plus descendant-to-ancestor shortcut edges."""

    parent: np.ndarray
    root: int
    shortcut_edges: list[tuple[int, int]]
    base_degree: int

    def all_edges(self) -> list[tuple[int, int]]:
        tree = [(i, int(p)) for i, p in enumerate(self.parent) if p >= 0]
        return tree + self.shortcut_edges


def augment_tree(parent, root: int | None = None) -> AugmentedTreeDag:
    """Heavy-path decomposition plus per-path biased DAGs.

    ``parent[i]`` is the parent node id (-1 for the root). Path-node weights
    are one plus the number of descendants hanging off the path, which makes
    every node-to-ancestor hop count O(log n).
    """
    parent = np.asarray(parent, dtype=int)
    n = len(parent)
    roots = np.where(parent < 0)[0]
    if len(roots) != 1:
        raise DataError("tree must have exactly one root")
    if root is None:
        root = int(roots[0])
    children: list[list[int]] = [[] for _ in range(n)]
    for i, p in enumerate(parent):
        if p >= 0:
            children[p].append(i)
    # subtree sizes and cycle detection via topological order
    order: list[int] = []
    stack = [root]
    seen = np.zeros(n, dtype=bool)
    while stack:
        v = stack.pop()
        if seen[v]:
            raise DataError("cyclic parent structure")
        seen[v] = True
        order.append(v)
        stack.extend(children[v])
    if not seen.all():
        raise DataError("cyclic or disconnected parent structure")
    size = np.ones(n, dtype=int)
    for v in reversed(order):
        if parent[v] >= 0:
            size[parent[v]] += size[v]

    shortcut: list[tuple[int, int]] = []
    heads = [root]
    while heads:
        head = heads.pop()
        path = [head]
        v = head
        while children[v]:
            heavy = min(children[v], key=lambda c: (-size[c], c))
            heads.extend(c for c in children[v] if c != heavy)
            path.append(heavy)
            v = heavy
        w = [1 + size[u] - (size[path[k + 1]] if k + 1 < len(path) else 0) - 1
             for k, u in enumerate(path)]
        dag = build_path_dag(w)
        for a, b in dag.edges:
            shortcut.append((path[a], path[b]))
    tree_pairs = {(i, int(p)) for i, p in enumerate(parent) if p >= 0}
    shortcut = sorted(set(shortcut) - tree_pairs)
    base_degree = max((len(c) for c in children), default=0) + 1
    return AugmentedTreeDag(parent=parent, root=root, shortcut_edges=shortcut,
                            base_degree=base_degree)


@dataclass
class SpannerGraph:
    """Sparse weighted graph over sample indices with stretch/hop metadata."""

    n: int
    edges: np.ndarray  # (m, 2) int endpoints, i < j
    lengths: np.ndarray  # (m,) true metric distances
    delta: float
    gamma: float
    max_degree: int = field(init=False)
    hop_bound: int = field(init=False)
    hop_cap: int = 1  # measured or capped hop diameter; feeds beta downstream

    def __post_init__(self):
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        self.max_degree = int(deg.max()) if self.n else 0
        self.hop_bound = math.ceil(8 * math.log2(self.n + 1))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def weight_matrix(self) -> np.ndarray:
        w = np.full((self.n, self.n), np.inf)
        np.fill_diagonal(w, 0.0)
        if len(self.edges):
            i, j = self.edges.T
            w[i, j] = self.lengths
            w[j, i] = self.lengths
        return w

    def hop_diameter(self) -> int:
        if self.n <= 1:
            return 0
        data = np.ones(2 * len(self.edges))
        i, j = self.edges.T
        g = csr_matrix((data, (np.r_[i, j], np.r_[j, i])), shape=(self.n, self.n))
        hops = shortest_path(g, unweighted=True)
        if np.isinf(hops).any():
            raise DataError("spanner is disconnected")
        return int(hops.max())


def hop_bounded_distances(weight_matrix: np.ndarray, hops: int) -> np.ndarray:
    """All-pairs shortest paths restricted to at most ``hops`` edges.

    Min-plus squaring; O(n^3 log hops) but fully vectorized.
    """
    d = weight_matrix
    k = 1
    while k < hops:
        d = np.minimum(d, (d[:, :, None] + d[None, :, :]).min(axis=1))
        k *= 2
    return d


def build_spanner(d: Dataset, delta: float) -> SpannerGraph:
    """(1+delta)-stretch spanner with O(log n) hop routes.

    Net-tree construction: nested nets at geometric scales, cross edges
    between net points within gamma * scale for gamma = 4 + 16/delta, plus
    the compressed net tree's parent edges and the heavy-path shortcut edges
    from :func:`augment_tree`.
    """
    if not (0 < delta <= 0.5):
        raise DataError("spanner delta must lie in (0, 1/2]")
    n = d.n
    if n == 1:
        return SpannerGraph(n=1, edges=np.empty((0, 2), dtype=int),
                            lengths=np.empty(0), delta=delta, gamma=4 + 16 / delta)
    dm = d.dmatrix
    pos = dm[dm > 0]
    if pos.size == 0:
        # all points coincide: star of zero-length edges
        edges = np.array([(0, j) for j in range(1, n)], dtype=int)
        return SpannerGraph(n=n, edges=edges, lengths=np.zeros(n - 1),
                            delta=delta, gamma=4 + 16 / delta)
    d_min = float(pos.min())
    gamma = 4 + 16 / delta
    hier = build_hierarchy(d, bottom_radius=delta * d_min / 8)

    adj = np.zeros((n, n), dtype=bool)
    for lvl, r in zip(hier.levels, hier.radii):
        sub = dm[np.ix_(lvl, lvl)]
        close = sub <= gamma * r
        np.fill_diagonal(close, False)
        block = adj[np.ix_(lvl, lvl)]
        adj[np.ix_(lvl, lvl)] = block | close

    # compressed net tree: parent at each point's coarsest level
    base = hier.levels[0]
    top_level = {int(p): 0 for p in base}
    for i in range(1, hier.num_levels):
        for p in hier.levels[i]:
            top_level[int(p)] = i
    tree_parent = np.full(n, -1, dtype=int)
    for i in range(hier.num_levels - 1):
        lvl, par = hier.levels[i], hier.parents[i]
        for k, p in enumerate(lvl):
            if top_level[int(p)] == i:
                tree_parent[p] = par[k]
    base_set = set(int(p) for p in base)
    root = int(hier.levels[-1][0])
    # duplicates collapsed out of the hierarchy hang off their representative
    for i in range(n):
        if i not in base_set:
            rep = int(np.argmin(np.where(np.arange(n) != i, dm[i], np.inf)))
            tree_parent[i] = rep
    aug = augment_tree(tree_parent, root=root)
    for a, b in aug.all_edges():
        adj[a, b] = True
        adj[b, a] = True

    iu, ju = np.where(np.triu(adj, k=1))
    edges = np.column_stack([iu, ju])
    sp = SpannerGraph(n=n, edges=edges, lengths=dm[iu, ju], delta=delta, gamma=gamma)
    sp.hop_cap = max(1, sp.hop_diameter() if n <= 2048 else sp.hop_bound)
    return sp
