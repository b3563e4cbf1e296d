"""Augmentation graphs over anchors: construction, per-class connectivity,
diameters and adjacency spectra.

An edge (i, j) exists when the closest pair of views of anchors i and j is
within the threshold (euclidean metric) or at least as similar as the
threshold (cosine metric). The threshold is recorded on the graph so runs
stay comparable.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .bounds import BoundInputs
from .data import LabelSet, ViewSet
from .errors import PowerIterationError

INF = math.inf


@dataclass(frozen=True)
class AugGraph:
    n: int
    edges: frozenset  # frozenset of (i, j) tuples with i < j
    threshold: float
    metric: str
    edge_scores: dict = field(default_factory=dict, compare=False)  # (i, j) -> min view distance / max similarity

    def adjacency(self, vertices=None) -> np.ndarray:
        """Dense 0/1 adjacency, optionally restricted to a vertex subset."""
        if vertices is None:
            vertices = range(self.n)
        index = {v: p for p, v in enumerate(vertices)}
        a = np.zeros((len(index), len(index)))
        for i, j in self.edges:
            if i in index and j in index:
                a[index[i], index[j]] = a[index[j], index[i]] = 1.0
        return a

    def neighbors(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj


@dataclass(frozen=True)
class ClassGraphStats:
    size: int
    connected: bool
    diameter: float  # integer-valued, inf when disconnected
    lambda1: float
    lambda2_abs: float
    omega: float
    bipartite: bool


@dataclass(frozen=True)
class GraphStats:
    components: list
    per_class: list  # ClassGraphStats per class index
    d_max: float
    intra_edge_fraction: float
    no_edges: bool
    omega: float  # min over classes
    lambda1: float  # min over classes of |lambda_1k|
    lambda2_abs: float  # max over classes of |lambda_2k|


@dataclass(frozen=True)
class AssumptionReport:
    alpha: float
    epsilon: float
    intra_class_connected: bool
    disconnected_classes: list
    label_consistent: bool
    stats: GraphStats
    bound_inputs: BoundInputs


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def build_graph(views: ViewSet, threshold: float, metric: str = "euclidean") -> AugGraph:
    """Threshold the minimum inter-anchor view distance (or maximum similarity)."""
    if metric not in ("euclidean", "cosine"):
        raise ValueError(f"unknown metric {metric!r}")
    if views.n < 2:
        raise ValueError("need at least 2 anchors")
    if metric == "euclidean" and threshold <= 0:
        raise ValueError("euclidean threshold must be > 0")
    if metric == "cosine":
        if not -1.0 < threshold <= 1.0:
            raise ValueError("cosine threshold must lie in (-1, 1]")
        if not views.normalized:
            raise ValueError("cosine metric requires normalized views")

    stacked = views.stacked()  # (n, c, m)
    n, c, _ = stacked.shape
    edges = set()
    scores = {}
    flat = views.values
    for i in range(n - 1):
        block = stacked[i]  # (c, m)
        rest = flat[(i + 1) * c :]  # ((n-i-1)*c, m)
        if metric == "euclidean":
            d2 = np.sum(block**2, axis=1)[:, None] + np.sum(rest**2, axis=1)[None, :] - 2.0 * block @ rest.T
            per_pair = np.sqrt(np.maximum(d2, 0.0)).reshape(c, n - i - 1, c)
            best = per_pair.min(axis=(0, 2))  # min view distance to each later anchor
            hits = np.flatnonzero(best <= threshold)
        else:
            sims = (block @ rest.T).reshape(c, n - i - 1, c)
            best = sims.max(axis=(0, 2))
            hits = np.flatnonzero(best >= threshold)
        for h in hits:
            j = i + 1 + int(h)
            edges.add((i, j))
            scores[(i, j)] = float(best[h])
    return AugGraph(n=n, edges=frozenset(edges), threshold=threshold, metric=metric, edge_scores=scores)


def connected_components(g: AugGraph) -> list:
    uf = UnionFind(g.n)
    for i, j in g.edges:
        uf.union(i, j)
    groups: dict[int, list[int]] = {}
    for v in range(g.n):
        groups.setdefault(uf.find(v), []).append(v)
    return sorted(groups.values(), key=lambda grp: grp[0])


def _bfs_ecc(adj: list, src: int, members: list) -> dict:
    dist = {src: 0}
    q = deque([src])
    while q:
        u = q.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def subgraph_diameter(adj: list, members: list) -> float:
    """All-pairs BFS diameter of a connected vertex subset; inf if not connected."""
    if len(members) == 1:
        return 0.0
    diameter = 0
    member_set = set(members)
    for src in members:
        dist = _bfs_ecc(adj, src, members)
        if set(dist) != member_set:
            return INF
        diameter = max(diameter, max(dist.values()))
    return float(diameter)


def is_bipartite(adj: list, members: list) -> bool:
    color = {}
    for start in members:
        if start in color:
            continue
        color[start] = 0
        q = deque([start])
        while q:
            u = q.popleft()
            for w in adj[u]:
                if w not in color:
                    color[w] = 1 - color[u]
                    q.append(w)
                elif color[w] == color[u]:
                    return False
    return True


def top_eigenpair(a: np.ndarray, tol: float = 1e-10, max_iter: int = 10000) -> tuple[float, np.ndarray]:
    """Perron eigenpair of a symmetric nonnegative adjacency matrix.

    Iterates on A + I so the dominant eigenvalue is strictly largest even for
    bipartite graphs; the iterate is kept nonnegative so the returned vector
    is the Perron vector on each connected input.
    """
    n = a.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    shifted = a + np.eye(n)
    v = np.full(n, 1.0 / math.sqrt(n))
    for _ in range(max_iter):
        w = shifted @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0, v
        w /= norm
        lam = float(w @ (a @ w))
        residual = float(np.linalg.norm(a @ w - lam * w))
        v = w
        if residual <= tol * max(1.0, abs(lam)):
            return lam, np.abs(v)
    raise PowerIterationError(f"top eigenpair did not converge, residual {residual:.3e}")


def second_eigenvalue_abs(a: np.ndarray, lambda1: float, v1: np.ndarray, tol: float = 1e-8, max_iter: int = 10000) -> float:
    """|lambda_2| by power iteration on the squared, deflated adjacency.

    Squaring removes the sign ambiguity when lambda_2 and lambda_n tie in
    magnitude, which otherwise stalls plain deflated iteration.
    """
    n = a.shape[0]
    if n < 2:
        return 0.0
    deflated = a - lambda1 * np.outer(v1, v1)
    squared = deflated @ deflated
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(n)
    v -= (v @ v1) * v1
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return 0.0
    v /= norm
    for _ in range(max_iter):
        w = squared @ v
        w -= (w @ v1) * v1  # re-project, guards against drift
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        w /= norm
        lam_sq = float(w @ (squared @ w))
        residual = float(np.linalg.norm(squared @ w - lam_sq * w))
        v = w
        if residual <= tol * max(1.0, abs(lam_sq)):
            return math.sqrt(max(lam_sq, 0.0))
    raise PowerIterationError(f"second eigenvalue did not converge, residual {residual:.3e}")


def class_spectrum(g: AugGraph, members: list, adj: list) -> ClassGraphStats:
    """Connectivity, diameter and adjacency spectrum of one intra-class subgraph."""
    size = len(members)
    sub_adj = [[w for w in adj[v] if w in set(members)] for v in range(g.n)]
    diameter = subgraph_diameter(sub_adj, members)
    connected = not math.isinf(diameter)
    if size == 1:
        return ClassGraphStats(size=1, connected=True, diameter=0.0, lambda1=0.0, lambda2_abs=0.0, omega=1.0, bipartite=True)
    a = g.adjacency(members)
    if not connected:
        return ClassGraphStats(size=size, connected=False, diameter=INF, lambda1=0.0, lambda2_abs=0.0, omega=0.0, bipartite=is_bipartite(sub_adj, members))
    bip = is_bipartite(sub_adj, members)
    lam1, v1 = top_eigenpair(a)
    if bip:
        lam2 = lam1  # -lambda1 is in the spectrum, deflation is unstable there
    else:
        lam2 = second_eigenvalue_abs(a, lam1, v1)
    omega = float(np.min(np.abs(v1)))
    return ClassGraphStats(size=size, connected=True, diameter=diameter, lambda1=lam1, lambda2_abs=min(lam2, lam1), omega=omega, bipartite=bip)


def graph_stats(g: AugGraph, labels: LabelSet) -> GraphStats:
    """Per-class subgraph statistics plus whole-graph component structure."""
    if labels.n != g.n:
        raise ValueError(f"labels have n={labels.n}, graph has n={g.n}")
    adj = g.neighbors()
    components = connected_components(g)

    per_class = []
    for k in range(labels.k):
        members = [int(v) for v in np.flatnonzero(labels.labels == k)]
        if not members:
            raise ValueError(f"class {k} is empty")
        per_class.append(class_spectrum(g, members, adj))

    d_max = max(cs.diameter for cs in per_class)
    total_edges = len(g.edges)
    if total_edges == 0:
        intra_fraction, no_edges = 1.0, True
    else:
        intra = sum(1 for i, j in g.edges if labels.labels[i] == labels.labels[j])
        intra_fraction, no_edges = intra / total_edges, False

    return GraphStats(
        components=components,
        per_class=per_class,
        d_max=d_max,
        intra_edge_fraction=intra_fraction,
        no_edges=no_edges,
        omega=min(cs.omega for cs in per_class),
        lambda1=min(cs.lambda1 for cs in per_class),
        lambda2_abs=max(cs.lambda2_abs for cs in per_class),
    )


def assumption_report(
    g: AugGraph,
    labels: LabelSet,
    pairs_alpha: float,
    epsilon: float,
    l_contr: float = 0.0,
    cond_variance: float = 0.0,
    m_negatives: int = 1,
) -> AssumptionReport:
    """Check the connectivity / label-consistency / alignment assumptions and
    assemble a ready-to-use bound-input record."""
    stats = graph_stats(g, labels)
    disconnected = [k for k, cs in enumerate(stats.per_class) if not cs.connected]
    inputs = BoundInputs(
        l_contr=l_contr,
        cond_variance=cond_variance,
        alpha=pairs_alpha,
        epsilon=epsilon,
        diameter=stats.d_max,
        omega=stats.omega,
        lambda1=stats.lambda1,
        lambda2_abs=min(stats.lambda2_abs, stats.lambda1),
        m_negatives=m_negatives,
        k_classes=labels.k,
    )
    return AssumptionReport(
        alpha=pairs_alpha,
        epsilon=epsilon,
        intra_class_connected=not disconnected,
        disconnected_classes=disconnected,
        label_consistent=pairs_alpha == 0.0,
        stats=stats,
        bound_inputs=inputs,
    )
