"""Random-geometric machinery: cap sampling on the sphere, uniform-cube
augmentation noise, closed-form overlap thresholds and empirical regime
detection.

The closed forms use the gamma-function reading of the factorials, x! =
Gamma(x + 1), which is the only consistent interpretation for the non-integer
arguments (1/d)! and (d/2)!.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import EmbeddingSet, LabelSet, ViewSet

INF = math.inf

REGIMES = ("no_overlap", "intermediate", "full", "over")


@dataclass(frozen=True)
class GeomConfig:
    d: int
    n: int
    area: float  # surface area / volume of the sampling region (per class)
    class_centers: np.ndarray | None = None  # (K, 3) unit vectors, sphere case only
    noise_r: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.area <= 0:
            raise ValueError("area must be > 0")
        if self.noise_r < 0:
            raise ValueError("noise_r must be >= 0")
        if self.class_centers is not None:
            centers = np.atleast_2d(np.asarray(self.class_centers, dtype=np.float64))
            if not np.allclose(np.linalg.norm(centers, axis=1), 1.0, atol=1e-6):
                raise ValueError("class centers must be unit vectors")
            centers.flags.writeable = False
            object.__setattr__(self, "class_centers", centers)


@dataclass(frozen=True)
class ThresholdReport:
    r1: float
    r2: float
    r3: float
    r_mc_closed: float
    r_mc_empirical: float = math.nan
    regime: str | None = None


def _rotation_to(center: np.ndarray) -> np.ndarray:
    """Rotation matrix taking the north pole e_z onto the given unit vector."""
    ez = np.array([0.0, 0.0, 1.0])
    c = float(ez @ center)
    if c > 1.0 - 1e-12:
        return np.eye(3)
    if c < -1.0 + 1e-12:
        return np.diag([1.0, -1.0, -1.0])
    v = np.cross(ez, center)
    vx = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    return np.eye(3) + vx + vx @ vx / (1.0 + c)


def sample_caps(cfg: GeomConfig) -> tuple[EmbeddingSet, LabelSet]:
    """Uniform samples from spherical caps of area ``cfg.area`` on the unit sphere in R^3.

    Each class contributes n/K points from the cap centered at its class
    center; the cap is sampled by a uniform z-coordinate after rotating the
    center onto the pole.
    """
    if cfg.d != 3:
        raise ValueError("cap sampling is defined for the d=3 sphere case")
    if cfg.class_centers is None:
        raise ValueError("cap sampling requires class centers")
    if cfg.area > 2.0 * math.pi + 1e-12:
        raise ValueError("cap area must not exceed a hemisphere (2*pi)")
    centers = cfg.class_centers
    k = centers.shape[0]
    rng = np.random.default_rng(cfg.seed)
    per_class = cfg.n // k
    counts = [per_class + (1 if i < cfg.n - per_class * k else 0) for i in range(k)]

    points, labels = [], []
    z_low = 1.0 - cfg.area / (2.0 * math.pi)
    for ki, count in enumerate(counts):
        z = rng.uniform(z_low, 1.0, size=count)
        phi = rng.uniform(0.0, 2.0 * math.pi, size=count)
        rho = np.sqrt(np.maximum(1.0 - z**2, 0.0))
        local = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
        points.append(local @ _rotation_to(centers[ki]).T)
        labels.append(np.full(count, ki, dtype=np.int64))
    values = np.vstack(points)
    values /= np.linalg.norm(values, axis=1, keepdims=True)
    return EmbeddingSet(values, normalized=True), LabelSet(np.concatenate(labels), k=k)


def sample_flat(cfg: GeomConfig, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples from a d-dimensional cube of volume ``cfg.area``."""
    side = cfg.area ** (1.0 / cfg.d)
    return rng.uniform(0.0, side, size=(cfg.n, cfg.d))


def nn_distance_closed_form(k: int, d: int, area: float, n: int) -> float:
    """Closed-form expectation of the k-th nearest-neighbor distance for n
    uniform points over a region of measure ``area`` (leading-order expansion)."""
    if n < 3:
        raise ValueError("formula needs n >= 3")
    if d < 1:
        raise ValueError("d must be >= 1")
    prefactor = math.gamma(d / 2.0 + 1.0) ** (1.0 / d) / math.sqrt(math.pi)
    ratio = math.exp(math.lgamma(k + 1.0 / d) - math.lgamma(float(k)))
    correction = 1.0 - (1.0 / d + 1.0 / d**2) / (2.0 * (n - 1))
    return prefactor * ratio * (area / (n - 1)) ** (1.0 / d) * correction


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def connectivity_radius_closed_form(d: int, area: float, n: int) -> float:
    """Asymptotic minimal augmentation strength for a connected graph."""
    if d < 2:
        raise ValueError("the connectivity asymptotic requires d >= 2")
    return (2.0 * (1.0 - 1.0 / d) * area * math.log(n) / (unit_ball_volume(d) * n**2)) ** (1.0 / d)


def min_center_halfdistance(centers: np.ndarray | None) -> float:
    if centers is None or centers.shape[0] < 2:
        return INF
    diffs = centers[:, None, :] - centers[None, :, :]
    dists = np.linalg.norm(diffs, axis=2)
    np.fill_diagonal(dists, INF)
    return 0.5 * float(dists.min())


def classify_regime(noise_r: float, r1: float, r2: float, r3: float) -> str:
    if noise_r >= r3:
        return "over"
    if noise_r < r1:
        return "no_overlap"
    if noise_r >= r2:
        return "full"
    return "intermediate"


def thresholds_closed_form(cfg: GeomConfig) -> ThresholdReport:
    """The overlap thresholds r1/r2/r3 and the connectivity asymptotic, closed form."""
    r1 = nn_distance_closed_form(1, cfg.d, cfg.area, cfg.n)
    r2 = nn_distance_closed_form(cfg.n - 1, cfg.d, cfg.area, cfg.n)
    r3 = min_center_halfdistance(cfg.class_centers)
    r_mc = connectivity_radius_closed_form(cfg.d, cfg.area, cfg.n)
    return ThresholdReport(r1=r1, r2=r2, r3=r3, r_mc_closed=r_mc, regime=classify_regime(cfg.noise_r, r1, r2, r3))


def _sample_points(cfg: GeomConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.d == 3 and cfg.class_centers is not None:
        # one class worth of cap samples; regime analysis is intra-class
        sub = GeomConfig(d=3, n=cfg.n, area=cfg.area, class_centers=cfg.class_centers[:1], seed=int(rng.integers(2**31)))
        emb, _ = sample_caps(sub)
        return emb.values
    return sample_flat(cfg, rng)


def longest_mst_edge(points: np.ndarray) -> float:
    """Exact connectivity radius of one sample: the longest minimum-spanning-tree
    edge, found by a sorted-edge union-find sweep."""
    from .auggraph import UnionFind

    n = points.shape[0]
    d2 = np.sum(points**2, axis=1)
    dist = np.sqrt(np.maximum(d2[:, None] + d2[None, :] - 2.0 * points @ points.T, 0.0))
    iu, ju = np.triu_indices(n, k=1)
    weights = dist[iu, ju]
    order = np.argsort(weights, kind="stable")
    uf = UnionFind(n)
    remaining = n - 1
    for e in order:
        if uf.union(int(iu[e]), int(ju[e])):
            remaining -= 1
            if remaining == 0:
                return float(weights[e])
    raise RuntimeError("union-find sweep failed to connect the graph")


def empirical_regime(cfg: GeomConfig, trials: int = 1) -> ThresholdReport:
    """Simulate samples, estimate the nearest/farthest-neighbor statistics and
    the exact connectivity radius, and classify ``cfg.noise_r``.

    Returned fields: r1/r2 are trial means of the per-point nearest- and
    farthest-neighbor distances (the empirical counterparts of the closed
    forms), r_mc_empirical is the trial-mean longest MST edge, and the regime
    uses the strict isolation (min pairwise) and completeness (max pairwise)
    radii.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(cfg.seed)
    nn_means, far_means, mins, maxes, r_mcs = [], [], [], [], []
    for _ in range(trials):
        pts = _sample_points(cfg, rng)
        d2 = np.sum(pts**2, axis=1)
        dist = np.sqrt(np.maximum(d2[:, None] + d2[None, :] - 2.0 * pts @ pts.T, 0.0))
        np.fill_diagonal(dist, INF)
        nn = dist.min(axis=1)
        np.fill_diagonal(dist, -INF)
        far = dist.max(axis=1)
        nn_means.append(float(nn.mean()))
        far_means.append(float(far.mean()))
        mins.append(float(nn.min()))
        maxes.append(float(far.max()))
        r_mcs.append(longest_mst_edge(pts))
    r3 = min_center_halfdistance(cfg.class_centers)
    regime = classify_regime(cfg.noise_r, float(np.mean(mins)), float(np.mean(maxes)), r3)
    r_mc_closed = connectivity_radius_closed_form(cfg.d, cfg.area, cfg.n) if cfg.d >= 2 else math.nan
    return ThresholdReport(
        r1=float(np.mean(nn_means)),
        r2=float(np.mean(far_means)),
        r3=r3,
        r_mc_closed=r_mc_closed,
        r_mc_empirical=float(np.mean(r_mcs)),
        regime=regime,
    )


def augment(points: EmbeddingSet, r: float, count: int, seed: int = 0) -> ViewSet:
    """``count`` views per anchor, each anchor plus one-sided uniform cube noise.

    Noise is r times a U(0,1)^d base draw, so runs with the same seed share
    the base noise across different strengths. Views are not re-projected
    onto the sphere.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    base = rng.random((points.n, count, points.m))
    views = points.values[:, None, :] + r * base
    return ViewSet(views.reshape(points.n * count, points.m), n=points.n, c=count)
