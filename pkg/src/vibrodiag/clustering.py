"""Latent-space fault segmentation: K-means, OPTICS, SOM, and incremental
streaming on top of them.

K-means and the SOM are implemented here; OPTICS is delegated to
scikit-learn's xi-steepness implementation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.cluster import OPTICS as _SkOptics

from .errors import EmptyInput, KTooLarge, UsageError

OUTLIER = -1


@dataclass
class ClusterAssignment:
    record_id: str
    cluster: int  # >= 0, or OUTLIER
    method: str  # kmeans | optics | som


# ---------------------------------------------------------------------------
# K-means
# ---------------------------------------------------------------------------


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    centroids[0] = x[rng.integers(n)]
    d2 = np.sum((x - centroids[0]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            centroids[i] = x[rng.integers(n)]
        else:
            centroids[i] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((x - centroids[i]) ** 2, axis=1))
    return centroids


def _lloyd(x, centroids, max_iter=300):
    labels = None
    for _ in range(max_iter):
        d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        for j in range(centroids.shape[0]):
            members = new_labels == j
            if members.any():
                centroids[j] = x[members].mean(axis=0)
            else:
                # Empty cluster: reseed to the point farthest from its centroid.
                far = d2[np.arange(len(x)), new_labels].argmax()
                centroids[j] = x[far]
                new_labels[far] = j
        if labels is not None and np.array_equal(labels, new_labels):
            break
        labels = new_labels
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(len(x)), labels].sum())
    return labels, centroids, inertia


def kmeans(
    latents: np.ndarray, k: int, seed: int = 0, restarts: int = 10
) -> tuple[np.ndarray, np.ndarray, float]:
    """K-means++ seeded Lloyd iterations, best of `restarts` by inertia."""
    x = np.asarray(latents, dtype=np.float64)
    if k < 1 or k > x.shape[0]:
        raise KTooLarge(f"K={k} outside [1, {x.shape[0]}]")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        centroids = _kmeans_pp_init(x, k, rng)
        labels, centroids, inertia = _lloyd(x, centroids)
        if best is None or inertia < best[2]:
            best = (labels, centroids, inertia)
    return best


def kmeans_elbow(
    latents: np.ndarray, k_range: list[int], seed: int = 0
) -> tuple[list[tuple[int, float]], int | None]:
    """Inertia per K plus a knee suggestion (max distance to the endpoint chord)."""
    if not k_range:
        raise KTooLarge("empty K range")
    ks = sorted(k_range)
    curve = [(k, kmeans(latents, k, seed=seed)[2]) for k in ks]
    if len(curve) < 3:
        return curve, None
    k_arr = np.array([c[0] for c in curve], dtype=np.float64)
    inert = np.array([c[1] for c in curve], dtype=np.float64)
    # Normalize both axes so the chord distance is scale-free.
    ku = (k_arr - k_arr[0]) / max(k_arr[-1] - k_arr[0], 1e-12)
    iu = (inert - inert[-1]) / max(inert[0] - inert[-1], 1e-12)
    # Distance from (ku, iu) to the chord from (0, 1) to (1, 0).
    dist = np.abs(ku + iu - 1.0) / np.sqrt(2.0)
    return curve, int(k_arr[dist.argmax()])


# ---------------------------------------------------------------------------
# OPTICS
# ---------------------------------------------------------------------------


@dataclass
class OpticsResult:
    labels: np.ndarray  # contiguous cluster ids, OUTLIER for noise
    ordering: np.ndarray
    reachability: np.ndarray
    core_distances: np.ndarray

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max() + 1) if (self.labels >= 0).any() else 0


def optics(
    latents: np.ndarray, min_samples: int = 5, xi: float = 0.05
) -> OpticsResult:
    """OPTICS ordering + xi-steepness cluster extraction (Euclidean, p=2)."""
    x = np.asarray(latents, dtype=np.float64)
    if x.shape[0] == 0:
        raise EmptyInput("no latent vectors")
    if x.shape[0] < min_samples:
        return OpticsResult(
            labels=np.full(x.shape[0], OUTLIER),
            ordering=np.arange(x.shape[0]),
            reachability=np.full(x.shape[0], np.inf),
            core_distances=np.full(x.shape[0], np.inf),
        )
    est = _SkOptics(min_samples=min_samples, xi=xi, metric="minkowski", p=2)
    est.fit(x)
    return OpticsResult(
        labels=est.labels_.copy(),
        ordering=est.ordering_.copy(),
        reachability=est.reachability_.copy(),
        core_distances=est.core_distances_.copy(),
    )


# ---------------------------------------------------------------------------
# SOM
# ---------------------------------------------------------------------------


@dataclass
class SomMap:
    """Rectangular self-organizing map with a Gaussian neighborhood."""

    rows: int = 10
    cols: int = 10
    sigma0: float = 5.0
    lr0: float = 0.05
    sigma_end: float = 1.0
    lr_end: float = 0.01
    iterations: int = 5000
    codebook: np.ndarray | None = None  # (rows, cols, dim)

    def grid_coords(self) -> np.ndarray:
        rr, cc = np.meshgrid(np.arange(self.rows), np.arange(self.cols), indexing="ij")
        return np.stack([rr.ravel(), cc.ravel()], axis=1).astype(np.float64)

    def flat_codebook(self) -> np.ndarray:
        return self.codebook.reshape(self.rows * self.cols, -1)

    def bmu(self, sample: np.ndarray) -> int:
        d2 = ((self.flat_codebook() - sample) ** 2).sum(axis=1)
        return int(d2.argmin())


def som_fit(
    latents: np.ndarray,
    som: SomMap | None = None,
    seed: int = 0,
) -> SomMap:
    """Online SOM training with linearly decaying sigma and learning rate."""
    x = np.asarray(latents, dtype=np.float64)
    if x.shape[0] == 0:
        raise EmptyInput("no latent vectors")
    som = som or SomMap()
    rng = np.random.default_rng(seed)
    n_units = som.rows * som.cols
    if som.codebook is None:
        init_idx = rng.integers(0, x.shape[0], size=n_units)
        som.codebook = x[init_idx].reshape(som.rows, som.cols, x.shape[1]).copy()
    grid = som.grid_coords()
    grid_d2 = ((grid[:, None, :] - grid[None, :, :]) ** 2).sum(axis=2)
    code = som.flat_codebook()
    t_span = max(som.iterations - 1, 1)
    for t in range(som.iterations):
        frac = t / t_span
        sigma = som.sigma0 + (som.sigma_end - som.sigma0) * frac
        lr = som.lr0 + (som.lr_end - som.lr0) * frac
        sample = x[rng.integers(x.shape[0])]
        bmu = ((code - sample) ** 2).sum(axis=1).argmin()
        h = np.exp(-grid_d2[bmu] / (2.0 * sigma * sigma))
        code += (lr * h)[:, None] * (sample - code)
    som.codebook = code.reshape(som.rows, som.cols, -1)
    return som


def som_assign(som: SomMap, latents: np.ndarray) -> np.ndarray:
    """Flat BMU cell index per sample."""
    x = np.asarray(latents, dtype=np.float64)
    if x.shape[0] == 0:
        raise EmptyInput("no latent vectors")
    code = som.flat_codebook()
    d2 = ((x[:, None, :] - code[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def som_umatrix(som: SomMap) -> np.ndarray:
    """Mean distance from each cell's codebook vector to its lattice neighbors."""
    u = np.zeros((som.rows, som.cols))
    for r in range(som.rows):
        for c in range(som.cols):
            dists = []
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if dr == 0 and dc == 0:
                        continue
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < som.rows and 0 <= cc < som.cols:
                        dists.append(
                            np.linalg.norm(som.codebook[r, c] - som.codebook[rr, cc])
                        )
            u[r, c] = np.mean(dists)
    return u


# ---------------------------------------------------------------------------
# Streaming
# ---------------------------------------------------------------------------


@dataclass
class StreamSnapshot:
    step: int
    n_samples: int
    labels: np.ndarray
    n_clusters: int


@dataclass
class StreamState:
    method: str  # optics | som
    params: dict = field(default_factory=dict)
    seed: int = 0
    latents: np.ndarray | None = None
    record_ids: list[str] = field(default_factory=list)
    snapshots: list[StreamSnapshot] = field(default_factory=list)

    def __post_init__(self):
        if self.method not in ("optics", "som"):
            raise UsageError(
                f"streaming supports optics|som, not {self.method!r} "
                "(K-means needs a predefined cluster count)"
            )


def stream_cluster(
    state: StreamState,
    new_batch: np.ndarray,
    record_ids: list[str] | None = None,
) -> StreamState:
    """Append a batch, re-fit on all accumulated latents, snapshot the result."""
    batch = np.asarray(new_batch, dtype=np.float64)
    if state.latents is None:
        state.latents = batch.copy()
    else:
        state.latents = np.vstack([state.latents, batch])
    state.record_ids.extend(
        record_ids or [f"stream-{len(state.record_ids) + i}" for i in range(len(batch))]
    )

    if state.method == "optics":
        res = optics(state.latents, **state.params)
        labels, n_clusters = res.labels, res.n_clusters
    else:
        som = som_fit(state.latents, SomMap(**state.params), seed=state.seed)
        labels = som_assign(som, state.latents)
        n_clusters = len(np.unique(labels))  # occupied cells

    state.snapshots.append(
        StreamSnapshot(
            step=len(state.snapshots) + 1,
            n_samples=state.latents.shape[0],
            labels=labels.copy(),
            n_clusters=n_clusters,
        )
    )
    return state
