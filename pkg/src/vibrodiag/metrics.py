"""External clustering metrics (pair-counting and entropy-based) and SOM
internal quality metrics (quantization error, topographic error, topographic
product).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import SomMap
from .errors import DegenerateInput, EmptyInput, LengthMismatch


@dataclass
class ContingencyTable:
    counts: np.ndarray  # (n_classes, n_clusters)
    row_labels: list
    col_labels: list

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def row_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def contingency(truth_labels, pred_labels) -> ContingencyTable:
    """Co-occurrence counts; outliers count as their own predicted cluster."""
    truth = list(truth_labels)
    pred = list(pred_labels)
    if len(truth) != len(pred):
        raise LengthMismatch(f"{len(truth)} truth vs {len(pred)} predicted")
    if not truth:
        raise LengthMismatch("empty label lists")
    rows = sorted(set(truth), key=str)
    cols = sorted(set(pred), key=str)
    ridx = {v: i for i, v in enumerate(rows)}
    cidx = {v: i for i, v in enumerate(cols)}
    counts = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for t, p in zip(truth, pred):
        counts[ridx[t], cidx[p]] += 1
    return ContingencyTable(counts=counts, row_labels=rows, col_labels=cols)


def _comb2(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1) / 2.0


def rand_index(t: ContingencyTable) -> float:
    n = t.n
    if n < 2:
        raise DegenerateInput("need at least 2 samples")
    total_pairs = _comb2(np.array(n))
    same_pairs = _comb2(t.counts).sum()
    row_pairs = _comb2(t.row_marginals).sum()
    col_pairs = _comb2(t.col_marginals).sum()
    # agreements = same-same pairs + different-different pairs
    b = total_pairs - row_pairs - col_pairs + same_pairs
    return float((same_pairs + b) / total_pairs)


def adjusted_rand_index(t: ContingencyTable) -> float:
    """Pair-counting ARI: (index - expected) / (max - expected)."""
    n = t.n
    if n < 2:
        raise DegenerateInput("need at least 2 samples")
    index = _comb2(t.counts).sum()
    row_pairs = _comb2(t.row_marginals).sum()
    col_pairs = _comb2(t.col_marginals).sum()
    expected = row_pairs * col_pairs / _comb2(np.array(n))
    maximum = 0.5 * (row_pairs + col_pairs)
    if maximum == expected:
        return 0.0
    return float((index - expected) / (maximum - expected))


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def homogeneity_completeness_v(t: ContingencyTable) -> tuple[float, float, float]:
    """Natural-log entropy scores; v is the harmonic mean of h and c."""
    n = t.n
    h_classes = _entropy(t.row_marginals, n)
    h_clusters = _entropy(t.col_marginals, n)

    # H(classes | clusters) and H(clusters | classes) from the joint counts.
    nz = t.counts > 0
    joint = t.counts[nz] / n
    col_tot = np.broadcast_to(t.col_marginals, t.counts.shape)[nz] / n
    row_tot = np.broadcast_to(t.row_marginals[:, None], t.counts.shape)[nz] / n
    h_c_given_k = float(-(joint * np.log(joint / col_tot)).sum())
    h_k_given_c = float(-(joint * np.log(joint / row_tot)).sum())

    h = 1.0 if h_classes == 0 else 1.0 - h_c_given_k / h_classes
    c = 1.0 if h_clusters == 0 else 1.0 - h_k_given_c / h_clusters
    v = 0.0 if (h + c) == 0 else 2.0 * h * c / (h + c)
    return h, c, v


def clustering_report(truth_labels, pred_labels) -> dict:
    t = contingency(truth_labels, pred_labels)
    h, c, v = homogeneity_completeness_v(t)
    return {
        "ari": adjusted_rand_index(t),
        "homogeneity": h,
        "completeness": c,
        "v_measure": v,
        "confusion_matrix": {
            "rows": [str(r) for r in t.row_labels],
            "cols": [str(col) for col in t.col_labels],
            "counts": t.counts.tolist(),
        },
    }


# ---------------------------------------------------------------------------
# SOM internal metrics
# ---------------------------------------------------------------------------


def som_quantization_error(som: SomMap, latents: np.ndarray) -> float:
    """Mean Euclidean distance from each sample to its BMU."""
    x = np.asarray(latents, dtype=np.float64)
    if x.shape[0] == 0:
        raise EmptyInput("no latent vectors")
    code = som.flat_codebook()
    d = np.sqrt(((x[:, None, :] - code[None, :, :]) ** 2).sum(axis=2))
    return float(d.min(axis=1).mean())


def som_topographic_error(som: SomMap, latents: np.ndarray) -> float:
    """Fraction of samples whose first and second BMUs are not 8-neighbors."""
    x = np.asarray(latents, dtype=np.float64)
    if x.shape[0] == 0:
        raise EmptyInput("no latent vectors")
    code = som.flat_codebook()
    d2 = ((x[:, None, :] - code[None, :, :]) ** 2).sum(axis=2)
    order = np.argsort(d2, axis=1, kind="stable")
    b1, b2 = order[:, 0], order[:, 1]
    r1, c1 = np.divmod(b1, som.cols)
    r2, c2 = np.divmod(b2, som.cols)
    adjacent = (np.abs(r1 - r2) <= 1) & (np.abs(c1 - c2) <= 1)
    return float(1.0 - adjacent.mean())


def som_topographic_product(som: SomMap) -> float:
    """Bauer-Pawelzik topographic product over codebook/lattice distance ratios.

    Neighbor orderings use stable index-order tie-breaking so the value is
    deterministic on symmetric maps.
    """
    code = som.flat_codebook()
    grid = som.grid_coords()
    n = code.shape[0]
    dv = np.sqrt(((code[:, None, :] - code[None, :, :]) ** 2).sum(axis=2))
    da = np.sqrt(((grid[:, None, :] - grid[None, :, :]) ** 2).sum(axis=2))

    total = 0.0
    eps = 1e-12
    for j in range(n):
        others = np.array([i for i in range(n) if i != j])
        nn_v = others[np.argsort(dv[j, others], kind="stable")]
        nn_a = others[np.argsort(da[j, others], kind="stable")]
        q1 = dv[j, nn_a] / np.maximum(dv[j, nn_v], eps)
        q2 = da[j, nn_a] / np.maximum(da[j, nn_v], eps)
        log_q = np.log(np.maximum(q1 * q2, eps))
        cum = np.cumsum(log_q)
        k = np.arange(1, n)
        total += float((cum / (2.0 * k)).sum())
    return total / (n * (n - 1))
