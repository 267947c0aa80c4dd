"""Pseudo-label classifier, Integrated Gradients attribution, diagnostics
matrices, difference spectrograms, and occlusion-based faithfulness.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cae import CaeModel, TrainConfig
from .dsp import MelSpectrogram
from .errors import (
    EmptyTrainingSet,
    FractionOutOfRange,
    LabelMismatch,
    LengthMismatch,
    ShapeMismatch,
    ShapeNotDivisible,
    SingleCluster,
    UntrainedHead,
)
from .nn import Adam, Dense, Sequential, Softmax, cross_entropy_loss


@dataclass
class ClassifierHead:
    """Single softmax layer on the flattened latent space, no bias."""

    n_classes: int
    latent_dim: int = 80
    dense: Dense = None
    softmax: Softmax = field(default_factory=Softmax)
    trained: bool = False

    def __post_init__(self):
        if self.dense is None:
            self.dense = Dense(self.latent_dim, self.n_classes, bias=False)

    @property
    def weights(self) -> np.ndarray:
        return self.dense.w

    def probs(self, latents: np.ndarray) -> np.ndarray:
        return self.softmax.forward(self.dense.forward(latents))


def train_classifier(
    latents: np.ndarray,
    pseudo_labels: np.ndarray,
    cfg: TrainConfig,
) -> tuple[ClassifierHead, dict]:
    """Softmax cross-entropy training on frozen latent features.

    Uses the same optimizer and early-stopping regime as the autoencoder.
    Outlier samples must be excluded by the caller before this point.
    """
    x = np.asarray(latents, dtype=np.float64)
    y = np.asarray(pseudo_labels, dtype=np.int64)
    if x.shape[0] != y.shape[0]:
        raise LabelMismatch(f"{x.shape[0]} latents vs {y.shape[0]} labels")
    if (y < 0).any():
        raise LabelMismatch("negative (outlier) pseudo-labels are not trainable")
    k = int(y.max()) + 1
    if k < 2:
        raise SingleCluster("need at least 2 clusters to train the classifier")

    onehot = np.eye(k)[y]
    rng = np.random.default_rng(cfg.seed)

    perm = rng.permutation(x.shape[0])
    n_val = max(1, int(round(cfg.val_fraction * x.shape[0])))
    val_idx, train_idx = perm[:n_val], perm[n_val:]

    head = ClassifierHead(n_classes=k, latent_dim=x.shape[1])
    head.dense = Dense(x.shape[1], k, bias=False, rng=rng)
    stack = Sequential([head.dense, head.softmax])
    opt = Adam(stack.params(), lr=cfg.lr)

    history = {"train_loss": [], "val_loss": []}
    best_val = np.inf
    best_w = head.dense.w.copy()
    best_epoch = 0
    bad = 0
    stopped_epoch = cfg.max_epochs
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(train_idx))
        epoch_loss = 0.0
        for start in range(0, len(order), cfg.batch_size):
            sel = train_idx[order[start : start + cfg.batch_size]]
            probs = stack.forward(x[sel])
            loss, grad = cross_entropy_loss(probs, onehot[sel])
            stack.backward(grad)
            opt.step(stack.grads())
            epoch_loss += loss * len(sel)
        history["train_loss"].append(epoch_loss / len(train_idx))
        val_loss, _ = cross_entropy_loss(stack.forward(x[val_idx]), onehot[val_idx])
        history["val_loss"].append(val_loss)
        if val_loss < best_val:
            best_val = val_loss
            best_w = head.dense.w.copy()
            best_epoch = epoch
            bad = 0
        else:
            bad += 1
            if bad >= cfg.patience:
                stopped_epoch = epoch
                break
    head.dense.w[...] = best_w
    head.trained = True
    history["best_epoch"] = best_epoch
    history["stopped_epoch"] = stopped_epoch
    return head, history


class ClusterExplainer:
    """Frozen encoder + classifier head exposing class probabilities and
    input-space gradients of the post-softmax target probability."""

    def __init__(self, model: CaeModel, head: ClassifierHead):
        if not head.trained:
            raise UntrainedHead("classifier head has not been trained")
        from .nn import Flatten  # local import avoids a cycle at module load

        self.stack = Sequential(
            model.encoder.layers + [Flatten(), head.dense, head.softmax]
        )
        self.n_classes = head.n_classes

    def class_probs(self, x: np.ndarray) -> np.ndarray:
        return self.stack.forward(x[None])[0]

    def class_probs_batch(self, x: np.ndarray) -> np.ndarray:
        return self.stack.forward(x)

    def prob_input_grad_batch(self, x: np.ndarray, target: int) -> np.ndarray:
        probs = self.stack.forward(x)
        upstream = np.zeros_like(probs)
        upstream[:, target] = 1.0
        return self.stack.backward(upstream)


@dataclass
class AttributionMap:
    data: np.ndarray  # (H, W, C), same shape as the input spectrogram
    target_class: int
    baseline_id: str = ""


@dataclass
class DiagnosticsMatrix:
    data: np.ndarray  # (bands, intervals, C)
    pool: tuple[int, int] = (32, 20)


def healthy_baseline(train_specs: list[MelSpectrogram]) -> MelSpectrogram:
    """Elementwise mean of healthy normalized spectrograms."""
    if not train_specs:
        raise EmptyTrainingSet("no healthy spectrograms")
    shape = train_specs[0].data.shape
    for s in train_specs:
        if s.data.shape != shape:
            raise ShapeMismatch(f"{s.data.shape} != {shape}")
    mean = np.mean([s.data for s in train_specs], axis=0)
    return MelSpectrogram(data=mean, record_id="healthy-baseline")


_IG_CHUNK = 64


def integrated_gradients(
    explainer,
    x: np.ndarray,
    baseline: np.ndarray,
    steps: int = 64,
    target: int | None = None,
) -> AttributionMap:
    """Path-integral attribution from `baseline` to `x`.

    Gradients of the target-class probability are averaged at the midpoint
    path points baseline + ((s - 1/2)/steps) * (x - baseline) for s = 1..steps,
    then scaled by (x - baseline). The midpoint rule keeps the completeness
    residual an order of magnitude below an endpoint rule at equal step count.
    """
    x = np.asarray(x, dtype=np.float64)
    baseline = np.asarray(baseline, dtype=np.float64)
    if x.shape != baseline.shape:
        raise ShapeMismatch(f"input {x.shape} vs baseline {baseline.shape}")
    if target is None:
        target = int(np.argmax(explainer.class_probs(x)))
    delta = x - baseline
    alphas = (np.arange(steps) + 0.5) / steps
    # Chunk the path batch so memory stays bounded at large step counts.
    grad_sum = np.zeros_like(delta)
    for start in range(0, steps, _IG_CHUNK):
        a = alphas[start : start + _IG_CHUNK]
        path = baseline[None] + a.reshape((-1,) + (1,) * x.ndim) * delta[None]
        grad_sum += explainer.prob_input_grad_batch(path, target).sum(axis=0)
    attr = delta * (grad_sum / steps)
    return AttributionMap(data=attr, target_class=target)


def diagnostics_matrix(
    attr: AttributionMap, pool: tuple[int, int] = (32, 20)
) -> DiagnosticsMatrix:
    """Non-overlapping per-channel max pooling of the attribution map."""
    h, w, c = attr.data.shape
    ph, pw = pool
    if h % ph or w % pw:
        raise ShapeNotDivisible(f"({h},{w}) not divisible by pool ({ph},{pw})")
    pooled = attr.data.reshape(h // ph, ph, w // pw, pw, c).max(axis=(1, 3))
    return DiagnosticsMatrix(data=pooled, pool=pool)


def diff_spectrogram(faulty: MelSpectrogram, healthy: MelSpectrogram) -> np.ndarray:
    """Signed pixel-wise difference: positive where the fault exceeds healthy."""
    if faulty.data.shape != healthy.data.shape:
        raise ShapeMismatch(f"{faulty.data.shape} vs {healthy.data.shape}")
    return faulty.data - healthy.data


def _occlusion_order_by_attribution(attr: np.ndarray) -> np.ndarray:
    # Signed value descending; stable sort breaks ties by row-major index.
    return np.argsort(-attr.ravel(), kind="stable")


def faithfulness_curve(
    explainer,
    specs: list[np.ndarray],
    attrs: list[AttributionMap],
    fractions: list[float],
    mode: str = "attribution",
    seed: int = 0,
    occlusion: float | np.ndarray = 0.0,
) -> list[tuple[float, float]]:
    """Mean prediction change when occluding a growing share of features.

    Attribution mode occludes the highest-attribution features; random mode
    occludes a seeded uniform sample of the same size. `occlusion` is the
    replacement value: a scalar, or an array shaped like the inputs (e.g. the
    healthy baseline, which moves each sample smoothly toward the baseline and
    keeps the curve monotone instead of saturating).
    """
    if mode not in ("attribution", "random"):
        raise FractionOutOfRange(f"unknown mode {mode!r}")
    for f in fractions:
        if not (0.0 <= f <= 0.3):
            raise FractionOutOfRange(f"fraction {f} outside [0, 0.3]")
    if len(specs) != len(attrs):
        raise LengthMismatch(f"{len(specs)} specs vs {len(attrs)} attributions")
    occ_flat = None
    if np.ndim(occlusion) > 0:
        occlusion = np.asarray(occlusion, dtype=np.float64)
        if occlusion.shape != specs[0].shape:
            raise ShapeMismatch(
                f"occlusion {occlusion.shape} vs input {specs[0].shape}"
            )
        occ_flat = occlusion.ravel()

    orig_probs = explainer.class_probs_batch(np.stack(specs))
    pred = orig_probs.argmax(axis=1)

    orders = []
    for i, (x, attr) in enumerate(zip(specs, attrs)):
        if mode == "attribution":
            orders.append(_occlusion_order_by_attribution(attr.data))
        else:
            rng = np.random.default_rng([seed, i])
            orders.append(rng.permutation(x.size))

    curve = []
    for f in fractions:
        deltas = []
        occluded = []
        for x, order in zip(specs, orders):
            n_occ = int(np.floor(f * x.size))
            idx = order[:n_occ]
            xt = x.copy().ravel()
            xt[idx] = occlusion if occ_flat is None else occ_flat[idx]
            occluded.append(xt.reshape(x.shape))
        occ_probs = explainer.class_probs_batch(np.stack(occluded))
        deltas = np.abs(
            orig_probs[np.arange(len(specs)), pred]
            - occ_probs[np.arange(len(specs)), pred]
        )
        curve.append((f, float(deltas.mean())))
    return curve


def cluster_representatives(
    latents: np.ndarray,
    labels: np.ndarray,
    centroids: np.ndarray | None = None,
) -> dict[int, int]:
    """Index of the representative sample for each non-outlier cluster.

    With K-means centroids: closest sample to the centroid. Otherwise the
    cluster medoid (unvalidated convenience for OPTICS/SOM).
    """
    reps: dict[int, int] = {}
    for cl in sorted(set(int(v) for v in labels if v >= 0)):
        idx = np.where(labels == cl)[0]
        pts = latents[idx]
        if centroids is not None:
            d = np.linalg.norm(pts - centroids[cl], axis=1)
            reps[cl] = int(idx[d.argmin()])
        else:
            d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2).sum(axis=1)
            reps[cl] = int(idx[d.argmin()])
    return reps
