"""Losses with analytic gradients."""
from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean of squared elementwise differences over all elements."""
    if pred.shape != target.shape:
        raise ShapeMismatch(f"{pred.shape} vs {target.shape}")
    diff = pred - target
    loss = float(np.mean(diff**2))
    grad = 2.0 * diff / diff.size
    return loss, grad


def cross_entropy_loss(
    probs: np.ndarray, onehot: np.ndarray, eps: float = 1e-12
) -> tuple[float, np.ndarray]:
    """Categorical cross-entropy on softmax outputs, averaged over the batch.

    Gradient is with respect to `probs` (the post-softmax values); chain it
    through the softmax layer's backward.
    """
    if probs.shape != onehot.shape:
        raise ShapeMismatch(f"{probs.shape} vs {onehot.shape}")
    n = probs.shape[0]
    loss = float(-np.sum(onehot * np.log(probs + eps)) / n)
    grad = -onehot / (probs + eps) / n
    return loss, grad
