"""Convolutional autoencoder: training on healthy spectrograms, residual
computation, and 3-sigma threshold fault detection.

Encoder: conv 16@3x3 -> pool 2x2 -> conv 8@3x3 -> pool 2x2 -> conv 1@3x3
-> pool 2x5 (ReLU after each conv). Decoder mirrors it with nearest-neighbor
upsampling and deconvolutions; the final output layer is linear. For a
128x100xC input the latent is 16x5x1 (80 values flattened).
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .dsp import MelSpectrogram
from .errors import EmptyList, NumericFailure, ShapeMismatch, TooFewSamples
from .nn import (
    Adam,
    Conv2D,
    Deconv2D,
    MaxPool2D,
    ReLU,
    Sequential,
    Upsample2D,
    load_model,
    mse_loss,
    save_model,
)

LATENT_DIM = 80
_MAX_INIT_REDRAWS = 32


@dataclass
class TrainConfig:
    max_epochs: int = 300
    batch_size: int = 8
    patience: int = 10
    val_fraction: float = 0.10
    lr: float = 0.001
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.val_fraction < 1):
            raise ValueError("val_fraction must be in (0, 1)")
        if self.patience > self.max_epochs:
            raise ValueError("patience must be <= max_epochs")

    def to_dict(self) -> dict:
        return {
            "max_epochs": self.max_epochs,
            "batch_size": self.batch_size,
            "patience": self.patience,
            "val_fraction": self.val_fraction,
            "lr": self.lr,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass
class DetectionResult:
    record_id: str
    residual_mean: float
    threshold: float
    is_fault: bool


@dataclass
class CaeModel:
    encoder: Sequential
    decoder: Sequential
    channels: int

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.decoder(self.encoder(x))

    def full_stack(self) -> Sequential:
        return Sequential(self.encoder.layers + self.decoder.layers)

    def save(self, manifest_path, blob_path) -> None:
        save_model(
            self.full_stack(),
            manifest_path,
            blob_path,
            extra={
                "model": "cae",
                "encoder_layers": len(self.encoder.layers),
                "channels": self.channels,
            },
        )

    @classmethod
    def load(cls, manifest_path, blob_path) -> "CaeModel":
        stack, manifest = load_model(manifest_path, blob_path)
        n_enc = manifest["encoder_layers"]
        return cls(
            encoder=Sequential(stack.layers[:n_enc]),
            decoder=Sequential(stack.layers[n_enc:]),
            channels=manifest["channels"],
        )


def build_cae(
    channels: int, rng: np.random.Generator, dtype: str = "float32"
) -> CaeModel:
    # float32 halves memory traffic during training; the layers fall back to
    # float64 when constructed directly (e.g. for finite-difference checks).
    encoder = Sequential(
        [
            Conv2D(channels, 16, 3, rng=rng, dtype=dtype),
            ReLU(),
            MaxPool2D(2, 2),
            Conv2D(16, 8, 3, rng=rng, dtype=dtype),
            ReLU(),
            MaxPool2D(2, 2),
            Conv2D(8, 1, 3, rng=rng, dtype=dtype),
            ReLU(),
            MaxPool2D(2, 5),
        ]
    )
    decoder = Sequential(
        [
            Upsample2D(2, 5),
            Deconv2D(1, 8, 3, rng=rng, dtype=dtype),
            ReLU(),
            Upsample2D(2, 2),
            Deconv2D(8, 16, 3, rng=rng, dtype=dtype),
            ReLU(),
            Upsample2D(2, 2),
            Deconv2D(16, channels, 3, rng=rng, dtype=dtype),
        ]
    )
    return CaeModel(encoder=encoder, decoder=decoder, channels=channels)


def _stack(specs: list[MelSpectrogram]) -> np.ndarray:
    shape = specs[0].data.shape
    for s in specs:
        if s.data.shape != shape:
            raise ShapeMismatch(f"spectrogram shape {s.data.shape} != {shape}")
    return np.stack([s.data for s in specs])


def train_cae(
    train_specs: list[MelSpectrogram], cfg: TrainConfig
) -> tuple[CaeModel, dict]:
    """Fit the autoencoder on healthy spectrograms with early stopping.

    A seeded 10% split is held out for validation; the parameters from the
    best-validation epoch are returned.
    """
    if len(train_specs) < 2:
        raise TooFewSamples("need at least 2 training spectrograms")
    x = _stack(train_specs)
    n = x.shape[0]
    rng = np.random.default_rng(cfg.seed)

    perm = rng.permutation(n)
    n_val = max(1, int(round(cfg.val_fraction * n)))
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    if len(train_idx) == 0:
        raise TooFewSamples("validation split leaves no training samples")
    x_val, x_train = x[val_idx], x[train_idx]

    model = build_cae(x.shape[3], rng)
    # The single-channel ReLU bottleneck can draw an initialization whose
    # pre-activations are negative for every input; the latent space would
    # then be frozen at zero for the rest of training. Re-draw until the
    # bottleneck responds (the generator advances, so this stays seeded).
    for _ in range(_MAX_INIT_REDRAWS):
        if model.encoder(x_train[: min(8, len(x_train))]).any():
            break
        model = build_cae(x.shape[3], rng)
    else:
        raise NumericFailure(
            f"latent bottleneck still dead after {_MAX_INIT_REDRAWS} init draws"
        )
    compute_dtype = model.encoder.layers[0].dtype
    x_val = x_val.astype(compute_dtype)
    x_train = x_train.astype(compute_dtype)
    stack = model.full_stack()
    opt = Adam(stack.params(), lr=cfg.lr)

    history = {"train_loss": [], "val_loss": []}
    best_val = np.inf
    best_params = [p.copy() for p in stack.params()]
    best_epoch = 0
    bad_epochs = 0
    stopped_epoch = cfg.max_epochs

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(x_train))
        epoch_loss = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = x_train[order[start : start + cfg.batch_size]]
            out = stack.forward(batch)
            loss, grad = mse_loss(out, batch)
            stack.backward(grad)
            opt.step(stack.grads())
            epoch_loss += loss * len(batch)
        history["train_loss"].append(epoch_loss / len(x_train))

        val_loss, _ = mse_loss(stack.forward(x_val), x_val)
        history["val_loss"].append(val_loss)

        if val_loss < best_val:
            best_val = val_loss
            best_params = [p.copy() for p in stack.params()]
            best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= cfg.patience:
                stopped_epoch = epoch
                break

    for p, best in zip(stack.params(), best_params):
        p[...] = best
    history["best_epoch"] = best_epoch
    history["stopped_epoch"] = stopped_epoch
    return model, history


def reconstruct(model: CaeModel, spec: MelSpectrogram) -> MelSpectrogram:
    out = model.forward(spec.data[None])[0]
    return MelSpectrogram(
        data=out, record_id=spec.record_id, condition=spec.condition
    )


def reconstruct_batch(model: CaeModel, x: np.ndarray) -> np.ndarray:
    return model.forward(x)


def residual_mean(spec: MelSpectrogram, recon: MelSpectrogram) -> float:
    """Mean absolute residual over all H, W, C."""
    if spec.data.shape != recon.data.shape:
        raise ShapeMismatch(f"{spec.data.shape} vs {recon.data.shape}")
    return float(np.mean(np.abs(spec.data - recon.data)))


def fit_threshold(train_residuals: list[float]) -> tuple[float, float, float]:
    """tau = mu + 3 sigma (population std) of healthy training residuals."""
    if len(train_residuals) == 0:
        raise EmptyList("no residuals")
    r = np.asarray(train_residuals, dtype=np.float64)
    mu = float(r.mean())
    sigma = float(r.std())  # population (ddof=0)
    return mu + 3.0 * sigma, mu, sigma


def detect(model: CaeModel, tau: float, spec: MelSpectrogram) -> DetectionResult:
    r = residual_mean(spec, reconstruct(model, spec))
    return DetectionResult(
        record_id=spec.record_id,
        residual_mean=r,
        threshold=tau,
        is_fault=r >= tau,
    )


def encode(model: CaeModel, spec: MelSpectrogram) -> np.ndarray:
    """Flattened latent vector (length 80 for 128x100 inputs)."""
    return model.encoder(spec.data[None])[0].reshape(-1)


def encode_batch(model: CaeModel, x: np.ndarray) -> np.ndarray:
    z = model.encoder(x)
    return z.reshape(z.shape[0], -1)
