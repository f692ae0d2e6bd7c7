"""Deep hypersphere one-class detector.

A small bias-free 1D conv net maps a complex cell (embedded as two real
channels) to a 128-dimensional feature; training contracts features toward
a fixed center c, and the anomaly score of a cell is its squared feature
distance to c. The center is the mean initial embedding of the training
set with small coordinates clamped away from zero, and is never updated.

Model files are numpy ``.npz`` archives; see :func:`save_model` for keys.
Training also emits a per-epoch loss log ``(epoch, mean_loss, lr)``.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingFailureError
from .nn import (
    Adam, BatchNormScale, Conv1d, GlobalAvgPool, LeakyReLU, Linear,
    MaxPool1d, Sequential,
)

__all__ = [
    "TrainConfig",
    "DsvddModel",
    "embed_complex",
    "build_network",
    "init_center",
    "dsvdd_loss",
    "train",
    "dsvdd_score",
    "score_many",
    "save_model",
    "load_model",
    "write_loss_log",
]

FEATURE_DIM = 128
_CONV_CHANNELS = (32, 64, 128)
_CENTER_CLAMP = 0.1


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 15
    batch_size: int = 64
    lr: float = 1e-3
    milestones: tuple = (5, 10)   # 0-based epochs at which lr is multiplied
    lr_decay: float = 0.1
    weight_decay: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if min(self.epochs, self.batch_size) < 1 or self.lr <= 0:
            raise ValueError("epochs, batch size and learning rate must be positive")
        if self.weight_decay < 0 or not 0 < self.lr_decay <= 1:
            raise ValueError("invalid decay settings")
        if any(ms >= self.epochs for ms in self.milestones):
            raise ValueError("milestones must precede the final epoch")

    def lr_at(self, epoch):
        drops = sum(1 for ms in self.milestones if epoch >= ms)
        return self.lr * self.lr_decay ** drops


@dataclass
class DsvddModel:
    net: Sequential
    center: np.ndarray                 # (FEATURE_DIM,)
    channel_mean: np.ndarray           # (2,) standardization statistics
    channel_std: np.ndarray            # (2,)
    loss_log: list = field(default_factory=list)  # (epoch, mean_loss, lr)
    input_dim: int = 16


def embed_complex(z):
    """Complex cells (B, m) or (m,) -> real tensor (B, 2, m): re then im channel."""
    z = np.atleast_2d(np.asarray(z))
    return np.stack([z.real, z.imag], axis=1).astype(float)


def _standardize(x, mean, std):
    return (x - mean[None, :, None]) / std[None, :, None]


def build_network(m, rng):
    """Three conv stages (32/64/128 channels) + global average pool + linear.

    Kernel 3, stride 1, padding 1; pool window 2; leaky slope 0.01. All
    layers bias-free, batch norm scale-only. Needs m >= 8 so three pooling
    halvings leave a positive length.
    """
    if m < 8:
        raise ValueError("input length must be >= 8 for three pooling stages")
    layers = []
    c_prev = 2
    for c_out in _CONV_CHANNELS:
        layers += [
            Conv1d(c_prev, c_out, kernel=3, pad=1, rng=rng),
            BatchNormScale(c_out),
            LeakyReLU(0.01),
            MaxPool1d(),
        ]
        c_prev = c_out
    layers += [GlobalAvgPool(), Linear(c_prev, FEATURE_DIM, rng=rng)]
    return Sequential(layers)


def init_center(net, x, batch_size=256):
    """Mean evaluation-mode embedding of the training set, clamped elementwise.

    Coordinates with magnitude below 0.1 are pushed to +-0.1 (zero counts
    as positive) so the center cannot sit at the origin of a bias-free net.
    """
    outs = [net.forward(x[i:i + batch_size], training=False)
            for i in range(0, len(x), batch_size)]
    c = np.concatenate(outs, axis=0).mean(axis=0)
    small = np.abs(c) < _CENTER_CLAMP
    signs = np.where(c[small] < 0, -1.0, 1.0)
    c[small] = signs * _CENTER_CLAMP
    return c


def _weight_norm_sq(net):
    return sum(float(np.sum(p.value ** 2)) for p in net.params())


def dsvdd_loss(net, batch, center, beta, training=True, backward=False):
    """Mean squared feature distance to the center plus (beta/2) sum ||W||_F^2.

    With ``backward`` the parameter gradients (including the decay term) are
    accumulated into the network.
    """
    out = net.forward(batch, training=training)
    diff = out - center[None, :]
    loss = float(np.mean(np.sum(diff ** 2, axis=1)))
    loss += 0.5 * beta * _weight_norm_sq(net)
    if backward:
        net.backward(2.0 * diff / batch.shape[0])
        if beta:
            for p in net.params():
                p.grad += beta * p.value
    return loss


def train(cells, config=TrainConfig()):
    """Train on target-free cells (rows of complex array ``cells``).

    Deterministic given ``config.seed``: weight init, batch shuffling and
    the optimizer all derive from one Philox stream.
    """
    z = np.atleast_2d(np.asarray(cells))
    n, m = z.shape
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(config.seed)))

    x_raw = embed_complex(z)
    mean = x_raw.mean(axis=(0, 2))
    std = x_raw.std(axis=(0, 2))
    if np.any(std <= 0):
        raise ValueError("training data has a constant channel")
    x = _standardize(x_raw, mean, std)

    net = build_network(m, rng)
    center = init_center(net, x)
    opt = Adam(net.params())

    log = []
    for epoch in range(config.epochs):
        lr = config.lr_at(epoch)
        perm = rng.permutation(n)
        losses = []
        for start in range(0, n, config.batch_size):
            batch = x[perm[start:start + config.batch_size]]
            net.zero_grad()
            loss = dsvdd_loss(net, batch, center, config.weight_decay,
                              training=True, backward=True)
            if not np.isfinite(loss):
                raise TrainingFailureError(
                    f"non-finite loss in epoch {epoch}", epoch=epoch)
            losses.append(loss)
            opt.step(lr)
        log.append((epoch, float(np.mean(losses)), lr))

    return DsvddModel(
        net=net, center=center, channel_mean=mean, channel_std=std,
        loss_log=log, input_dim=m,
    )


def score_many(z, model):
    """Squared feature distance to the center for each row of ``z`` (eval mode)."""
    z = np.atleast_2d(np.asarray(z))
    if z.shape[1] != model.input_dim:
        raise ValueError(
            f"dimension mismatch: model dim {model.input_dim}, input dim {z.shape[1]}")
    x = _standardize(embed_complex(z), model.channel_mean, model.channel_std)
    out = model.net.forward(x, training=False)
    return np.sum((out - model.center[None, :]) ** 2, axis=1)


def dsvdd_score(z, model):
    return float(score_many(np.asarray(z)[None, :], model)[0])


_MODEL_VERSION = 1


def save_model(path, model):
    """Write an ``.npz`` archive.

    Keys: ``meta`` (JSON string: version, input_dim, loss_log), ``center``,
    ``channel_mean``, ``channel_std``, then per conv stage i in 0..2:
    ``conv{i}_w``, ``bn{i}_scale``, ``bn{i}_mean``, ``bn{i}_var``, and
    ``fc_w`` for the final linear map.
    """
    arrays = {
        "center": model.center,
        "channel_mean": model.channel_mean,
        "channel_std": model.channel_std,
    }
    convs = [l for l in model.net.layers if isinstance(l, Conv1d)]
    bns = [l for l in model.net.layers if isinstance(l, BatchNormScale)]
    fc = [l for l in model.net.layers if isinstance(l, Linear)][0]
    for i, (conv, bn) in enumerate(zip(convs, bns)):
        arrays[f"conv{i}_w"] = conv.weight.value
        arrays[f"bn{i}_scale"] = bn.scale.value
        arrays[f"bn{i}_mean"] = bn.running_mean
        arrays[f"bn{i}_var"] = bn.running_var
    arrays["fc_w"] = fc.weight.value
    meta = {
        "version": _MODEL_VERSION,
        "input_dim": model.input_dim,
        "loss_log": model.loss_log,
    }
    np.savez(path, meta=json.dumps(meta), **arrays)


def load_model(path):
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta["version"] != _MODEL_VERSION:
            raise ValueError(f"unsupported model version {meta['version']}")
        m = int(meta["input_dim"])
        rng = np.random.default_rng(0)  # placeholder init, overwritten below
        net = build_network(m, rng)
        convs = [l for l in net.layers if isinstance(l, Conv1d)]
        bns = [l for l in net.layers if isinstance(l, BatchNormScale)]
        fc = [l for l in net.layers if isinstance(l, Linear)][0]
        for i, (conv, bn) in enumerate(zip(convs, bns)):
            conv.weight.value[...] = data[f"conv{i}_w"]
            bn.scale.value[...] = data[f"bn{i}_scale"]
            bn.running_mean[...] = data[f"bn{i}_mean"]
            bn.running_var[...] = data[f"bn{i}_var"]
        fc.weight.value[...] = data["fc_w"]
        return DsvddModel(
            net=net,
            center=data["center"].copy(),
            channel_mean=data["channel_mean"].copy(),
            channel_std=data["channel_std"].copy(),
            loss_log=[tuple(row) for row in meta["loss_log"]],
            input_dim=m,
        )


def write_loss_log(path, model):
    """Per-epoch training log as CSV with columns epoch, mean_loss, lr."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch,mean_loss,lr\n")
        for epoch, loss, lr in model.loss_log:
            fh.write(f"{epoch},{loss!r},{lr!r}\n")
