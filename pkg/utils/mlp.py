"""Two-layer tanh MLP on a seeded two-moons dataset, with hand-written backprop.

Flat parameter layout (row-major blocks, in this order):
    W1 (input x hidden) | b1 (hidden) | W2 (hidden x classes) | b2 (classes)
"""
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd

from utils.errors import DimensionMismatch, NumericFailure
from utils.landscapes import BatchKey, Problem
from utils.numeric import ParamVector, RngSeed


@dataclass(frozen=True)
class MlpShape:
    input_dim: int = 2
    hidden: int = 16
    classes: int = 2

    @property
    def param_count(self) -> int:
        return self.input_dim * self.hidden + self.hidden + self.hidden * self.classes + self.classes

    def blocks(self) -> Dict[str, slice]:
        w1 = self.input_dim * self.hidden
        b1 = w1 + self.hidden
        w2 = b1 + self.hidden * self.classes
        return {
            "W1": slice(0, w1),
            "b1": slice(w1, b1),
            "W2": slice(b1, w2),
            "b2": slice(w2, w2 + self.classes),
        }

    def unpack(self, params: ParamVector):
        if params.shape != (self.param_count,):
            raise DimensionMismatch(f"expected {self.param_count} parameters, got {params.shape}")
        b = self.blocks()
        return (
            params[b["W1"]].reshape(self.input_dim, self.hidden),
            params[b["b1"]],
            params[b["W2"]].reshape(self.hidden, self.classes),
            params[b["b2"]],
        )


DEFAULT_SHAPE = MlpShape()


@dataclass(frozen=True)
class Dataset:
    points: np.ndarray  # (n, 2)
    labels: np.ndarray  # (n,) int

    @property
    def size(self) -> int:
        return int(self.labels.shape[0])

    def subset(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.points[indices], self.labels[indices])


def make_moons(n: int = 200, noise: float = 0.1, seed: RngSeed = RngSeed(0, "data")) -> Dataset:
    """Two interleaved half-moons; class sizes differ by at most one"""
    n_outer = (n + 1) // 2
    n_inner = n // 2
    t_outer = np.linspace(0.0, np.pi, n_outer)
    t_inner = np.linspace(0.0, np.pi, n_inner)
    outer = np.column_stack([np.cos(t_outer), np.sin(t_outer)])
    inner = np.column_stack([1.0 - np.cos(t_inner), 1.0 - np.sin(t_inner) - 0.5])
    points = np.vstack([outer, inner])
    if noise > 0:
        points = points + noise * seed.stream().standard_normal(2 * n).reshape(n, 2)
    labels = np.concatenate([np.zeros(n_outer, dtype=np.int64), np.ones(n_inner, dtype=np.int64)])
    return Dataset(points, labels)


def save_dataset_csv(dataset: Dataset, path: Union[str, Path]) -> None:
    df = pd.DataFrame({
        "x1": dataset.points[:, 0],
        "x2": dataset.points[:, 1],
        "label": dataset.labels,
    })
    df.to_csv(path, index=False, lineterminator="\n")


def load_dataset_csv(path: Union[str, Path]) -> Dataset:
    df = pd.read_csv(path, float_precision="round_trip")
    missing = [c for c in ("x1", "x2", "label") if c not in df.columns]
    if missing:
        raise ValueError(f"dataset CSV is missing columns: {', '.join(missing)}")
    return Dataset(df[["x1", "x2"]].to_numpy(dtype=np.float64), df["label"].to_numpy(dtype=np.int64))


def init_params(shape: MlpShape = DEFAULT_SHAPE, seed: RngSeed = RngSeed(0, "init")) -> ParamVector:
    """Gaussian weights scaled by 1/sqrt(fan_in); zero biases"""
    stream = seed.stream()
    params = np.zeros(shape.param_count)
    b = shape.blocks()
    params[b["W1"]] = stream.standard_normal(shape.input_dim * shape.hidden) / np.sqrt(shape.input_dim)
    params[b["W2"]] = stream.standard_normal(shape.hidden * shape.classes) / np.sqrt(shape.hidden)
    return params


@lru_cache(maxsize=16)
def _epoch_permutation(n: int, seed: RngSeed) -> np.ndarray:
    perm = seed.stream().permutation(n)
    perm.flags.writeable = False
    return perm


def batch_indices(dataset_size: int, batch_size: int, step: int, seed: RngSeed) -> np.ndarray:
    """Minibatch for 0-based `step`: consecutive slices of a per-epoch seeded permutation"""
    if not 1 <= batch_size <= dataset_size:
        raise ValueError(f"batch size must be in [1, {dataset_size}], got {batch_size}")
    per_epoch = -(-dataset_size // batch_size)
    epoch, k = divmod(step, per_epoch)
    perm = _epoch_permutation(dataset_size, seed.child(f"epoch{epoch}"))
    return perm[k * batch_size:(k + 1) * batch_size]


def _forward(params: ParamVector, batch: Dataset, shape: MlpShape):
    w1, b1, w2, b2 = shape.unpack(params)
    hidden = np.tanh(batch.points @ w1 + b1)
    logits = hidden @ w2 + b2
    top = logits.max(axis=1, keepdims=True)
    lse = top[:, 0] + np.log(np.exp(logits - top).sum(axis=1))
    return hidden, logits, lse


def forward_loss(params: ParamVector, batch: Dataset, shape: MlpShape = DEFAULT_SHAPE) -> float:
    """Mean softmax cross-entropy over the batch"""
    _, logits, lse = _forward(params, batch, shape)
    loss = float(np.mean(lse - logits[np.arange(batch.size), batch.labels]))
    if not np.isfinite(loss):
        raise NumericFailure("mlp forward")
    return loss


def predict(params: ParamVector, points: np.ndarray, shape: MlpShape = DEFAULT_SHAPE) -> np.ndarray:
    """Class with the largest logit for every point"""
    _, logits, _ = _forward(params, Dataset(points, np.zeros(len(points), dtype=np.int64)), shape)
    return np.argmax(logits, axis=1)


def backward(params: ParamVector, batch: Dataset, shape: MlpShape = DEFAULT_SHAPE) -> ParamVector:
    """Exact gradient of forward_loss"""
    w1, b1, w2, b2 = shape.unpack(params)
    hidden, logits, lse = _forward(params, batch, shape)
    n = batch.size
    delta = np.exp(logits - lse[:, None])
    delta[np.arange(n), batch.labels] -= 1.0
    delta /= n

    d_hidden = (delta @ w2.T) * (1.0 - hidden ** 2)
    grad = np.empty_like(params)
    b = shape.blocks()
    grad[b["W1"]] = (batch.points.T @ d_hidden).reshape(-1)
    grad[b["b1"]] = d_hidden.sum(axis=0)
    grad[b["W2"]] = (hidden.T @ delta).reshape(-1)
    grad[b["b2"]] = delta.sum(axis=0)
    if not np.all(np.isfinite(grad)):
        raise NumericFailure("mlp backward")
    return grad


class MlpProblem(Problem):
    """The MLP classifier as a Problem; an integer batch key selects a minibatch"""

    name = "mlp"

    def __init__(
        self,
        dataset: Dataset,
        shape: MlpShape = DEFAULT_SHAPE,
        batch_size: int = 32,
        batch_seed: RngSeed = RngSeed(0, "data/batches"),
    ):
        if not 1 <= batch_size <= dataset.size:
            raise ValueError(f"batch size must be in [1, {dataset.size}], got {batch_size}")
        self.dataset = dataset
        self.shape = shape
        self.batch_size = batch_size
        self.batch_seed = batch_seed
        self.dim = shape.param_count

    def batch(self, key: BatchKey) -> Dataset:
        """Full dataset for None; otherwise the minibatch of 1-based step `key`"""
        if key is None:
            return self.dataset
        if key < 1:
            raise ValueError(f"batch keys are 1-based step indices, got {key}")
        return self.dataset.subset(batch_indices(self.dataset.size, self.batch_size, key - 1, self.batch_seed))

    def loss(self, theta, batch=None):
        return forward_loss(theta, self.batch(batch), self.shape)

    def grad(self, theta, batch=None):
        return backward(theta, self.batch(batch), self.shape)

    def accuracy(self, theta: ParamVector, batch: Optional[int] = None) -> float:
        data = self.batch(batch)
        return float(np.mean(predict(theta, data.points, self.shape) == data.labels))


def make_mlp_problem(
    seed: int = 0,
    shape: MlpShape = DEFAULT_SHAPE,
    n_points: int = 200,
    noise: float = 0.1,
    batch_size: int = 32,
) -> MlpProblem:
    data_seed = RngSeed(seed, "data")
    dataset = make_moons(n_points, noise, data_seed)
    return MlpProblem(dataset, shape, batch_size, data_seed.child("batches"))
