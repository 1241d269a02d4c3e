"""Dense vector arithmetic, seeded random streams and the learning-rate schedule.

A stream is identified by ``RngSeed(seed, label)`` and drawn from numpy's
PCG64 bit generator, seeded through ``SeedSequence`` with the entropy words
``[seed & 0xFFFFFFFF, seed >> 32, *label.encode("utf-8")]``. Every draw is
derived from the raw 64-bit outputs: uniform doubles use the top 53 bits,
standard normals use the Box-Muller transform on consecutive uniform pairs,
and permutations sort the raw outputs. Both PCG64 and SeedSequence are fixed,
documented algorithms, so a stream is reproducible on any platform.
"""
import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from utils.errors import DimensionMismatch, ZeroVectorError

logger = logging.getLogger(__name__)

ParamVector = np.ndarray

MASK32 = 0xFFFFFFFF
MASK64 = (1 << 64) - 1
_TWO_POW_M53 = 1.0 / 9007199254740992.0

ZERO_NORM_THRESHOLD = 1e-300


@dataclass(frozen=True)
class RngSeed:
    """Names one independent random stream: a 64-bit seed plus a short label"""
    seed: int
    label: str = "default"

    def __post_init__(self):
        if not 0 <= self.seed <= MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def child(self, suffix: str) -> "RngSeed":
        return RngSeed(self.seed, f"{self.label}/{suffix}")

    def entropy(self) -> List[int]:
        return [self.seed & MASK32, self.seed >> 32, *self.label.encode("utf-8")]

    def stream(self) -> "RandomStream":
        return RandomStream(np.random.PCG64(np.random.SeedSequence(self.entropy())))


class RandomStream:
    def __init__(self, bit_generator: np.random.PCG64):
        self.bit_generator = bit_generator

    def raw(self, n: int) -> np.ndarray:
        return self.bit_generator.random_raw(n)

    def random(self, n: int) -> np.ndarray:
        """Uniform doubles in [0, 1)"""
        return (self.raw(n) >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53

    def uniform(self, low: float, high: float, n: int) -> np.ndarray:
        return low + (high - low) * self.random(n)

    def standard_normal(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        u = self.random(2 * pairs).reshape(pairs, 2)
        r = np.sqrt(-2.0 * np.log(1.0 - u[:, 0]))
        angle = 2.0 * np.pi * u[:, 1]
        return np.column_stack((r * np.cos(angle), r * np.sin(angle))).reshape(-1)[:n]

    def permutation(self, n: int) -> np.ndarray:
        return np.argsort(self.raw(n), kind="stable").astype(np.int64)


def check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimension mismatch: {a.shape} vs {b.shape}")


def dot(a: ParamVector, b: ParamVector) -> float:
    check_same_dim(a, b)
    return float(np.dot(a, b))


def normalize(v: ParamVector) -> ParamVector:
    n = float(np.linalg.norm(v))
    if not n > ZERO_NORM_THRESHOLD:
        raise ZeroVectorError("cannot normalize a zero vector")
    return v / n


def random_unit_vector(dim: int, seed: RngSeed) -> ParamVector:
    """Direction drawn uniformly from the unit sphere in `dim` dimensions"""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    stream = seed.stream()
    while True:
        z = stream.standard_normal(dim)
        if float(np.linalg.norm(z)) > ZERO_NORM_THRESHOLD:
            return normalize(z)


def random_orthogonal(dim: int, seed: RngSeed) -> np.ndarray:
    """Orthogonal matrix from the QR factorization of a seeded Gaussian matrix"""
    g = seed.stream().standard_normal(dim * dim).reshape(dim, dim)
    q, r = np.linalg.qr(g)
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    return q * signs


def cosine_lr(t: int, total: int, lr_max: float, lr_min: float = 0.0) -> float:
    if total < 1:
        raise ValueError(f"total steps must be >= 1, got {total}")
    if not 0.0 <= lr_min <= lr_max:
        raise ValueError(f"need 0 <= lr_min <= lr_max, got lr_min={lr_min}, lr_max={lr_max}")
    if t < 0:
        raise ValueError(f"step index must be >= 0, got {t}")
    if t > total:
        logger.warning("schedule step %d is past the horizon %d; clamping to lr_min", t, total)
        return lr_min
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + math.cos(math.pi * t / total))
