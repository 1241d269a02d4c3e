"""Analytic loss surfaces with exact gradients and Hessians.

Every surface implements `Problem`: loss(theta, batch), grad(theta, batch)
and an optional hessian(theta). The batch key is accepted everywhere so
analytic surfaces and the MLP problem are interchangeable; analytic surfaces
ignore it.
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from utils.numeric import ParamVector, RngSeed, random_orthogonal

BatchKey = Optional[int]

LANDSCAPES = ("quadratic", "monkey", "rosenbrock", "mlp")


class Problem:
    name: str = "problem"
    dim: int = 0

    def loss(self, theta: ParamVector, batch: BatchKey = None) -> float:
        raise NotImplementedError

    def grad(self, theta: ParamVector, batch: BatchKey = None) -> ParamVector:
        raise NotImplementedError

    def hessian(self, theta: ParamVector) -> Optional[np.ndarray]:
        return None

    @property
    def has_hessian(self) -> bool:
        return False


@dataclass(frozen=True)
class QuadraticSpec:
    lambdas: Sequence[float]
    # columns are eigenvectors; None means the coordinate axes
    basis: Optional[np.ndarray] = None


class QuadraticProblem(Problem):
    """f(x) = 1/2 x^T H x with H = Q diag(lambdas) Q^T"""

    def __init__(self, spec: QuadraticSpec):
        lambdas = np.array(spec.lambdas, dtype=np.float64)
        self.lambdas = lambdas
        self.dim = lambdas.size
        self.name = "quadratic"
        if spec.basis is None:
            self.basis = None
            self.matrix = np.diag(lambdas)
        else:
            q = np.array(spec.basis, dtype=np.float64)
            self.basis = q
            h = (q * lambdas) @ q.T
            self.matrix = 0.5 * (h + h.T)

    def loss(self, theta, batch=None):
        if self.basis is None:
            return float(0.5 * np.sum(self.lambdas * theta * theta))
        return float(0.5 * theta @ self.matrix @ theta)

    def grad(self, theta, batch=None):
        if self.basis is None:
            return self.lambdas * theta
        return self.matrix @ theta

    def hessian(self, theta):
        return self.matrix.copy()

    @property
    def has_hessian(self):
        return True


class MonkeySaddleProblem(Problem):
    """f(x, y) = x^3 - 3 x y^2, a degenerate saddle at the origin"""

    name = "monkey"
    dim = 2

    def loss(self, theta, batch=None):
        x, y = theta
        return float(x ** 3 - 3.0 * x * y ** 2)

    def grad(self, theta, batch=None):
        x, y = theta
        return np.array([3.0 * x ** 2 - 3.0 * y ** 2, -6.0 * x * y])

    def hessian(self, theta):
        x, y = theta
        return np.array([[6.0 * x, -6.0 * y], [-6.0 * y, -6.0 * x]])

    @property
    def has_hessian(self):
        return True


class RosenbrockProblem(Problem):
    """Chained Rosenbrock: sum_i (1 - x_i)^2 + 100 (x_{i+1} - x_i^2)^2"""

    name = "rosenbrock"

    def __init__(self, dim: int = 2):
        self.dim = dim

    def loss(self, theta, batch=None):
        x, x_next = theta[:-1], theta[1:]
        return float(np.sum((1.0 - x) ** 2 + 100.0 * (x_next - x ** 2) ** 2))

    def grad(self, theta, batch=None):
        x, x_next = theta[:-1], theta[1:]
        inner = x_next - x ** 2
        g = np.zeros_like(theta)
        g[:-1] += -2.0 * (1.0 - x) - 400.0 * x * inner
        g[1:] += 200.0 * inner
        return g

    def hessian(self, theta):
        n = self.dim
        h = np.zeros((n, n))
        x, x_next = theta[:-1], theta[1:]
        idx = np.arange(n - 1)
        h[idx, idx] += 2.0 + 1200.0 * x ** 2 - 400.0 * x_next
        h[idx + 1, idx + 1] += 200.0
        h[idx, idx + 1] = -400.0 * x
        h[idx + 1, idx] = -400.0 * x
        return h

    @property
    def has_hessian(self):
        return True


def make_quadratic(spec: QuadraticSpec) -> QuadraticProblem:
    lambdas = np.asarray(spec.lambdas, dtype=np.float64)
    if lambdas.size == 0:
        raise ValueError("a quadratic needs at least one eigenvalue")
    if not np.all(np.isfinite(lambdas)):
        raise ValueError("quadratic eigenvalues must be finite")
    if spec.basis is not None:
        q = np.asarray(spec.basis, dtype=np.float64)
        if q.shape != (lambdas.size, lambdas.size):
            raise ValueError(f"basis must be {lambdas.size}x{lambdas.size}, got {q.shape}")
        if not np.allclose(q.T @ q, np.eye(lambdas.size), atol=1e-10):
            raise ValueError("basis columns must be orthonormal")
    return QuadraticProblem(spec)


def make_rotated_quadratic(lambdas: Sequence[float], seed: RngSeed) -> QuadraticProblem:
    return make_quadratic(QuadraticSpec(lambdas, random_orthogonal(len(lambdas), seed)))


def make_monkey_saddle() -> MonkeySaddleProblem:
    return MonkeySaddleProblem()


def make_rosenbrock(dim: int = 2) -> RosenbrockProblem:
    if dim < 2:
        raise ValueError(f"rosenbrock needs dim >= 2, got {dim}")
    return RosenbrockProblem(dim)


def initial_point(problem: Problem, seed: RngSeed, start: str = "random") -> ParamVector:
    """Starting parameters for an analytic landscape"""
    if start == "classic" and isinstance(problem, RosenbrockProblem):
        theta = np.ones(problem.dim)
        theta[::2] = -1.2
        return theta
    if start not in ("random", "classic"):
        raise ValueError(f"unknown start '{start}'")
    return seed.stream().uniform(-1.5, 1.5, problem.dim)
