import numpy as np
import pytest

from utils.config import load_config
from utils.landscapes import Problem, QuadraticSpec, make_quadratic, make_rotated_quadratic
from utils.numeric import RngSeed


class CountingProblem(Problem):
    """Wraps a problem and counts gradient and loss evaluations"""

    def __init__(self, inner: Problem):
        self.inner = inner
        self.name = inner.name
        self.dim = inner.dim
        self.grad_calls = 0
        self.loss_calls = 0

    def loss(self, theta, batch=None):
        self.loss_calls += 1
        return self.inner.loss(theta, batch)

    def grad(self, theta, batch=None):
        self.grad_calls += 1
        return self.inner.grad(theta, batch)


@pytest.fixture
def saddle():
    """f(x, y) = (x^2 - y^2) / 2"""
    return make_quadratic(QuadraticSpec((1.0, -1.0)))


@pytest.fixture
def rotated_quadratic():
    """10-dimensional quadratic with distinct eigenvalues in [-1, 2] and a random eigenbasis"""
    lambdas = np.linspace(-1.0, 2.0, 10)
    return make_rotated_quadratic(lambdas, RngSeed(7, "basis"))


@pytest.fixture
def counting():
    return CountingProblem


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("DEO_OUT_DIR", str(tmp_path / "runs"))
    load_config(refresh=True)
    yield tmp_path / "runs"
    monkeypatch.undo()
    load_config(refresh=True)
