import math

import numpy as np
import pytest

import utils.oracle as oracle
from utils.errors import ConvergenceFailure, OracleRefusal, ZeroVectorError
from utils.landscapes import (
    QuadraticSpec, make_monkey_saddle, make_quadratic, make_rosenbrock, make_rotated_quadratic,
)
from utils.mlp import init_params, make_mlp_problem
from utils.numeric import RngSeed
from utils.oracle import EigenPairs, alignment, eig_sym, hessian_fd, oracle_eigenpairs, symmetrize


def random_symmetric(n, seed):
    a = RngSeed(seed, "sym").stream().standard_normal(n * n).reshape(n, n)
    return a + a.T


def test_symmetrize():
    m = symmetrize(np.array([[1.0, 2.0], [4.0, 3.0]]))
    np.testing.assert_array_equal(m.values, [[1.0, 3.0], [3.0, 3.0]])
    assert m.asymmetry == 2.0
    assert np.max(np.abs(m.values - m.values.T)) == 0.0
    with pytest.raises(ValueError):
        symmetrize(np.zeros((2, 3)))


def test_fd_hessian_of_quadratic():
    problem = make_quadratic(QuadraticSpec((1.0, 2.0, -1.0)))
    h = hessian_fd(problem, np.array([0.7, -3.0, 12.0]))
    np.testing.assert_allclose(h.values, np.diag([1.0, 2.0, -1.0]), atol=1e-9)


def test_fd_hessian_of_rosenbrock_minimum():
    h = hessian_fd(make_rosenbrock(2), np.ones(2))
    exact = np.array([[802.0, -400.0], [-400.0, 200.0]])
    assert np.max(np.abs(h.values - exact) / np.abs(exact)) <= 1e-4


def test_fd_hessian_of_monkey_saddle_origin():
    h = hessian_fd(make_monkey_saddle(), np.zeros(2))
    np.testing.assert_allclose(h.values, np.zeros((2, 2)), atol=1e-8)


@pytest.mark.parametrize("problem", [
    make_rotated_quadratic((3.0, -1.0, 0.5, 2.0), RngSeed(8, "basis")),
    make_monkey_saddle(),
    make_rosenbrock(5),
], ids=lambda p: p.name)
def test_fd_hessian_is_nearly_symmetric_before_symmetrizing(problem):
    stream = RngSeed(13, problem.name).stream()
    for _ in range(20):
        theta = stream.uniform(-1.5, 1.5, problem.dim)
        h = hessian_fd(problem, theta)
        assert h.asymmetry <= 1e-6 * max(1e-12, np.max(np.abs(h.values)))


def test_eigenpairs_of_fd_quadratic_hessian_match_the_eigenvalues_and_axes():
    lambdas = (3.0, -1.0, 0.5, 2.0, -2.5)
    problem = make_quadratic(QuadraticSpec(lambdas))
    stream = RngSeed(17, "theta").stream()
    for _ in range(10):
        pairs = eig_sym(hessian_fd(problem, stream.uniform(-1.5, 1.5, problem.dim)))
        np.testing.assert_allclose(pairs.eigenvalues, sorted(lambdas), rtol=0, atol=1e-8)
        for j, value in enumerate(pairs.eigenvalues):
            axis = np.zeros(problem.dim)
            axis[int(np.argmin(np.abs(np.array(lambdas) - value)))] = 1.0
            assert alignment(pairs.eigenvectors[:, j], axis) >= 1 - 1e-8


def test_fd_hessian_threaded_matches_serial():
    problem = make_rosenbrock(6)
    theta = RngSeed(1, "theta").stream().uniform(-1, 1, 6)
    serial = hessian_fd(problem, theta)
    threaded = hessian_fd(problem, theta, workers=3)
    np.testing.assert_array_equal(serial.values, threaded.values)


def test_oracle_refuses_large_problems():
    problem = make_rosenbrock(oracle.MAX_ORACLE_DIM + 1)
    with pytest.raises(OracleRefusal):
        hessian_fd(problem, np.zeros(problem.dim))
    with pytest.raises(OracleRefusal):
        eig_sym(symmetrize(np.eye(oracle.MAX_ORACLE_DIM + 1)))


def test_eig_sym_diagonal():
    pairs = eig_sym(symmetrize(np.diag([1.0, 2.0, -1.0])))
    np.testing.assert_array_equal(pairs.eigenvalues, [-1.0, 1.0, 2.0])
    np.testing.assert_array_equal(pairs.v_min, [0.0, 0.0, 1.0])


def test_eig_sym_two_by_two():
    pairs = eig_sym(symmetrize(np.array([[0.0, 1.0], [1.0, 0.0]])))
    np.testing.assert_allclose(pairs.eigenvalues, [-1.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(pairs.v_min, np.array([1.0, -1.0]) / math.sqrt(2.0), atol=1e-15)
    np.testing.assert_allclose(pairs.v_max, np.array([1.0, 1.0]) / math.sqrt(2.0), atol=1e-15)


def test_eig_sym_reconstructs_random_matrix():
    a = random_symmetric(50, 3)
    pairs = eig_sym(symmetrize(a))
    v, lam = pairs.eigenvectors, pairs.eigenvalues
    assert np.all(np.diff(lam) >= 0)
    rebuilt = (v * lam) @ v.T
    assert np.linalg.norm(rebuilt - a) <= 1e-8 * np.linalg.norm(a)
    np.testing.assert_allclose(v.T @ v, np.eye(50), atol=1e-10)
    np.testing.assert_allclose(lam, np.linalg.eigvalsh(a), atol=1e-9 * np.linalg.norm(a))


def test_eig_sym_sign_rule():
    pairs = eig_sym(symmetrize(random_symmetric(6, 4)))
    for j in range(6):
        col = pairs.eigenvectors[:, j]
        first = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
        assert first > 0


@pytest.mark.parametrize("n", [2, 3, 6, 10, 20])
def test_eig_sym_converges_on_seeded_random_matrices(n):
    for seed in range(40):
        a = random_symmetric(n, 1000 * n + seed)
        pairs = eig_sym(symmetrize(a))
        v, lam = pairs.eigenvectors, pairs.eigenvalues
        assert np.linalg.norm((v * lam) @ v.T - a) <= 1e-8 * np.linalg.norm(a)
        np.testing.assert_allclose(lam, np.linalg.eigvalsh(a), atol=1e-9 * np.linalg.norm(a))


@pytest.mark.filterwarnings("error")
def test_eig_sym_handles_widely_separated_diagonal():
    # the (0, 2) rotation sees |tau| ~ 5e199
    a = np.array([[1e100, 1e95, 1e-100], [1e95, 0.0, 0.0], [1e-100, 0.0, 0.0]])
    pairs = eig_sym(symmetrize(a))
    v, lam = pairs.eigenvectors, pairs.eigenvalues
    assert np.all(np.isfinite(lam))
    assert np.all(np.diff(lam) >= 0)
    assert np.linalg.norm((v * lam) @ v.T - a) <= 1e-8 * np.linalg.norm(a)


def test_eig_sym_gives_up(monkeypatch):
    monkeypatch.setattr(oracle, "MAX_SWEEPS", 0)
    with pytest.raises(ConvergenceFailure):
        eig_sym(symmetrize(np.array([[0.0, 1.0], [1.0, 0.0]])))


@pytest.mark.parametrize("a, b, expected", [
    ((1.0, 0.0), (0.0, 1.0), 0.0),
    ((2.0, 0.0), (-1.0, 0.0), 1.0),
    ((1.0, 1.0), (1.0, 0.0), 1.0 / math.sqrt(2.0)),
])
def test_alignment(a, b, expected):
    assert alignment(np.array(a), np.array(b)) == pytest.approx(expected, abs=1e-15)


def test_alignment_is_exact_for_identical_vectors():
    v = RngSeed(2).stream().standard_normal(7)
    assert alignment(v, v) == 1.0
    with pytest.raises(ZeroVectorError):
        alignment(np.zeros(2), np.ones(2))


def test_degenerate_minimum_detection():
    pairs = EigenPairs(np.array([1.0, 1.0 + 1e-9, 3.0]), np.eye(3))
    assert pairs.min_is_degenerate()
    assert not EigenPairs(np.array([-1.0, 1.0]), np.eye(2)).min_is_degenerate()


def test_oracle_eigenpairs_exact_and_finite_difference():
    saddle = make_quadratic(QuadraticSpec((1.0, -1.0)))
    pairs = oracle_eigenpairs(saddle, np.array([0.2, 0.3]))
    np.testing.assert_array_equal(pairs.eigenvalues, [-1.0, 1.0])
    np.testing.assert_array_equal(pairs.v_min, [0.0, 1.0])

    mlp = make_mlp_problem(seed=1, n_points=40, batch_size=8)
    theta = init_params(mlp.shape, RngSeed(1, "init"))
    pairs = oracle_eigenpairs(mlp, theta, batch=3)
    assert pairs.eigenvalues.shape == (mlp.dim,)
    np.testing.assert_allclose(np.linalg.norm(pairs.eigenvectors, axis=0), 1.0, atol=1e-10)
