"""Brute-force ground truth for the dimer direction.

Central-difference Hessians from gradients, a cyclic Jacobi eigensolver for
dense symmetric matrices, and a sign-insensitive alignment metric.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from utils.errors import ConvergenceFailure, NumericFailure, OracleRefusal, ZeroVectorError
from utils.landscapes import BatchKey, Problem
from utils.numeric import ParamVector, check_same_dim

logger = logging.getLogger(__name__)

MAX_ORACLE_DIM = 500
MAX_SWEEPS = 100
DEGENERACY_GAP = 1e-6
TAU_LIMIT = 1e150


@dataclass(frozen=True)
class SymMatrix:
    values: np.ndarray
    # max |A_ij - A_ji| before symmetrization; 0 for matrices built symmetric
    asymmetry: float = 0.0

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class EigenPairs:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns, matching order

    @property
    def v_min(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    @property
    def v_max(self) -> np.ndarray:
        return self.eigenvectors[:, -1]

    def min_is_degenerate(self, gap: float = DEGENERACY_GAP) -> bool:
        return self.eigenvalues.size > 1 and self.eigenvalues[1] - self.eigenvalues[0] < gap


def symmetrize(a: np.ndarray) -> SymMatrix:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    return SymMatrix(0.5 * (a + a.T), asym)


def hessian_fd(
    problem: Problem,
    theta: ParamVector,
    h: float = 1e-5,
    batch: BatchKey = None,
    workers: int = 1,
) -> SymMatrix:
    """Hessian by central differences of the gradient, column by column"""
    n = theta.size
    if n > MAX_ORACLE_DIM:
        raise OracleRefusal(f"refusing a {n}x{n} finite-difference Hessian (limit {MAX_ORACLE_DIM})")
    steps = h * (1.0 + np.abs(theta))

    def column(i: int) -> np.ndarray:
        e = np.zeros(n)
        e[i] = steps[i]
        return (problem.grad(theta + e, batch) - problem.grad(theta - e, batch)) / (2.0 * steps[i])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(column, range(n)))
    else:
        columns = [column(i) for i in range(n)]
    a = np.column_stack(columns)
    if not np.all(np.isfinite(a)):
        raise NumericFailure("finite-difference Hessian")
    return symmetrize(a)


def _off_diagonal_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the first non-negligible component of every column positive"""
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nonzero = np.flatnonzero(np.abs(col) > 1e-12 * max(1.0, float(np.max(np.abs(col)))))
        if nonzero.size and col[nonzero[0]] < 0:
            out[:, j] = -col
    return out


def eig_sym(matrix: SymMatrix, tol: float = 1e-10) -> EigenPairs:
    """Cyclic Jacobi: sweep every (p, q) pair, zeroing a_pq with a plane rotation"""
    a = np.array(matrix.values, dtype=np.float64)
    n = a.shape[0]
    if n > MAX_ORACLE_DIM:
        raise OracleRefusal(f"refusing a {n}x{n} eigendecomposition (limit {MAX_ORACLE_DIM})")
    v = np.eye(n)
    scale = float(np.linalg.norm(a))
    threshold = tol * scale

    sweeps = 0
    while _off_diagonal_norm(a) > threshold:
        if sweeps >= MAX_SWEEPS:
            raise ConvergenceFailure(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(tau) > TAU_LIMIT:
                    # tau * tau would overflow; t ~ 1 / (2 tau)
                    t = 0.5 / tau
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq

    logger.debug("Jacobi converged after %d sweeps (n=%d)", sweeps, n)
    eigenvalues = np.diag(a).copy()
    order = np.argsort(eigenvalues, kind="stable")
    return EigenPairs(eigenvalues[order], _fix_signs(v[:, order]))


def alignment(a: ParamVector, b: ParamVector) -> float:
    """|cos| of the angle between two lines; 1 means parallel or anti-parallel"""
    check_same_dim(a, b)
    aa = float(np.dot(a, a))
    bb = float(np.dot(b, b))
    if aa == 0.0 or bb == 0.0:
        raise ZeroVectorError("alignment needs two nonzero vectors")
    return min(1.0, abs(float(np.dot(a, b))) / math.sqrt(aa * bb))


def oracle_eigenpairs(problem: Problem, theta: ParamVector, batch: BatchKey = None,
                      h: float = 1e-5, workers: int = 1) -> EigenPairs:
    """Exact Hessian when the problem has one, finite differences otherwise"""
    exact: Optional[np.ndarray] = problem.hessian(theta) if problem.has_hessian else None
    hessian = symmetrize(exact) if exact is not None else hessian_fd(problem, theta, h, batch, workers)
    return eig_sym(hessian)
