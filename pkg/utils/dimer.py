"""Dimer direction maintenance and the gradient correction built on it.

One rotation probes theta2 = theta + delta_r * N with a single extra gradient,
removes the component of (g2 - g) along N to get the rotational force, and
takes a normalized step N + eta_rot * F_R. Under AS_WRITTEN the force is
(g2 - g) itself, which on a quadratic climbs the Rayleigh quotient toward the
largest-eigenvalue eigenvector. FORCE_CONVENTION negates it (forces are
negative gradients), which descends toward the smallest-eigenvalue one.
"""
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from utils.errors import NumericFailure
from utils.landscapes import BatchKey, Problem
from utils.numeric import ParamVector, RngSeed, dot, normalize, random_unit_vector

logger = logging.getLogger(__name__)


class SignConvention(str, Enum):
    AS_WRITTEN = "as-written"
    FORCE_CONVENTION = "force"


@dataclass(frozen=True)
class DimerConfig:
    delta_r: float = 6e-3
    eta_rot: float = 1e-3
    alpha: float = 5.0
    sign_convention: SignConvention = SignConvention.AS_WRITTEN

    def __post_init__(self):
        if not self.delta_r > 0:
            raise ValueError(f"delta_r must be > 0, got {self.delta_r}")
        if not self.eta_rot > 0:
            raise ValueError(f"eta_rot must be > 0, got {self.eta_rot}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")


@dataclass(frozen=True)
class RotationDiagnostics:
    rotational_force: ParamVector
    curvature_loss_diff: float
    curvature_grad: float
    curvature_second_order: float
    loss_at_theta: float
    loss_at_theta2: float
    # norm of N + eta_rot * F_R before normalizing; >= 1 since F_R is orthogonal to N
    pre_norm: float
    # angle in degrees between the direction before and after this rotation
    turn_degrees: float

    @property
    def force_norm(self) -> float:
        return float(np.linalg.norm(self.rotational_force))


@dataclass(frozen=True)
class DimerState:
    direction: ParamVector
    config: DimerConfig
    last_diag: Optional[RotationDiagnostics] = None
    refreshes: int = 0


def init_dimer_state(dim: int, config: DimerConfig, seed: RngSeed) -> DimerState:
    return DimerState(direction=random_unit_vector(dim, seed), config=config)


def angle_degrees(a: ParamVector, b: ParamVector) -> float:
    """Angle between two unit vectors, in [0, 180]"""
    c = max(-1.0, min(1.0, dot(a, b)))
    return math.degrees(math.acos(c))


def rotate_once(
    problem: Problem,
    theta: ParamVector,
    g: ParamVector,
    state: DimerState,
    batch: BatchKey = None,
) -> Tuple[DimerState, RotationDiagnostics]:
    """One rotation of the dimer direction; costs one extra gradient and two losses.

    `g` must be problem.grad(theta, batch) for the same batch key, so the
    gradient difference is not polluted by minibatch noise.
    """
    cfg = state.config
    n_hat = state.direction
    theta2 = theta + cfg.delta_r * n_hat
    g2 = problem.grad(theta2, batch)
    loss = problem.loss(theta, batch)
    loss2 = problem.loss(theta2, batch)
    if not (np.all(np.isfinite(g2)) and math.isfinite(loss) and math.isfinite(loss2)):
        raise NumericFailure("dimer rotation")

    diff = g2 - g
    d = diff if cfg.sign_convention is SignConvention.AS_WRITTEN else -diff
    force = d - dot(d, n_hat) * n_hat
    stepped = n_hat + cfg.eta_rot * force
    pre_norm = float(np.linalg.norm(stepped))
    new_direction = normalize(stepped)

    g_dot_n = dot(g, n_hat)
    diag = RotationDiagnostics(
        rotational_force=force,
        curvature_loss_diff=(loss2 - loss) / cfg.delta_r,
        curvature_grad=dot(diff, n_hat) / cfg.delta_r,
        curvature_second_order=2.0 * (loss2 - loss - cfg.delta_r * g_dot_n) / cfg.delta_r ** 2,
        loss_at_theta=loss,
        loss_at_theta2=loss2,
        pre_norm=pre_norm,
        turn_degrees=angle_degrees(n_hat, new_direction),
    )
    logger.debug(
        "dimer refresh: C=%.6g curv_grad=%.6g curv_2nd=%.6g |F_R|=%.3g turn=%.4g deg",
        diag.curvature_loss_diff, diag.curvature_grad, diag.curvature_second_order,
        diag.force_norm, diag.turn_degrees,
    )
    new_state = replace(state, direction=new_direction, last_diag=diag, refreshes=state.refreshes + 1)
    return new_state, diag


def project_gradient(g: ParamVector, direction: ParamVector, alpha: float) -> ParamVector:
    """g - alpha (g . N) N; the component along N is scaled by (1 - alpha)"""
    if alpha == 0:
        return g.copy()
    return g - alpha * dot(g, direction) * direction
