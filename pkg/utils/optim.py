"""Base optimizers (SGD, Adam, AdamW) and the DEO wrapper around them.

Steps are pure: each takes the parameters and a state value and returns new
ones. `deo_step` follows the expensive/cheap schedule: on steps with
t mod f == 0 the dimer direction is refreshed (one extra gradient) and the
new direction corrects the gradient; other steps reuse the cached direction.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from utils.dimer import DimerConfig, DimerState, project_gradient, rotate_once
from utils.errors import NumericFailure
from utils.landscapes import BatchKey, Problem
from utils.numeric import ParamVector, check_same_dim, cosine_lr, dot

logger = logging.getLogger(__name__)


class BaseOptimizer(str, Enum):
    SGD = "sgd"
    ADAM = "adam"
    ADAMW = "adamw"


@dataclass(frozen=True)
class SgdConfig:
    momentum: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must be in [0, 1), got {self.momentum}")


@dataclass(frozen=True)
class SgdState:
    config: SgdConfig = field(default_factory=SgdConfig)
    velocity: Optional[ParamVector] = None


@dataclass(frozen=True)
class AdamConfig:
    beta1: float = 0.9
    beta2: float = 0.95
    epsilon: float = 1e-8
    weight_decay: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.beta1 < 1.0:
            raise ValueError(f"beta1 must be in [0, 1), got {self.beta1}")
        if not 0.0 <= self.beta2 < 1.0:
            raise ValueError(f"beta2 must be in [0, 1), got {self.beta2}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not self.weight_decay >= 0:
            raise ValueError(f"weight_decay must be >= 0, got {self.weight_decay}")


@dataclass(frozen=True)
class AdamState:
    m: ParamVector
    v: ParamVector
    t: int = 0

    @classmethod
    def zeros(cls, dim: int) -> "AdamState":
        return cls(np.zeros(dim), np.zeros(dim), 0)


OptState = Union[SgdState, AdamState]


@dataclass(frozen=True)
class DeoConfig:
    # None means f = infinity: the initial direction is never refreshed
    frequency: Optional[int] = 10
    dimer: DimerConfig = field(default_factory=DimerConfig)
    base: BaseOptimizer = BaseOptimizer.ADAM
    refresh_at_start: bool = False

    def __post_init__(self):
        if self.frequency is not None and self.frequency < 1:
            raise ValueError(f"frequency must be >= 1, got {self.frequency}")

    def is_refresh_step(self, t: int) -> bool:
        if self.frequency is None:
            return False
        k = t - 1 if self.refresh_at_start else t
        return k % self.frequency == 0

    def refreshes_through(self, t: int) -> int:
        """Number of refresh steps among steps 1..t"""
        if self.frequency is None:
            return 0
        if self.refresh_at_start:
            return -(-t // self.frequency)
        return t // self.frequency


@dataclass(frozen=True)
class LrSchedule:
    lr_max: float = 6e-4
    lr_min: float = 0.0

    def lr(self, t: int, total: int) -> float:
        """Learning rate for 1-based step t of `total`"""
        return cosine_lr(t - 1, total, self.lr_max, self.lr_min)


@dataclass(frozen=True)
class RunRecord:
    step: int
    lr: float
    loss: float
    grad_norm: float
    g_dot_n: Optional[float] = None
    curv_paper: Optional[float] = None
    curv_grad: Optional[float] = None
    curv_2nd: Optional[float] = None
    dimer_refreshed: int = 0
    grad_evals: int = 0
    align_vmin: Optional[float] = None
    refresh_angle: Optional[float] = None


def _checked(theta: ParamVector, where: str) -> ParamVector:
    if not np.all(np.isfinite(theta)):
        raise NumericFailure(where)
    return theta


def sgd_step(theta: ParamVector, g_mod: ParamVector, lr: float, state: SgdState) -> Tuple[ParamVector, SgdState]:
    check_same_dim(theta, g_mod)
    mu = state.config.momentum
    if mu > 0:
        velocity = g_mod.copy() if state.velocity is None else mu * state.velocity + g_mod
        return _checked(theta - lr * velocity, "sgd step"), replace(state, velocity=velocity)
    return _checked(theta - lr * g_mod, "sgd step"), state


def adam_step(
    theta: ParamVector, g_mod: ParamVector, lr: float, state: AdamState, cfg: AdamConfig
) -> Tuple[ParamVector, AdamState]:
    check_same_dim(theta, g_mod)
    t = state.t + 1
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g_mod
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * (g_mod * g_mod)
    m_hat = m / (1.0 - cfg.beta1 ** t)
    v_hat = v / (1.0 - cfg.beta2 ** t)
    new_theta = theta - lr * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    return _checked(new_theta, "adam step"), AdamState(m, v, t)


def adamw_step(
    theta: ParamVector, g_mod: ParamVector, lr: float, state: AdamState, cfg: AdamConfig
) -> Tuple[ParamVector, AdamState]:
    """Adam followed by decoupled weight decay on the pre-step parameters"""
    new_theta, new_state = adam_step(theta, g_mod, lr, state, cfg)
    if cfg.weight_decay == 0:
        return new_theta, new_state
    return _checked(new_theta - lr * cfg.weight_decay * theta, "adamw step"), new_state


def init_opt_state(base: BaseOptimizer, dim: int, sgd: Optional[SgdConfig] = None) -> OptState:
    if base is BaseOptimizer.SGD:
        return SgdState(config=sgd or SgdConfig())
    return AdamState.zeros(dim)


def base_update(
    base: BaseOptimizer, theta: ParamVector, g_mod: ParamVector, lr: float, state: OptState, adam: AdamConfig
) -> Tuple[ParamVector, OptState]:
    if base is BaseOptimizer.SGD:
        return sgd_step(theta, g_mod, lr, state)
    if base is BaseOptimizer.ADAM:
        return adam_step(theta, g_mod, lr, state, adam)
    return adamw_step(theta, g_mod, lr, state, adam)


def _grad_and_loss(problem: Problem, theta: ParamVector, batch: BatchKey, t: int):
    g = problem.grad(theta, batch)
    loss = problem.loss(theta, batch)
    if not (np.all(np.isfinite(g)) and math.isfinite(loss)):
        raise NumericFailure("gradient evaluation", t)
    return g, loss


def plain_step(
    problem: Problem,
    theta: ParamVector,
    t: int,
    total: int,
    base: BaseOptimizer,
    opt_state: OptState,
    schedule: LrSchedule,
    batch: BatchKey,
    adam: AdamConfig = AdamConfig(),
) -> Tuple[ParamVector, OptState, RunRecord]:
    """One step of a bare base optimizer (no dimer, one gradient evaluation)"""
    g, loss = _grad_and_loss(problem, theta, batch, t)
    lr = schedule.lr(t, total)
    try:
        new_theta, new_state = base_update(base, theta, g, lr, opt_state, adam)
    except NumericFailure as err:
        raise NumericFailure(err.where, t) from err
    record = RunRecord(step=t, lr=lr, loss=loss, grad_norm=float(np.linalg.norm(g)), grad_evals=t)
    return new_theta, new_state, record


def deo_step(
    problem: Problem,
    theta: ParamVector,
    t: int,
    total: int,
    deo: DeoConfig,
    dimer_state: DimerState,
    opt_state: OptState,
    schedule: LrSchedule,
    batch: BatchKey,
    adam: AdamConfig = AdamConfig(),
) -> Tuple[ParamVector, DimerState, OptState, RunRecord]:
    g, loss = _grad_and_loss(problem, theta, batch, t)
    refreshed = deo.is_refresh_step(t)
    refresh_angle = None
    if refreshed:
        try:
            dimer_state, fresh = rotate_once(problem, theta, g, dimer_state, batch)
        except NumericFailure as err:
            raise NumericFailure(err.where, t) from err
        refresh_angle = fresh.turn_degrees

    direction = dimer_state.direction
    g_mod = project_gradient(g, direction, dimer_state.config.alpha)
    lr = schedule.lr(t, total)
    try:
        new_theta, new_opt = base_update(deo.base, theta, g_mod, lr, opt_state, adam)
    except NumericFailure as err:
        raise NumericFailure(err.where, t) from err

    diag = dimer_state.last_diag
    record = RunRecord(
        step=t,
        lr=lr,
        loss=loss,
        grad_norm=float(np.linalg.norm(g)),
        g_dot_n=dot(g, direction),
        curv_paper=diag.curvature_loss_diff if diag else None,
        curv_grad=diag.curvature_grad if diag else None,
        curv_2nd=diag.curvature_second_order if diag else None,
        dimer_refreshed=int(refreshed),
        grad_evals=t + deo.refreshes_through(t),
        refresh_angle=refresh_angle,
    )
    return new_theta, dimer_state, new_opt, record
