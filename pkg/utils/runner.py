"""Seeded optimization runs, comparison sets, and their CSV / JSON artifacts.

A run produces one RunRecord per step; the CSV holds them with round-trip
float formatting so repeated runs are byte-identical. The JSON summary echoes
the full configuration.
"""
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field, replace
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import (
    BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator, model_validator,
)

from utils.config import get_config
from utils.dimer import DimerConfig, SignConvention, init_dimer_state
from utils.errors import ConfigError, DeoError, NumericFailure
from utils.landscapes import (
    Problem, QuadraticSpec, initial_point, make_monkey_saddle, make_quadratic, make_rosenbrock,
)
from utils.mlp import MlpProblem, MlpShape, init_params, make_mlp_problem
from utils.numeric import ParamVector, RngSeed
from utils.optim import (
    AdamConfig, BaseOptimizer, DeoConfig, LrSchedule, RunRecord, SgdConfig, deo_step, init_opt_state, plain_step,
)
from utils.oracle import MAX_ORACLE_DIM, alignment, oracle_eigenpairs
from utils.validators import (
    OPTIMIZERS, describe_validation_error, first_error, validate_compare_configs, validate_known_keys,
    validate_lr_range, validate_optimizer_name, validate_oracle_dim,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "step", "optimizer", "lr", "loss", "grad_norm", "g_dot_n", "curv_paper", "curv_grad",
    "curv_2nd", "dimer_refreshed", "grad_evals", "align_vmin",
]

SPIKE_FACTOR = 2.0


def _param_count(values: Dict[str, Any]) -> int:
    """Problem dimension implied by (already validated) config values"""
    landscape = values.get("landscape", "quadratic")
    if landscape == "quadratic":
        return len(values.get("lambdas", ()))
    if landscape == "monkey":
        return 2
    if landscape == "rosenbrock":
        return values.get("dim", 2)
    return MlpShape(hidden=values.get("hidden", 16)).param_count


class RunConfig(BaseModel):
    """Everything that determines a run; serialized verbatim into the summary"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    landscape: Literal["quadratic", "monkey", "rosenbrock", "mlp"] = "quadratic"
    optimizer: str = "deo-adam"
    label: Optional[str] = None
    steps: int = Field(1000, ge=1)
    lr_max: float = Field(6e-4, ge=0)
    lr_min: float = Field(0.0, ge=0)
    data_seed: int = Field(0, ge=0, lt=2 ** 64)
    init_seed: int = Field(0, ge=0, lt=2 ** 64)
    dimer_seed: int = Field(0, ge=0, lt=2 ** 64)
    frequency: Optional[int] = Field(10, ge=1)
    alpha: float = Field(5.0, ge=0)
    delta_r: float = Field(6e-3, gt=0)
    eta_rot: float = Field(1e-3, gt=0)
    sign: SignConvention = SignConvention.AS_WRITTEN
    refresh_at_start: bool = False
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.95, ge=0, lt=1)
    epsilon: float = Field(1e-8, gt=0)
    weight_decay: float = Field(0.1, ge=0)
    momentum: float = Field(0.0, ge=0, lt=1)
    lambdas: Tuple[float, ...] = (1.0, -1.0)
    dim: int = Field(2, ge=2, le=500)
    start: Literal["random", "classic"] = "random"
    hidden: int = Field(16, ge=1)
    n_points: int = Field(200, ge=2)
    noise: float = Field(0.1, ge=0)
    batch_size: int = Field(32, ge=1)
    oracle: bool = False
    out: Optional[str] = None

    @model_validator(mode="before")
    @classmethod
    def _resolve_auto_delta_r(cls, data: Any) -> Any:
        # "auto" follows the delta_r ~ 10 * lr rule
        if isinstance(data, dict) and str(data.get("delta_r", "")).strip().lower() == "auto":
            data = dict(data)
            data["delta_r"] = 10.0 * float(data.get("lr_max", 6e-4))
        return data

    @field_validator("optimizer")
    @classmethod
    def _known_optimizer(cls, value: str) -> str:
        if not validate_optimizer_name(value):
            raise ValueError(f"unsupported optimizer '{value}'; choose one of {', '.join(OPTIMIZERS)}")
        return value

    @field_validator("frequency", mode="before")
    @classmethod
    def _infinite_frequency(cls, value: Any) -> Any:
        if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "none", "never"):
            return None
        return value

    @field_validator("lambdas", mode="before")
    @classmethod
    def _split_lambdas(cls, value: Any) -> Any:
        if isinstance(value, str):
            return tuple(float(part) for part in value.split(",") if part.strip())
        return value

    @field_validator("lambdas")
    @classmethod
    def _finite_lambdas(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not value:
            raise ValueError("at least one eigenvalue is required")
        if not all(math.isfinite(x) for x in value):
            raise ValueError("eigenvalues must be finite")
        return value

    @field_validator("lr_min")
    @classmethod
    def _lr_order(cls, value: float, info: ValidationInfo) -> float:
        errors = validate_lr_range(info.data.get("lr_max", value), value)
        if errors:
            raise ValueError(first_error(errors)[1])
        return value

    @field_validator("batch_size")
    @classmethod
    def _batch_fits(cls, value: int, info: ValidationInfo) -> int:
        n_points = info.data.get("n_points")
        if n_points is not None and value > n_points:
            raise ValueError(f"batch_size ({value}) must not exceed n_points ({n_points})")
        return value

    @field_validator("oracle")
    @classmethod
    def _oracle_fits(cls, value: bool, info: ValidationInfo) -> bool:
        if value:
            errors = validate_oracle_dim(_param_count(info.data), MAX_ORACLE_DIM)
            if errors:
                raise ValueError(first_error(errors)[1])
        return value

    @property
    def is_deo(self) -> bool:
        return self.optimizer.startswith("deo-")

    @property
    def base(self) -> BaseOptimizer:
        return BaseOptimizer(self.optimizer.removeprefix("deo-"))

    @property
    def display_name(self) -> str:
        return self.label or self.optimizer

    @property
    def run_id(self) -> str:
        return f"{self.landscape}_{self.display_name}_seed{self.init_seed}"

    def deo_config(self) -> DeoConfig:
        dimer = DimerConfig(self.delta_r, self.eta_rot, self.alpha, self.sign)
        return DeoConfig(self.frequency, dimer, self.base, self.refresh_at_start)

    def adam_config(self) -> AdamConfig:
        wd = self.weight_decay if self.base is BaseOptimizer.ADAMW else 0.0
        return AdamConfig(self.beta1, self.beta2, self.epsilon, wd)

    def schedule(self) -> LrSchedule:
        return LrSchedule(self.lr_max, self.lr_min)


def make_run_config(values: Dict[str, Any]) -> RunConfig:
    """RunConfig from loosely typed values (flags, config files, form widgets)"""
    errors = validate_known_keys(values, RunConfig.model_fields)
    if errors:
        raise ConfigError(*first_error(errors))
    try:
        return RunConfig(**values)
    except ValidationError as err:
        raise ConfigError(*describe_validation_error(err)) from err


class OracleSummary(BaseModel):
    final_eigenvalue_min: float
    final_eigenvalue_max: float
    final_align_vmin: Optional[float] = None
    refresh_checks: int = 0


class RunSummary(BaseModel):
    model_config = ConfigDict(extra="forbid")

    status: Literal["ok", "numeric_failure"]
    failing_step: Optional[int] = None
    optimizer: str
    landscape: str
    steps_completed: int
    initial_loss: float
    final_loss: Optional[float] = None
    final_accuracy: Optional[float] = None
    min_loss: Optional[float] = None
    total_grad_evals: int
    dimer_refreshes: int
    mean_refresh_angle_deg: Optional[float] = None
    max_refresh_angle_deg: Optional[float] = None
    spike_count: int
    max_loss_jump: float
    wall_time_s: float
    oracle: Optional[OracleSummary] = None
    config: Dict[str, Any]


@dataclass
class RunResult:
    config: RunConfig
    records: List[RunRecord]
    summary: RunSummary
    theta: ParamVector = field(repr=False, default=None)

    @property
    def ok(self) -> bool:
        return self.summary.status == "ok"

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 3


def build_problem(cfg: RunConfig) -> Problem:
    if cfg.landscape == "quadratic":
        return make_quadratic(QuadraticSpec(cfg.lambdas))
    if cfg.landscape == "monkey":
        return make_monkey_saddle()
    if cfg.landscape == "rosenbrock":
        return make_rosenbrock(cfg.dim)
    shape = MlpShape(hidden=cfg.hidden)
    return make_mlp_problem(cfg.data_seed, shape, cfg.n_points, cfg.noise, cfg.batch_size)


def initial_theta(cfg: RunConfig, problem: Problem) -> ParamVector:
    seed = RngSeed(cfg.init_seed, "init")
    if cfg.landscape == "mlp":
        return init_params(problem.shape, seed)
    return initial_point(problem, seed, cfg.start)


def _batch_key(cfg: RunConfig, t: int) -> Optional[int]:
    # analytic landscapes are deterministic; the MLP draws minibatch t
    return t if cfg.landscape == "mlp" else None


def _check_alignment(problem: Problem, theta: ParamVector, direction: ParamVector, batch: Optional[int],
                     t: int) -> Optional[float]:
    try:
        pairs = oracle_eigenpairs(problem, theta, batch)
    except DeoError as err:
        logger.warning("skipping oracle alignment at step %d: %s", t, err)
        return None
    if pairs.min_is_degenerate():
        logger.warning("skipping oracle alignment: two smallest eigenvalues within tolerance")
        return None
    return alignment(direction, pairs.v_min)


def _final_oracle(problem: Problem, theta: ParamVector, direction: Optional[ParamVector],
                  checks: int) -> Optional[OracleSummary]:
    try:
        pairs = oracle_eigenpairs(problem, theta)
    except DeoError as err:
        logger.warning("no final oracle summary: %s", err)
        return None
    final_align = None
    if direction is not None and not pairs.min_is_degenerate():
        final_align = alignment(direction, pairs.v_min)
    return OracleSummary(
        final_eigenvalue_min=float(pairs.eigenvalues[0]),
        final_eigenvalue_max=float(pairs.eigenvalues[-1]),
        final_align_vmin=final_align,
        refresh_checks=checks,
    )


def _spikes(losses: Sequence[float]) -> Tuple[int, float]:
    count = 0
    jump = 0.0
    running_min = math.inf
    previous = None
    for loss in losses:
        if loss > SPIKE_FACTOR * running_min:
            count += 1
        if previous is not None:
            jump = max(jump, loss - previous)
        running_min = min(running_min, loss)
        previous = loss
    return count, jump


def run(cfg: RunConfig) -> RunResult:
    """Execute one seeded run; numeric failures end the run early with status numeric_failure"""
    problem = build_problem(cfg)
    theta = initial_theta(cfg, problem)
    deo = cfg.deo_config()
    adam = cfg.adam_config()
    schedule = cfg.schedule()
    opt_state = init_opt_state(cfg.base, problem.dim, SgdConfig(cfg.momentum))
    dimer_state = init_dimer_state(problem.dim, deo.dimer, RngSeed(cfg.dimer_seed, "dimer")) if cfg.is_deo else None

    logger.info("run %s: %s on %s (dim=%d), %d steps", cfg.run_id, cfg.optimizer, problem.name, problem.dim, cfg.steps)
    started = time.perf_counter()
    initial_loss = problem.loss(theta, None)
    records: List[RunRecord] = []
    failing_step = None
    oracle_checks = 0

    for t in range(1, cfg.steps + 1):
        batch = _batch_key(cfg, t)
        try:
            if dimer_state is None:
                theta_next, opt_state, record = plain_step(
                    problem, theta, t, cfg.steps, cfg.base, opt_state, schedule, batch, adam)
            else:
                theta_next, dimer_state, opt_state, record = deo_step(
                    problem, theta, t, cfg.steps, deo, dimer_state, opt_state, schedule, batch, adam)
                if cfg.oracle and record.dimer_refreshed:
                    align = _check_alignment(problem, theta, dimer_state.direction, batch, t)
                    record = replace(record, align_vmin=align)
                    oracle_checks += 1
        except NumericFailure as err:
            failing_step = err.step if err.step is not None else t
            logger.error("run %s: %s", cfg.run_id, err)
            break
        records.append(record)
        theta = theta_next

    status = "ok" if failing_step is None else "numeric_failure"
    final_loss = None
    oracle_summary = None
    if status == "ok":
        try:
            final_loss = problem.loss(theta, None)
        except NumericFailure:
            final_loss = math.nan
        if not math.isfinite(final_loss):
            status, failing_step, final_loss = "numeric_failure", cfg.steps, None
    if status == "ok" and cfg.oracle:
        direction = dimer_state.direction if dimer_state is not None else None
        oracle_summary = _final_oracle(problem, theta, direction, oracle_checks)
    final_accuracy = None
    if status == "ok" and isinstance(problem, MlpProblem):
        final_accuracy = problem.accuracy(theta)

    losses = [r.loss for r in records]
    angles = [r.refresh_angle for r in records if r.refresh_angle is not None]
    spike_count, max_jump = _spikes(losses)
    summary = RunSummary(
        status=status,
        failing_step=failing_step,
        optimizer=cfg.display_name,
        landscape=cfg.landscape,
        steps_completed=len(records),
        initial_loss=initial_loss,
        final_loss=final_loss,
        final_accuracy=final_accuracy,
        min_loss=min(losses) if losses else None,
        total_grad_evals=records[-1].grad_evals if records else 0,
        dimer_refreshes=sum(r.dimer_refreshed for r in records),
        mean_refresh_angle_deg=float(np.mean(angles)) if angles else None,
        max_refresh_angle_deg=max(angles) if angles else None,
        spike_count=spike_count,
        max_loss_jump=max_jump,
        wall_time_s=time.perf_counter() - started,
        oracle=oracle_summary,
        config=cfg.model_dump(mode="json"),
    )
    logger.info(
        "run %s: %s, final loss %s, %d gradient evaluations",
        cfg.run_id, status, final_loss, summary.total_grad_evals,
    )
    return RunResult(cfg, records, summary, theta)


def format_number(value: Union[None, int, float]) -> str:
    """Round-trip decimal text; empty for missing values"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def records_frame(records: Sequence[RunRecord], optimizer: str) -> pd.DataFrame:
    rows = [
        [
            format_number(r.step), optimizer, format_number(r.lr), format_number(r.loss),
            format_number(r.grad_norm), format_number(r.g_dot_n), format_number(r.curv_paper),
            format_number(r.curv_grad), format_number(r.curv_2nd), format_number(r.dimer_refreshed),
            format_number(r.grad_evals), format_number(r.align_vmin),
        ]
        for r in records
    ]
    return pd.DataFrame(rows, columns=CSV_COLUMNS, dtype=str)


def frame_to_csv(frame: pd.DataFrame) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def result_csv(result: RunResult) -> str:
    return frame_to_csv(records_frame(result.records, result.config.display_name))


def summary_json(summary: RunSummary) -> str:
    return json.dumps(summary.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def output_paths(cfg: RunConfig, out_dir: Optional[Union[str, Path]] = None) -> Tuple[Path, Path]:
    if cfg.out:
        csv_path = Path(cfg.out)
    else:
        csv_path = Path(out_dir or get_config("out_dir", "runs")) / f"{cfg.run_id}.csv"
    return csv_path, csv_path.with_suffix(".json")


def write_run(result: RunResult, out_dir: Optional[Union[str, Path]] = None) -> Tuple[Path, Path]:
    csv_path, json_path = output_paths(result.config, out_dir)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(result_csv(result), encoding="utf-8")
    json_path.write_text(summary_json(result.summary), encoding="utf-8")
    return csv_path, json_path


@dataclass
class CompareResult:
    results: List[RunResult]
    frame: pd.DataFrame
    table: pd.DataFrame

    @property
    def exit_code(self) -> int:
        return 0 if all(r.ok for r in self.results) else 3


def _unique_labels(configs: Sequence[RunConfig]) -> List[RunConfig]:
    seen: Dict[str, int] = {}
    labelled = []
    for cfg in configs:
        name = cfg.display_name
        seen[name] = seen.get(name, 0) + 1
        if seen[name] > 1:
            cfg = cfg.model_copy(update={"label": f"{name}#{seen[name]}"})
        labelled.append(cfg)
    return labelled


def compare(configs: Sequence[RunConfig], workers: int = 1) -> CompareResult:
    """Run every member of a comparison set and merge the telemetry in member order"""
    errors = validate_compare_configs(configs)
    if errors:
        raise ConfigError(*first_error(errors))
    configs = _unique_labels(configs)
    if workers > 1 and len(configs) > 1:
        with Pool(processes=min(workers, len(configs))) as pool:
            results = pool.map(run, configs)
    else:
        results = [run(cfg) for cfg in configs]

    frame = pd.concat(
        [records_frame(r.records, r.config.display_name) for r in results], ignore_index=True
    )
    table = pd.DataFrame([
        {
            "optimizer": r.config.display_name,
            "status": r.summary.status,
            "initial_loss": r.summary.initial_loss,
            "final_loss": r.summary.final_loss,
            "min_loss": r.summary.min_loss,
            "grad_evals": r.summary.total_grad_evals,
            "spike_count": r.summary.spike_count,
        }
        for r in results
    ])
    return CompareResult(results, frame, table)


def write_compare(result: CompareResult, csv_path: Union[str, Path]) -> Tuple[Path, Path]:
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(frame_to_csv(result.frame), encoding="utf-8")
    json_path = csv_path.with_suffix(".json")
    payload = {
        "runs": [r.summary.model_dump(mode="json") for r in result.results],
        "table": json.loads(result.table.to_json(orient="records")),
    }
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return csv_path, json_path
