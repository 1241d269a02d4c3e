from typing import Any, Dict, Iterable, List, Sequence, Tuple

from pydantic import ValidationError

OPTIMIZERS = ("sgd", "adam", "adamw", "deo-sgd", "deo-adam", "deo-adamw")

# fields every member of a comparison set must agree on
SHARED_FIELDS = (
    "landscape", "steps", "data_seed", "init_seed", "dimer_seed", "batch_size",
    "lambdas", "dim", "start", "hidden", "n_points", "noise",
)


def validate_optimizer_name(name: str) -> bool:
    """Validate optimizer name against the supported set"""
    return name in OPTIMIZERS


def validate_oracle_dim(param_count: int, limit: int) -> Dict[str, str]:
    errors = {}
    if param_count > limit:
        errors["oracle"] = (
            f"the oracle needs a dense {param_count}x{param_count} Hessian; "
            f"only problems with at most {limit} parameters are supported"
        )
    return errors


def validate_known_keys(data: Dict[str, Any], known: Iterable[str]) -> Dict[str, str]:
    """Reject keys that are not RunConfig fields"""
    known = set(known)
    errors = {}
    for key in data:
        if key not in known:
            errors[key] = f"unknown configuration key '{key}'"
    return errors


def validate_lr_range(lr_max: float, lr_min: float) -> Dict[str, str]:
    errors = {}
    if lr_min > lr_max:
        errors["lr_min"] = f"lr_min ({lr_min}) must not exceed lr_max ({lr_max})"
    return errors


def validate_compare_configs(configs: Sequence[Any]) -> Dict[str, str]:
    """Validate that a comparison set shares everything except optimizer settings"""
    errors = {}
    if not configs:
        errors["configs"] = "a comparison needs at least one run configuration"
        return errors

    first = configs[0]
    for field in SHARED_FIELDS:
        values = [getattr(c, field) for c in configs]
        if any(v != values[0] for v in values[1:]):
            errors[field] = f"all compared runs must share {field}; got {values}"
    if first.out is not None and len(configs) > 1:
        errors["out"] = "per-run output paths are not allowed in a comparison"
    return errors


def first_error(errors: Dict[str, str]) -> Tuple[str, str]:
    field = next(iter(errors))
    return field, errors[field]


def describe_validation_error(err: ValidationError) -> Tuple[str, str]:
    """(field, message) for the first problem pydantic reported"""
    detail = err.errors()[0]
    loc: List[str] = [str(part) for part in detail.get("loc", ()) if part != "__root__"]
    field = ".".join(loc) if loc else "config"
    message = detail.get("msg", "invalid value")
    if message.startswith("Value error, "):
        message = message[len("Value error, "):]
    return field, message
