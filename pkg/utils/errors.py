from typing import Optional


class DeoError(Exception):
    """Base class for every error raised by the benchmark lab"""


class DimensionMismatch(DeoError, ValueError):
    pass


class ZeroVectorError(DeoError, ValueError):
    pass


class NumericFailure(DeoError, ArithmeticError):
    """A NaN or Inf showed up in a loss, gradient or parameter update"""

    def __init__(self, where: str, step: Optional[int] = None):
        self.where = where
        self.step = step
        suffix = f" at step {step}" if step is not None else ""
        super().__init__(f"non-finite value in {where}{suffix}")


class ConvergenceFailure(DeoError, RuntimeError):
    pass


class OracleRefusal(DeoError, ValueError):
    pass


class ConfigError(DeoError, ValueError):
    """Invalid run configuration; `field` names the offending key"""

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")
