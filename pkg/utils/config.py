import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

from dotenv import dotenv_values, load_dotenv

_CONFIG: Optional[Dict[str, Any]] = None


def load_config(refresh: bool = False) -> Dict[str, Any]:
    """Load application configuration from the environment (and .env)"""
    global _CONFIG
    if _CONFIG is None or refresh:
        load_dotenv()
        debug = os.getenv("DEBUG", "False").lower() == "true"
        _CONFIG = {
            "app_name": "DEO Benchmark Lab",
            "version": "1.0.0",
            "debug": debug,
            "out_dir": os.getenv("DEO_OUT_DIR", "runs"),
            "log_level": os.getenv("DEO_LOG_LEVEL", "DEBUG" if debug else "INFO").upper(),
            "workers": int(os.getenv("DEO_WORKERS", "1")),
            "supported_formats": ["csv", "json"],
        }
    return _CONFIG


def get_config(key: str, default: Any = None) -> Any:
    """Get configuration value"""
    return load_config().get(key, default)


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Flat key=value file; keys are normalized to snake_case"""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    values = dotenv_values(path)
    return {key.strip().replace("-", "_"): (value or "").strip() for key, value in values.items()}
