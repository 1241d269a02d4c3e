from pydantic import BaseModel, Field, ValidationError

from utils.config import get_config, load_config, read_config_file
from utils.validators import (
    OPTIMIZERS, describe_validation_error, first_error, validate_compare_configs, validate_known_keys,
    validate_lr_range, validate_optimizer_name,
)
from utils.runner import RunConfig


def test_load_config_reads_environment(monkeypatch):
    monkeypatch.setenv("DEO_OUT_DIR", "elsewhere")
    monkeypatch.setenv("DEO_WORKERS", "4")
    monkeypatch.setenv("DEO_LOG_LEVEL", "warning")
    try:
        config = load_config(refresh=True)
        assert config["out_dir"] == "elsewhere"
        assert get_config("workers") == 4
        assert get_config("log_level") == "WARNING"
        assert get_config("missing", "fallback") == "fallback"
    finally:
        monkeypatch.undo()
        load_config(refresh=True)


def test_read_config_file_normalizes_keys(tmp_path):
    path = tmp_path / "deo.conf"
    path.write_text("# comment\nlr-max=1e-3\nsign = force\nlambdas=1,-1\n")
    assert read_config_file(path) == {"lr_max": "1e-3", "sign": "force", "lambdas": "1,-1"}


def test_optimizer_names():
    assert all(validate_optimizer_name(name) for name in OPTIMIZERS)
    assert not validate_optimizer_name("sophia")


def test_dict_of_errors_helpers():
    assert validate_known_keys({"steps": 1}, ["steps"]) == {}
    errors = validate_known_keys({"steps": 1, "nope": 2}, ["steps"])
    assert first_error(errors) == ("nope", "unknown configuration key 'nope'")
    assert validate_lr_range(1e-3, 0.0) == {}
    assert "lr_min" in validate_lr_range(1e-3, 1e-2)


def test_compare_validation():
    assert "configs" in validate_compare_configs([])
    same = [RunConfig(optimizer="adam"), RunConfig(optimizer="deo-adam", alpha=0.0)]
    assert validate_compare_configs(same) == {}
    assert "init_seed" in validate_compare_configs([RunConfig(), RunConfig(init_seed=1)])
    assert "out" in validate_compare_configs([RunConfig(out="a.csv"), RunConfig()])


def test_describe_validation_error():
    class Model(BaseModel):
        alpha: float = Field(ge=0)

    try:
        Model(alpha=-1)
    except ValidationError as err:
        field, message = describe_validation_error(err)
    assert field == "alpha"
    assert "greater than or equal to 0" in message
