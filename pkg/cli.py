"""Command-line experiment runner.

    python cli.py run --landscape quadratic --opt deo-adam --steps 1000 --seed 42
    python cli.py compare --landscape mlp --opts adam,deo-adam --steps 2000
    python cli.py dump-data --seed 3 --out moons.csv

Exit codes: 0 ok, 2 configuration error, 3 numeric failure.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from utils.config import get_config, load_config, read_config_file
from utils.errors import ConfigError
from utils.mlp import make_moons, save_dataset_csv
from utils.numeric import RngSeed
from utils.runner import (
    RunConfig, compare, make_run_config, run, summary_json, write_compare, write_run,
)
from utils.validators import first_error, validate_known_keys

logger = logging.getLogger("cli")

SEED_FIELDS = ("data_seed", "init_seed", "dimer_seed")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("arguments", message)


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    s = argparse.SUPPRESS
    parser.add_argument("--config", default=None, help="flat key=value config file")
    parser.add_argument("--landscape", default=s, help="quadratic | monkey | rosenbrock | mlp")
    parser.add_argument("--opt", "--optimizer", dest="optimizer", default=s,
                        help="sgd | adam | adamw | deo-sgd | deo-adam | deo-adamw")
    parser.add_argument("--label", default=s)
    parser.add_argument("--steps", default=s)
    parser.add_argument("--lr", "--lr-max", dest="lr_max", default=s)
    parser.add_argument("--lr-min", dest="lr_min", default=s)
    parser.add_argument("--seed", default=s, help="sets data, init and dimer seeds")
    parser.add_argument("--data-seed", dest="data_seed", default=s)
    parser.add_argument("--init-seed", dest="init_seed", default=s)
    parser.add_argument("--dimer-seed", dest="dimer_seed", default=s)
    parser.add_argument("--f", "--frequency", dest="frequency", default=s, help="dimer refresh period, or inf")
    parser.add_argument("--alpha", default=s)
    parser.add_argument("--delta-r", dest="delta_r", default=s, help="dimer displacement, or auto (10 x lr)")
    parser.add_argument("--eta-rot", dest="eta_rot", default=s)
    parser.add_argument("--sign", default=s, help="as-written | force")
    parser.add_argument("--refresh-at-start", dest="refresh_at_start", action="store_const", const=True, default=s)
    parser.add_argument("--beta1", default=s)
    parser.add_argument("--beta2", default=s)
    parser.add_argument("--eps", dest="epsilon", default=s)
    parser.add_argument("--weight-decay", dest="weight_decay", default=s)
    parser.add_argument("--momentum", default=s)
    parser.add_argument("--lambdas", default=s, help="quadratic eigenvalues, comma separated")
    parser.add_argument("--dim", default=s, help="rosenbrock dimension")
    parser.add_argument("--start", default=s, help="random | classic")
    parser.add_argument("--hidden", default=s)
    parser.add_argument("--n-points", dest="n_points", default=s)
    parser.add_argument("--noise", default=s)
    parser.add_argument("--batch-size", dest="batch_size", default=s)
    parser.add_argument("--oracle", action="store_const", const=True, default=s)
    parser.add_argument("--out", default=s)
    parser.add_argument("--log-level", dest="log_level", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cli.py", description="Dimer-enhanced optimization benchmarks")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _add_run_flags(sub.add_parser("run", help="execute one seeded run"))

    cmp = sub.add_parser("compare", help="run optimizers side by side on shared seeds")
    _add_run_flags(cmp)
    cmp.add_argument("--opts", default=None, help="comma-separated optimizers, one member each")
    cmp.add_argument("--member", action="append", default=[], help="key=value[,key=value] overrides for one member")
    cmp.add_argument("--workers", type=int, default=None)

    dump = sub.add_parser("dump-data", help="write the two-moons dataset as CSV")
    dump.add_argument("--seed", "--data-seed", dest="data_seed", type=int, default=0)
    dump.add_argument("--n-points", dest="n_points", type=int, default=200)
    dump.add_argument("--noise", type=float, default=0.1)
    dump.add_argument("--out", required=True)
    dump.add_argument("--log-level", dest="log_level", default=None)
    return parser


def _expand_seed(layer: Dict[str, Any]) -> Dict[str, Any]:
    layer = dict(layer)
    if "seed" in layer:
        seed = layer.pop("seed")
        for key in SEED_FIELDS:
            layer.setdefault(key, seed)
    return layer


def _layered_values(args: argparse.Namespace) -> Dict[str, Any]:
    """Defaults < config file < command-line flags"""
    flags = {k: v for k, v in vars(args).items()
             if k not in ("command", "config", "log_level", "opts", "member", "workers")}
    merged: Dict[str, Any] = {}
    if args.config:
        try:
            file_values = read_config_file(args.config)
        except FileNotFoundError as err:
            raise ConfigError("config", str(err)) from err
        errors = validate_known_keys(file_values, set(RunConfig.model_fields) | {"seed"})
        if errors:
            raise ConfigError(*first_error(errors))
        merged.update(_expand_seed(file_values))
    merged.update(_expand_seed(flags))
    return merged


def parse_config(argv: Sequence[str]) -> RunConfig:
    """RunConfig for `run` from command-line arguments (and an optional --config file)"""
    args = build_parser().parse_args(["run", *argv])
    return make_run_config(_layered_values(args))


def _parse_member(spec: str) -> Dict[str, str]:
    member = {}
    for part in spec.split(";" if ";" in spec else ","):
        if not part.strip():
            continue
        if "=" not in part:
            raise ConfigError("member", f"expected key=value, got '{part}'")
        key, value = part.split("=", 1)
        key = key.strip().replace("-", "_")
        if key == "opt":
            key = "optimizer"
        member[key] = value.strip()
    return member


def parse_compare(argv: Sequence[str]) -> List[RunConfig]:
    args = build_parser().parse_args(["compare", *argv])
    shared = _layered_values(args)
    shared.pop("out", None)
    members: List[Dict[str, Any]] = []
    if args.opts:
        members.extend({"optimizer": name.strip()} for name in args.opts.split(",") if name.strip())
    members.extend(_parse_member(spec) for spec in args.member)
    return [make_run_config({**shared, **member}) for member in members]


def _setup_logging(level: Optional[str]) -> None:
    logging.basicConfig(
        level=(level or get_config("log_level", "INFO")).upper(),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _run_command(argv: Sequence[str]) -> int:
    cfg = parse_config(argv)
    result = run(cfg)
    csv_path, json_path = write_run(result)
    logger.info("wrote %s and %s", csv_path, json_path)
    sys.stdout.write(summary_json(result.summary))
    return result.exit_code


def _compare_command(argv: Sequence[str]) -> int:
    args = build_parser().parse_args(["compare", *argv])
    configs = parse_compare(argv)
    workers = args.workers or get_config("workers", 1)
    result = compare(configs, workers)
    out = getattr(args, "out", None)
    if out is None:
        first = configs[0] if configs else None
        out = Path(get_config("out_dir", "runs")) / f"compare_{first.landscape}_seed{first.init_seed}.csv"
    csv_path, json_path = write_compare(result, out)
    logger.info("wrote %s and %s", csv_path, json_path)
    sys.stdout.write(result.table.to_string(index=False) + "\n")
    return result.exit_code


def _dump_command(argv: Sequence[str]) -> int:
    args = build_parser().parse_args(["dump-data", *argv])
    if args.n_points < 2:
        raise ConfigError("n_points", "must be at least 2")
    dataset = make_moons(args.n_points, args.noise, RngSeed(args.data_seed, "data"))
    save_dataset_csv(dataset, args.out)
    logger.info("wrote %d points to %s", dataset.size, args.out)
    return 0


COMMANDS = {"run": _run_command, "compare": _compare_command, "dump-data": _dump_command}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    load_config()
    try:
        args, _ = build_parser().parse_known_args(argv)
        _setup_logging(getattr(args, "log_level", None))
        return COMMANDS[args.command](argv[1:])
    except ConfigError as err:
        sys.stderr.write(f"error: {err.field}: {err.message}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
