"""
Command-line interface.

    sextic-pinn train --problem example1 --seed 42 --output-dir runs/ex1
    sextic-pinn evaluate runs/ex1/model.ckpt --problem example1
    sextic-pinn gradcheck --problem example2 --seed 3
    sextic-pinn list-problems

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import loss, network, problem, report
from .loss import CombineMode, collocation_grid
from .network import InitScheme, NetworkConfig
from .optim import OptimizerConfig, OptimizerKind
from .taylor import ActivationKind
from .trainer import TrainConfig, TrainingDiverged, train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2

GRADCHECK_TOL = 1e-5
THREADS_ENV = "SEXTIC_PINN_THREADS"

CONFIG_KEYS = (
    "problem", "hidden_sizes", "activation", "init_scheme", "optimizer", "learning_rate",
    "epochs", "grid_points", "combine_mode", "stop_epsilon", "seed", "output_dir",
)
DEFAULTS = {
    "problem": "example1",
    "hidden_sizes": [16],
    "activation": "tanh",
    "init_scheme": "glorot_normal",
    "optimizer": "adamax",
    "learning_rate": 1e-3,
    "epochs": 13000,
    "grid_points": 21,
    "combine_mode": "sum",
    "stop_epsilon": None,
    "seed": 42,
    "output_dir": ".",
}


class ConfigError(ValueError):
    pass


def _threads() -> int:
    # everything is vectorized and serial; the variable is validated only
    raw = os.environ.get(THREADS_ENV, "0") or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a non-negative integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError(f"{THREADS_ENV} must be a non-negative integer, got {raw!r}")
    return n


def load_config_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return data


def effective_settings(args: argparse.Namespace) -> dict:
    """Defaults, overridden by the config file, overridden by flags."""
    settings = dict(DEFAULTS)
    if args.config:
        settings.update(load_config_file(args.config))
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def build_train_config(settings: dict, log_every: int = 100) -> TrainConfig:
    try:
        name = settings["problem"]
        problem.builtin(name)
        net = NetworkConfig(
            hidden_sizes=tuple(settings["hidden_sizes"]),
            hidden_activation=ActivationKind(settings["activation"]),
            init_scheme=InitScheme(settings["init_scheme"]),
            seed=int(settings["seed"]),
        )
        if not net.hidden_activation.differentiable:
            raise ConfigError(f"activation {net.hidden_activation.value} cannot be used in hidden layers")
        opt = OptimizerConfig(kind=OptimizerKind(settings["optimizer"]),
                              learning_rate=float(settings["learning_rate"]))
        eps = settings["stop_epsilon"]
        return TrainConfig(
            problem_name=name,
            network=net,
            optimizer=opt,
            epochs=int(settings["epochs"]),
            grid_points=int(settings["grid_points"]),
            combine_mode=CombineMode(settings["combine_mode"]),
            stop_epsilon=None if eps is None else float(eps),
            log_every=log_every,
            seed=int(settings["seed"]),
        )
    except problem.UnknownProblemError as exc:
        raise ConfigError(exc.args[0]) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _print_breakdown(bd, out) -> None:
    print(f"final loss: interior={bd.interior:.10e} boundary={bd.boundary:.10e} "
          f"total={bd.total:.10e} ({bd.mode.value})", file=out)


def cmd_train(args, out=sys.stdout) -> int:
    settings = effective_settings(args)
    config = build_train_config(settings, args.log_every)
    print("effective configuration:", file=out)
    print(json.dumps(settings, indent=2, sort_keys=True), file=out)

    outdir = Path(settings["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    prob = problem.builtin(config.problem_name)

    def progress(rec):
        if args.verbose:
            print(f"epoch {rec.epoch:6d}  L_d={rec.interior:.6e}  L_bc={rec.boundary:.6e}  "
                  f"L={rec.total:.6e}", file=out)

    try:
        params, history = train(config, prob, callback=progress)
    except TrainingDiverged as exc:
        network.save_checkpoint(exc.last_good, outdir / "model.ckpt")
        print(f"error: {exc}; last good parameters saved to {outdir / 'model.ckpt'}", file=sys.stderr)
        return EXIT_NUMERIC

    network.save_checkpoint(params, outdir / "model.ckpt")
    report.write_history_csv(history, outdir / "history.csv")
    table = report.build_table(params, prob)
    report.write_table_csv(table, outdir / "table.csv")

    points = collocation_grid(*prob.domain, config.grid_points)
    _print_breakdown(loss.total_loss(params, prob, points, config.combine_mode), out)
    print(table.format(), file=out)
    print(f"max abs error: {table.max_abs_error:.8e}", file=out)
    print(f"wrote {outdir / 'model.ckpt'}, {outdir / 'history.csv'}, {outdir / 'table.csv'}", file=out)
    return EXIT_OK


def cmd_evaluate(args, out=sys.stdout) -> int:
    try:
        params = network.load_checkpoint(args.checkpoint)
    except (OSError, ValueError) as exc:
        print(f"error: cannot load checkpoint: {exc}", file=sys.stderr)
        return EXIT_NUMERIC if isinstance(exc, ValueError) else EXIT_USAGE
    try:
        prob = problem.builtin(args.problem)
        grid = report.table_grid(args.grid_size, prob.domain)
    except (problem.UnknownProblemError, ValueError) as exc:
        raise ConfigError(exc.args[0]) from None
    table = report.build_table(params, prob, grid)
    print(table.format(), file=out)
    if args.output:
        report.write_table_csv(table, args.output)
        print(f"wrote {args.output}", file=out)
    return EXIT_OK


def cmd_gradcheck(args, out=sys.stdout) -> int:
    try:
        prob = problem.builtin(args.problem)
    except problem.UnknownProblemError as exc:
        raise ConfigError(exc.args[0]) from None
    params = network.init(NetworkConfig(hidden_sizes=tuple(args.hidden_sizes), seed=args.seed))
    rng = np.random.default_rng(args.seed)
    xs = np.sort(rng.uniform(*prob.domain, size=10))
    deriv_err = report.fd_check_derivatives(params, xs, 6)
    points = collocation_grid(*prob.domain, args.grid_points)
    failed = False
    for k, e in enumerate(deriv_err, start=1):
        flag = "ok" if e <= GRADCHECK_TOL else "FAIL"
        failed |= e > GRADCHECK_TOL
        print(f"derivative order {k}: worst relative error {e:.3e}  {flag}", file=out)
    for mode in CombineMode:
        e = report.fd_check_gradient(params, prob, points, mode, rel_tol=GRADCHECK_TOL,
                                     rel_step=1e-4, stencil=4)
        flag = "ok" if e <= GRADCHECK_TOL else "FAIL"
        failed |= e > GRADCHECK_TOL
        print(f"loss gradient ({mode.value}): worst relative error {e:.3e}  {flag}", file=out)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_list_problems(args, out=sys.stdout) -> int:
    for name in problem.builtin_names():
        print(f"{name}: {problem.builtin(name).description}", file=out)
    return EXIT_OK


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sextic-pinn",
                                     description="Neural solver for sixth-order boundary value problems")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a network and write checkpoint, history and table")
    p.add_argument("--config", help="JSON file with training settings (flags override it)")
    p.add_argument("--problem")
    p.add_argument("--hidden-sizes", dest="hidden_sizes", type=_csv_ints, help="e.g. 16 or 16,16")
    p.add_argument("--activation", choices=[k.value for k in ActivationKind])
    p.add_argument("--init-scheme", dest="init_scheme", choices=[s.value for s in InitScheme])
    p.add_argument("--optimizer", choices=[k.value for k in OptimizerKind])
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--grid-points", dest="grid_points", type=int)
    p.add_argument("--combine-mode", dest="combine_mode", choices=[m.value for m in CombineMode])
    p.add_argument("--stop-epsilon", dest="stop_epsilon", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--log-every", dest="log_every", type=int, default=100)
    p.add_argument("-v", "--verbose", action="store_true", help="print every logged epoch")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="tabulate a checkpoint against the exact solution")
    p.add_argument("checkpoint")
    p.add_argument("--problem", required=True)
    p.add_argument("--grid-size", dest="grid_size", type=int, default=11)
    p.add_argument("--output", help="also write the table as CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gradcheck", help="finite-difference check of derivatives and loss gradient")
    p.add_argument("--problem", default="example1")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--hidden-sizes", dest="hidden_sizes", type=_csv_ints, default=[16])
    p.add_argument("--grid-points", dest="grid_points", type=int, default=21)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("list-problems", help="list built-in problems")
    p.set_defaults(func=cmd_list_problems)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        _threads()
        return args.func(args, out=sys.stdout)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except report.ReportIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
