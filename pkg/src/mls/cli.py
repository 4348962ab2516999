"""Command-line interface: ``mls <subcommand> [--config PATH | --preset NAME] ...``.

Exit codes: 0 success, 1 invalid configuration, 2 runtime failure.
Environment variables ``MLS_SEED``, ``MLS_OUT``, ``MLS_REPLICATIONS`` and
``MLS_THREADS`` override the config; explicit flags override both.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .experiment import (
    MAX_SEED,
    ConfigError,
    Context,
    ExperimentConfig,
    RunFailed,
    emit_plot_data,
    list_presets,
    preset,
    run_experiment,
    validate_config,
    write_results,
)
from .density import evaluate_field, sup_error
from .samplers import sample_law
from .setops import boundary_of, distance_in_measure, hausdorff, level_set, stereographic

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
ENV_PREFIX = "MLS_"

log = logging.getLogger("mls")


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mls", description="Level-set estimation on manifolds: simulations.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, runs: bool = True):
        src = p.add_mutually_exclusive_group()
        src.add_argument("--config", type=Path, help="JSON experiment config")
        src.add_argument("--preset", help="name of a shipped preset (see `mls presets`)")
        if runs:
            p.add_argument("--seed", type=_seed, help="base seed (unsigned 64-bit)")
            p.add_argument("--out", type=Path, help="output directory")
            p.add_argument("--replications", type=_positive)
            p.add_argument("--threads", type=_positive, help="worker threads")
        return p

    common(sub.add_parser("sample", help="draw replication 0's sample and write sample.csv"))
    common(sub.add_parser("estimate", help="write the estimated and true density fields"))
    common(sub.add_parser("levelset", help="write true and estimated level-set indices"))
    common(sub.add_parser("distance", help="print d_H, d_mu and sup_error for replication 0"))
    common(sub.add_parser("hull", help="write the r-convex hull of the filtered sample"))
    common(sub.add_parser("experiment", help="run every replication and emit results and plot data"))
    sub.add_parser("presets", help="list shipped presets")
    val = common(sub.add_parser("validate", help="check a config and list every problem"), runs=False)
    val.add_argument("path", nargs="?", type=Path, help="config file (same as --config)")
    return parser


def _env_overrides(env) -> dict:
    out = {}
    for key, conv in (("SEED", _seed), ("REPLICATIONS", _positive), ("THREADS", _positive), ("OUT", Path)):
        raw = env.get(ENV_PREFIX + key)
        if raw:
            try:
                out[key.lower()] = conv(raw)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ConfigError([(ENV_PREFIX + key, str(exc))]) from exc
    return out


def _raw_config(args) -> dict:
    if args.preset:
        try:
            return preset(args.preset)
        except KeyError as exc:
            raise ConfigError([("preset", exc.args[0])]) from exc
    path = getattr(args, "config", None) or getattr(args, "path", None)
    if path is None:
        raise ConfigError([("config", "pass --config PATH or --preset NAME")])
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError([("config", f"cannot read {path}: {exc.strerror}")]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([("config", f"{path}: invalid JSON: {exc}")]) from exc
    return data


def _resolve(args, env) -> tuple[ExperimentConfig, Path, int]:
    data = _raw_config(args)
    over = _env_overrides(env)
    for key in ("seed", "replications", "threads", "out"):
        val = getattr(args, key, None)
        if val is not None:
            over[key] = val
    if "seed" in over:
        data["seed"] = over["seed"]
    if "replications" in over:
        data["replications"] = over["replications"]
    cfg = ExperimentConfig.from_dict(data)
    out = over.get("out") or Path(cfg.output or Path("results") / cfg.name)
    return cfg, Path(out), int(over.get("threads", 1))


def _print_diagnostics(diags, stream) -> None:
    for path, msg in diags:
        print(f"{path}: {msg}", file=stream)


def _replication0(cfg: ExperimentConfig):
    ctx = Context(cfg)
    sample = sample_law(cfg.law, cfg.n, cfg.replication_seed(0), cfg.spec)
    h = ctx.bandwidth(sample)
    est = evaluate_field(sample, h, ctx.grid, cfg.spec, corrected=cfg.corrected, measure=cfg.measure)
    return ctx, sample, h, est


def _cmd_sample(cfg, out, threads, stdout):
    sample = sample_law(cfg.law, cfg.n, cfg.replication_seed(0), cfg.spec)
    out.mkdir(parents=True, exist_ok=True)
    proj = stereographic(sample.points, cfg.projection["pole"]) if cfg.projection else None
    sample.to_csv(out / "sample.csv", projected=proj)
    print(out / "sample.csv", file=stdout)


def _cmd_estimate(cfg, out, threads, stdout):
    ctx, _, _, est = _replication0(cfg)
    out.mkdir(parents=True, exist_ok=True)
    ctx.grid.to_csv(out / "grid.csv")
    est.to_csv(out / "estimate.csv")
    ctx.truth.to_csv(out / "truth.csv")
    for name in ("grid.csv", "estimate.csv", "truth.csv"):
        print(out / name, file=stdout)


def _cmd_levelset(cfg, out, threads, stdout):
    ctx, _, _, est = _replication0(cfg)
    out.mkdir(parents=True, exist_ok=True)
    ctx.grid.to_csv(out / "grid.csv")
    ctx.true_set.to_csv(out / "true_levelset.csv")
    level_set(est, cfg.level).to_csv(out / "estimated_levelset.csv")
    for name in ("grid.csv", "true_levelset.csv", "estimated_levelset.csv"):
        print(out / name, file=stdout)


def _cmd_distance(cfg, out, threads, stdout):
    ctx, _, _, est = _replication0(cfg)
    est_set = level_set(est, cfg.level)
    a, b = ctx.true_set, est_set
    if cfg.distance == "boundaries":
        a, b = boundary_of(a), boundary_of(b)
    report = {
        "d_H_regions" if cfg.distance != "boundaries" else "d_H_boundaries": hausdorff(
            ctx.point_set(a), ctx.point_set(b), ctx.graph
        ),
        "d_mu": distance_in_measure(ctx.true_set, est_set),
        "sup_error": sup_error(est, ctx.truth),
    }
    print(json.dumps(report, sort_keys=True), file=stdout)


def _cmd_hull(cfg, out, threads, stdout):
    if cfg.hull_radius is None:
        raise ConfigError([("hull_radius", "required by the hull command")])
    ctx, sample, h, _ = _replication0(cfg)
    hull = ctx.hull(sample, h)
    out.mkdir(parents=True, exist_ok=True)
    ctx.grid.to_csv(out / "grid.csv")
    hull.to_csv(out / "hull.csv")
    print(out / "hull.csv", file=stdout)


def _cmd_experiment(cfg, out, threads, stdout):
    result = run_experiment(cfg, threads=threads)
    paths = write_results(result, out) + emit_plot_data(result, out)
    agg = result.aggregate()
    print(
        f"{cfg.name}: {len(result.rows)} replications, {result.failed} failed, "
        f"mean d_H {agg['d_H']['mean']:.4f} (sd {agg['d_H']['std']:.4f})",
        file=stdout,
    )
    for p in paths:
        print(p, file=stdout)


COMMANDS = {
    "sample": _cmd_sample,
    "estimate": _cmd_estimate,
    "levelset": _cmd_levelset,
    "distance": _cmd_distance,
    "hull": _cmd_hull,
    "experiment": _cmd_experiment,
}


def main(argv=None, env=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    env = os.environ if env is None else env
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=stderr)

    if args.command == "presets":
        for name, desc in list_presets():
            print(f"{name}\t{desc}", file=stdout)
        return EXIT_OK
    if args.command == "validate":
        try:
            data = _raw_config(args)
        except ConfigError as exc:
            _print_diagnostics(exc.diagnostics, stderr)
            return EXIT_INVALID
        diags = validate_config(data)
        if diags:
            _print_diagnostics(diags, stderr)
            return EXIT_INVALID
        print("ok", file=stdout)
        return EXIT_OK

    try:
        cfg, out, threads = _resolve(args, env)
    except ConfigError as exc:
        _print_diagnostics(exc.diagnostics, stderr)
        return EXIT_INVALID
    try:
        COMMANDS[args.command](cfg, out, threads, stdout)
    except ConfigError as exc:
        _print_diagnostics(exc.diagnostics, stderr)
        return EXIT_INVALID
    except (RunFailed, OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
