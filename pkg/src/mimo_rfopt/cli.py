"""Command-line experiment runner.

Reproduces the four benchmark experiments as CSV files and offers two
single-shot commands for interactive inspection. All outputs are
deterministic given the seed: re-running the same invocation (with any
worker count) produces byte-identical files.
"""

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass

from .analytic import continuous_optimum_x, optimal_chains_equal
from .channel import derive_seed, dump_channel, generate_channel
from .config import (ConfigError, SystemConfig, read_config_file,
                     transmit_budget, validate_config)
from .joint import EARLY_STOP, EXHAUSTIVE, optimize
from .kkt import BracketFailureError
from .montecarlo import (CHAIN_COUNT, SUM_RATE, EqualPowerStrategy,
                         JointStrategy, KktStrategy, SweepResult,
                         TrialFailureError, sweep)
from ._version import __version__

SEED_ENV_VAR = "MIMO_RFOPT_SEED"

_DEFAULT_CONFIG = SystemConfig(n_antennas=256, n_users=10, p_max=10.0,
                               p_c=0.05)

_EPILOG = """\
experiments and their CSV columns:
  fig1    equal-power sum-rate vs chain count S (step 2):
            S, analytic_rate, mc_rate, mc_ci95
  fig2    optimal chain count vs p_max in [1, 20]:
            p_max, s_star, mc_s_opt, mc_ci95
          (s_star: closed form under equal power; mc_s_opt: mean chain
           count picked by the joint optimizer)
  fig3    sum-rate of the water-filled allocation vs chain count S:
            S, mc_rate, mc_ci95
  fig4    sum-rate vs number of users K in [2, 100] at S=64:
            K, analytic_rate, mc_rate_equal, mc_ci95_equal,
            mc_rate_kkt, mc_ci95_kkt
  solve   joint optimum on a single realization (text or --json)
  s-star  closed-form equal-power chain optimum (text or --json)

config file: plain text, one "key = value" per line, keys n_antennas,
n_users, p_max, p_c; '#' starts a comment. CLI flags override the file.

channel dump (--dump-channel, solve only): one row per user, entries
re+imj (e.g. 0.5-0.25j) separated by single spaces, full precision.

seed resolution: --seed, else the MIMO_RFOPT_SEED environment variable,
else 0. exit codes: 0 success, 1 solver failure, 2 usage/validation error.
"""

EXPERIMENTS = ("fig1", "fig2", "fig3", "fig4", "solve", "s-star")


@dataclass(frozen=True)
class ExperimentSpec:
    """Fully resolved description of one CLI run."""

    experiment: str
    cfg: SystemConfig
    n_trials: int
    master_seed: int
    workers: int
    out: str | None
    json_mirror: bool
    mode: str
    freeze_antennas: bool
    dump_channel_path: str | None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimo-rfopt",
        description=__doc__,
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    parser.add_argument("--config", metavar="PATH",
                        help="key-value scenario file (flags override it)")
    parser.add_argument("--n-antennas", type=int, default=None)
    parser.add_argument("--n-users", type=int, default=None)
    parser.add_argument("--p-max", type=float, default=None,
                        help="total power budget (default 10)")
    parser.add_argument("--p-c", type=float, default=None,
                        help="circuit power per RF chain (default 0.05)")
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=None,
                        help=f"master seed (fallback: ${SEED_ENV_VAR}, then 0)")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", metavar="PATH",
                        help="output CSV path (default <experiment>.csv)")
    parser.add_argument("--json", action="store_true", dest="json_mirror",
                        help="also write a JSON mirror next to the CSV "
                             "(solve/s-star: print JSON instead of text)")
    parser.add_argument("--mode", choices=(EARLY_STOP, EXHAUSTIVE),
                        default=EXHAUSTIVE,
                        help="joint-optimizer stopping rule (early-stop is "
                             "the greedy first-decrease break; it is noise-"
                             "fragile per realization and kept for study)")
    parser.add_argument("--freeze-antennas", action="store_true",
                        help="reuse one antenna subset for all trials")
    parser.add_argument("--dump-channel", metavar="PATH",
                        help="solve only: write the realization as text")
    parser.add_argument("--version", action="version", version=__version__)
    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"${SEED_ENV_VAR}={env!r} is not an integer") from exc
    return 0


def _resolve_config(args) -> SystemConfig:
    values = {
        "n_antennas": _DEFAULT_CONFIG.n_antennas,
        "n_users": _DEFAULT_CONFIG.n_users,
        "p_max": _DEFAULT_CONFIG.p_max,
        "p_c": _DEFAULT_CONFIG.p_c,
    }
    if args.config:
        values.update(read_config_file(args.config))
    overrides = {
        "n_antennas": args.n_antennas,
        "n_users": args.n_users,
        "p_max": args.p_max,
        "p_c": args.p_c,
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    return validate_config(SystemConfig(**values))


def make_spec(args) -> ExperimentSpec:
    if args.trials < 2:
        raise ConfigError("--trials must be at least 2")
    if args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    return ExperimentSpec(
        experiment=args.experiment,
        cfg=_resolve_config(args),
        n_trials=args.trials,
        master_seed=_resolve_seed(args),
        workers=args.workers,
        out=args.out,
        json_mirror=args.json_mirror,
        mode=args.mode,
        freeze_antennas=args.freeze_antennas,
        dump_channel_path=args.dump_channel,
    )


def _fmt(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    if isinstance(value, int):
        return str(value)
    return f"{value:.17g}"


def _write_csv(path: str, header: list, rows: list) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _json_path(csv_path: str) -> str:
    stem, _ = os.path.splitext(csv_path)
    return stem + ".json"


def _write_json(path: str, spec: ExperimentSpec, header: list,
                rows: list, errors: list) -> None:
    def clean(v):
        if isinstance(v, float) and math.isnan(v):
            return None
        return v
    payload = {
        "experiment": spec.experiment,
        "config": asdict(spec.cfg),
        "n_trials": spec.n_trials,
        "master_seed": spec.master_seed,
        "columns": header,
        "rows": [dict(zip(header, (clean(v) for v in row))) for row in rows],
        "errors": errors,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _sweep_grid_s(spec: ExperimentSpec) -> list:
    from .config import chain_bounds
    lo, hi = chain_bounds(spec.cfg)
    return list(range(lo, hi + 1, 2))


def _row_stats(row: SweepResult) -> tuple:
    if row.error is not None:
        return math.nan, math.nan
    return row.mc_mean, row.mc_half_width_95


def _report_errors(name: str, rows: list) -> list:
    errors = []
    for row in rows:
        if row.error is not None:
            errors.append({"x_value": row.x_value, "error": row.error})
            _note(f"[{name}] grid point {row.x_value:g} failed: {row.error}")
    return errors


def _run_fig1(spec: ExperimentSpec) -> tuple[list, list, list]:
    grid = _sweep_grid_s(spec)
    rows = sweep(spec.cfg, "S", grid, EqualPowerStrategy(s=grid[0]),
                 spec.n_trials, spec.master_seed, workers=spec.workers,
                 freeze_antennas=spec.freeze_antennas, metric=SUM_RATE)
    header = ["S", "analytic_rate", "mc_rate", "mc_ci95"]
    table = [[int(r.x_value), r.analytic, *_row_stats(r)] for r in rows]
    return header, table, _report_errors("fig1", rows)


def _run_fig2(spec: ExperimentSpec) -> tuple[list, list, list]:
    grid = list(range(1, 21))
    rows = sweep(spec.cfg, "p_max", grid, JointStrategy(mode=spec.mode),
                 spec.n_trials, spec.master_seed, workers=spec.workers,
                 freeze_antennas=spec.freeze_antennas, metric=CHAIN_COUNT)
    header = ["p_max", "s_star", "mc_s_opt", "mc_ci95"]
    table = []
    for r in rows:
        s_star = None if r.analytic is None else int(r.analytic)
        table.append([int(r.x_value), s_star, *_row_stats(r)])
    return header, table, _report_errors("fig2", rows)


def _run_fig3(spec: ExperimentSpec) -> tuple[list, list, list]:
    grid = _sweep_grid_s(spec)
    rows = sweep(spec.cfg, "S", grid, KktStrategy(s=grid[0]),
                 spec.n_trials, spec.master_seed, workers=spec.workers,
                 freeze_antennas=spec.freeze_antennas, metric=SUM_RATE)
    header = ["S", "mc_rate", "mc_ci95"]
    table = [[int(r.x_value), *_row_stats(r)] for r in rows]
    return header, table, _report_errors("fig3", rows)


def _run_fig4(spec: ExperimentSpec) -> tuple[list, list, list]:
    s_fixed = 64
    grid = list(range(2, 101, 2))
    equal_rows = sweep(spec.cfg, "K", grid, EqualPowerStrategy(s=s_fixed),
                       spec.n_trials, spec.master_seed, workers=spec.workers,
                       freeze_antennas=spec.freeze_antennas, metric=SUM_RATE)
    kkt_rows = sweep(spec.cfg, "K", grid, KktStrategy(s=s_fixed),
                     spec.n_trials, spec.master_seed, workers=spec.workers,
                     freeze_antennas=spec.freeze_antennas, metric=SUM_RATE)
    header = ["K", "analytic_rate", "mc_rate_equal", "mc_ci95_equal",
              "mc_rate_kkt", "mc_ci95_kkt"]
    table = []
    for eq, kk in zip(equal_rows, kkt_rows):
        table.append([int(eq.x_value), eq.analytic,
                      *_row_stats(eq), *_row_stats(kk)])
    errors = _report_errors("fig4/equal", equal_rows)
    errors += _report_errors("fig4/kkt", kkt_rows)
    return header, table, errors


_FIGURES = {"fig1": _run_fig1, "fig2": _run_fig2, "fig3": _run_fig3,
            "fig4": _run_fig4}


def _run_figure(spec: ExperimentSpec) -> int:
    header, table, errors = _FIGURES[spec.experiment](spec)
    out = spec.out or f"{spec.experiment}.csv"
    _write_csv(out, header, table)
    _note(f"[{spec.experiment}] wrote {len(table)} rows to {out}")
    if spec.json_mirror:
        _write_json(_json_path(out), spec, header, table, errors)
        _note(f"[{spec.experiment}] wrote JSON mirror to {_json_path(out)}")
    return 0


def _run_solve(spec: ExperimentSpec) -> int:
    cfg = spec.cfg
    full = generate_channel(cfg, spec.master_seed, 0)
    from .channel import FROZEN_SELECTION_STREAM, SELECTION_STREAM
    stream = (FROZEN_SELECTION_STREAM if spec.freeze_antennas
              else SELECTION_STREAM)
    sel_seed = derive_seed(spec.master_seed, 0, stream)
    if spec.dump_channel_path:
        dump_channel(full, spec.dump_channel_path)
        _note(f"[solve] wrote channel realization to {spec.dump_channel_path}")
    result = optimize(full, cfg, sel_seed, mode=spec.mode)
    budget = transmit_budget(cfg, result.s_opt)
    payload = {
        "experiment": "solve",
        "config": asdict(cfg),
        "master_seed": spec.master_seed,
        "mode": spec.mode,
        "s_opt": result.s_opt.s,
        "p_out": result.allocation.p_out,
        "budget": budget,
        "budget_residual": result.allocation.p_out - budget,
        "sum_rate_approx": result.sum_rate_approx,
        "sum_rate_exact": result.sum_rate_exact,
        "per_user_power": [float(p) for p in result.allocation.per_user],
    }
    if spec.json_mirror:
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        print(f"joint optimum (seed {spec.master_seed}, mode {spec.mode})")
        print(f"  s_opt              = {result.s_opt.s}")
        print(f"  p_out              = {_fmt(result.allocation.p_out)}")
        print(f"  transmit budget    = {_fmt(budget)}")
        print(f"  budget residual    = {_fmt(payload['budget_residual'])}")
        print(f"  sum rate surrogate = {_fmt(result.sum_rate_approx)}")
        print(f"  sum rate exact     = {_fmt(result.sum_rate_exact)}")
        powers = " ".join(_fmt(p) for p in result.allocation.per_user)
        print(f"  per-user powers    = {powers}")
    if spec.out:
        _write_csv(spec.out, ["user", "power"],
                   [[i, float(p)]
                    for i, p in enumerate(result.allocation.per_user)])
        _note(f"[solve] wrote per-user powers to {spec.out}")
    return 0


def _run_s_star(spec: ExperimentSpec) -> int:
    cfg = spec.cfg
    solution = optimal_chains_equal(cfg)
    payload = {
        "experiment": "s-star",
        "config": asdict(cfg),
        "x_continuous": solution.x_continuous,
        "s_star": solution.s_star.s,
        "avg_sum_rate": solution.r_bar,
        "per_user_power": solution.per_user_power,
    }
    if spec.json_mirror:
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        print(f"equal-power chain optimum for N={cfg.n_antennas} "
              f"K={cfg.n_users} p_max={cfg.p_max:g} p_c={cfg.p_c:g}")
        print(f"  x (continuous)  = {_fmt(solution.x_continuous)}")
        print(f"  s_star          = {solution.s_star.s}")
        print(f"  avg sum rate    = {_fmt(solution.r_bar)}")
        print(f"  per-user power  = {_fmt(solution.per_user_power)}")
    if spec.out:
        _write_csv(spec.out,
                   ["x_continuous", "s_star", "avg_sum_rate",
                    "per_user_power"],
                   [[solution.x_continuous, solution.s_star.s,
                     solution.r_bar, solution.per_user_power]])
        _note(f"[s-star] wrote {spec.out}")
    return 0


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = make_spec(args)
    except ConfigError as exc:
        _note(f"error: {exc}")
        return 2
    try:
        if spec.experiment == "solve":
            return _run_solve(spec)
        if spec.experiment == "s-star":
            return _run_s_star(spec)
        return _run_figure(spec)
    except (TrialFailureError, BracketFailureError) as exc:
        _note(f"solver failure: {exc}")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
