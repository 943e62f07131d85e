"""Trial orchestration: averages of exact sum-rates (or chain counts) over
channel realizations, with confidence intervals and deterministic seeding.

What gets averaged is always the exact conjugate-beamforming sum-rate of
the allocation a strategy produced (or the chain count it picked), never
the optimizer's internal surrogate. Per-trial results are reduced in
trial-index order whatever the worker count, so aggregates are
bit-reproducible.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .analytic import avg_sum_rate_equal, optimal_chains_equal
from .channel import (FROZEN_SELECTION_STREAM, SELECTION_STREAM, derive_seed,
                      generate_channel, gram_stats, select_antennas)
from .config import (ChainCount, ConfigError, SystemConfig, equal_allocation,
                     validate_config)
from .exact import evaluate
from .joint import EXHAUSTIVE, optimize
from .kkt import BracketFailureError, KktInputs, solve

SUM_RATE = "sum_rate"
CHAIN_COUNT = "chain_count"


@dataclass(frozen=True)
class EqualPowerStrategy:
    """Equal split of the transmit budget at a fixed chain count."""

    s: int


@dataclass(frozen=True)
class KktStrategy:
    """Water-filled allocation at a fixed chain count."""

    s: int


@dataclass(frozen=True)
class JointStrategy:
    """Joint chain-count and power optimization per realization."""

    mode: str = EXHAUSTIVE


@dataclass(frozen=True)
class SweepResult:
    """One experiment row: grid value, analytic prediction (when one
    exists), Monte Carlo mean and 95% half-width."""

    x_value: float
    analytic: float | None
    mc_mean: float
    mc_half_width_95: float
    n_trials: int
    error: str | None = None


class TrialFailureError(RuntimeError):
    """Solver failure inside one trial, carrying the trial index."""

    def __init__(self, trial_index: int, cause: Exception):
        super().__init__(f"trial {trial_index}: {cause}")
        self.trial_index = trial_index


def _selection_seed(master_seed: int, trial_index: int,
                    freeze_antennas: bool) -> int:
    if freeze_antennas:
        return derive_seed(master_seed, 0, FROZEN_SELECTION_STREAM)
    return derive_seed(master_seed, trial_index, SELECTION_STREAM)


def run_trial(cfg: SystemConfig, strategy, master_seed: int,
              trial_index: int, freeze_antennas: bool = False,
              ) -> tuple[float, int]:
    """One realization under one strategy: (exact sum-rate, chains used)."""
    full = generate_channel(cfg, master_seed, trial_index)
    sel_seed = _selection_seed(master_seed, trial_index, freeze_antennas)
    try:
        if isinstance(strategy, EqualPowerStrategy):
            chain = ChainCount.checked(cfg, strategy.s)
            sub = select_antennas(full, chain, sel_seed)
            report = evaluate(gram_stats(sub), equal_allocation(cfg, chain))
            return report.sum_rate, chain.s
        if isinstance(strategy, KktStrategy):
            chain = ChainCount.checked(cfg, strategy.s)
            sub = select_antennas(full, chain, sel_seed)
            stats = gram_stats(sub)
            inputs = KktInputs.from_config(cfg, chain, stats.beta_sq)
            allocation, _ = solve(inputs)
            report = evaluate(stats, allocation)
            return report.sum_rate, chain.s
        if isinstance(strategy, JointStrategy):
            result = optimize(full, cfg, sel_seed, mode=strategy.mode)
            return result.sum_rate_exact, result.s_opt.s
        raise TypeError(f"unknown strategy {strategy!r}")
    except BracketFailureError as exc:
        raise TrialFailureError(trial_index, exc) from exc


def _trial_worker(args) -> tuple[float, int]:
    return run_trial(*args)


def _collect_trials(cfg, strategy, n_trials, master_seed, workers,
                    freeze_antennas) -> list[tuple[float, int]]:
    jobs = [(cfg, strategy, master_seed, i, freeze_antennas)
            for i in range(n_trials)]
    if workers <= 1:
        return [_trial_worker(job) for job in jobs]
    chunk = max(1, n_trials // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # executor.map preserves submission order, keeping the reduction
        # in trial-index order regardless of completion order
        return list(pool.map(_trial_worker, jobs, chunksize=chunk))


def run_trials(cfg: SystemConfig, strategy, n_trials: int, master_seed: int,
               workers: int = 1, freeze_antennas: bool = False,
               metric: str = SUM_RATE, x_value: float = math.nan,
               analytic: float | None = None) -> SweepResult:
    """Average a strategy over n_trials independent realizations.

    metric selects what is aggregated: the exact sum-rate or the chain
    count the strategy used. The result is independent of worker count
    for a given master_seed.
    """
    validate_config(cfg)
    if n_trials < 2:
        raise ValueError("n_trials must be at least 2")
    if metric not in (SUM_RATE, CHAIN_COUNT):
        raise ValueError(f"unknown metric {metric!r}")
    outcomes = _collect_trials(cfg, strategy, n_trials, master_seed,
                               workers, freeze_antennas)
    column = 0 if metric == SUM_RATE else 1
    values = np.array([out[column] for out in outcomes], dtype=float)
    mean = float(values.mean())
    half_width = float(1.96 * values.std(ddof=1) / math.sqrt(n_trials))
    return SweepResult(x_value=x_value, analytic=analytic, mc_mean=mean,
                       mc_half_width_95=half_width, n_trials=n_trials)


def _point_config(cfg: SystemConfig, variable: str, value) -> SystemConfig:
    if variable == "S":
        return cfg
    if variable == "p_max":
        return replace(cfg, p_max=float(value))
    if variable == "K":
        return replace(cfg, n_users=int(value))
    raise ValueError(f"unknown sweep variable {variable!r}")


def _point_strategy(strategy, variable: str, value):
    if variable == "S" and isinstance(strategy, (EqualPowerStrategy,
                                                 KktStrategy)):
        return replace(strategy, s=int(value))
    return strategy


def _point_analytic(cfg: SystemConfig, strategy, metric: str) -> float | None:
    if isinstance(strategy, EqualPowerStrategy) and metric == SUM_RATE:
        return avg_sum_rate_equal(cfg, strategy.s)
    if isinstance(strategy, JointStrategy) and metric == CHAIN_COUNT:
        return float(optimal_chains_equal(cfg).s_star.s)
    return None


def sweep(cfg: SystemConfig, variable: str, grid, strategy, n_trials: int,
          master_seed: int, workers: int = 1, freeze_antennas: bool = False,
          metric: str = SUM_RATE) -> list[SweepResult]:
    """One run_trials call per grid point of S, p_max, or K.

    Per-point failures are recorded on the returned row (error field set,
    statistics NaN) and the sweep continues.
    """
    results = []
    for value in grid:
        try:
            cfg_v = validate_config(_point_config(cfg, variable, value))
            strat_v = _point_strategy(strategy, variable, value)
            analytic = _point_analytic(cfg_v, strat_v, metric)
            row = run_trials(cfg_v, strat_v, n_trials, master_seed,
                             workers=workers, freeze_antennas=freeze_antennas,
                             metric=metric, x_value=float(value),
                             analytic=analytic)
        except (ConfigError, TrialFailureError) as exc:
            row = SweepResult(x_value=float(value), analytic=None,
                              mc_mean=math.nan, mc_half_width_95=math.nan,
                              n_trials=n_trials, error=str(exc))
        results.append(row)
    return results
