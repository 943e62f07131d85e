"""Joint chain-count and power-allocation search on one realization.

Sweeps the chain count upward over nested random antenna subsets and
solves the fixed-count allocation at each step. Exhaustive mode (the
default) evaluates the whole admissible range and returns the argmax of
the surrogate sum-rate. Early-stop mode instead breaks at the first
decrease and returns the previous step's solution; that greedy rule is
only sound when the surrogate trajectory is unimodal, which holds for
the trajectory's average but not per realization (the realized per-user
self-gains fluctuate step to step), so early-stop routinely quits far
below the argmax and exists to study exactly that.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ChannelMatrix, antenna_permutation, gram_stats, select_antennas
from .config import ChainCount, PowerAllocation, SystemConfig, chain_bounds, validate_config
from .exact import evaluate
from .kkt import KktInputs, objective, solve

EARLY_STOP = "early-stop"
EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class JointResult:
    """Chosen chain count, its allocation, and both sum-rate views.

    sum_rate_approx is the surrogate objective the search optimized;
    sum_rate_exact evaluates the same allocation on the realized channel.
    trajectory holds every (chain count, surrogate rate) pair visited.
    """

    s_opt: ChainCount
    allocation: PowerAllocation
    sum_rate_approx: float
    sum_rate_exact: float
    trajectory: tuple


def optimize(full_channel: ChannelMatrix, cfg: SystemConfig,
             selection_seed: int, mode: str = EXHAUSTIVE) -> JointResult:
    """Find the best chain count and power split for one realization.

    The antenna subsets are nested: one random column permutation per call
    (keyed by selection_seed) and the subset at chain count s is its first
    s columns, so the sweep is comparable across s.
    """
    if mode not in (EARLY_STOP, EXHAUSTIVE):
        raise ValueError(f"unknown mode {mode!r}")
    validate_config(cfg)
    if full_channel.n_selected != cfg.n_antennas:
        raise ValueError(
            f"channel has {full_channel.n_selected} columns, "
            f"config expects {cfg.n_antennas}")
    if full_channel.n_users != cfg.n_users:
        raise ValueError(
            f"channel has {full_channel.n_users} rows, "
            f"config expects {cfg.n_users}")

    lo, hi = chain_bounds(cfg)
    perm = antenna_permutation(cfg.n_antennas, selection_seed)
    abs_sq = np.abs(full_channel.gains[:, perm]) ** 2

    trajectory = []
    best = None  # (rate, s, allocation)
    prev = None
    for s in range(lo, hi + 1):
        beta_sq = abs_sq[:, :s].sum(axis=1) ** 2
        inputs = KktInputs.from_config(cfg, ChainCount(s), beta_sq)
        allocation, _ = solve(inputs)
        rate = objective(inputs, allocation.per_user)
        trajectory.append((s, rate))
        if mode == EARLY_STOP:
            if prev is not None and rate < prev[0]:
                best = prev
                break
            prev = (rate, s, allocation)
        else:
            if best is None or rate > best[0]:
                best = (rate, s, allocation)
    else:
        if mode == EARLY_STOP:
            best = prev

    rate, s_opt, allocation = best
    stats = gram_stats(select_antennas(full_channel, s_opt, selection_seed))
    report = evaluate(stats, allocation)
    return JointResult(
        s_opt=ChainCount(s_opt),
        allocation=allocation,
        sum_rate_approx=rate,
        sum_rate_exact=report.sum_rate,
        trajectory=tuple(trajectory),
    )
