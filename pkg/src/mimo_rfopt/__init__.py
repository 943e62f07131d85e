"""Optimal RF-chain activation and power allocation for a massive MIMO
downlink with non-negligible circuit power consumption.

The library models a single-cell base station using conjugate beamforming
toward single-antenna users. Activating an RF chain costs a fixed share
of the power budget, so more chains is not always better: the package
provides the exact link-level model, closed-form equal-power optima, a
KKT water-filling allocator for fixed chain counts, a joint optimizer,
and a Monte Carlo harness with deterministic parallel seeding.
"""

from ._version import __version__
from .analytic import (EqualPowerSolution, approx_sinr_unequal,
                       avg_sum_rate_equal, continuous_optimum_x,
                       optimal_chains_equal)
from .channel import (ChannelMatrix, GramStats, antenna_permutation,
                      derive_seed, dump_channel, generate_channel,
                      gram_stats, load_channel_dump, select_antennas)
from .config import (BUDGET_TOL, BadDimensionsError, BudgetViolationError,
                     ChainCount, ConfigError, InfeasibleBudgetError,
                     PowerAllocation, SystemConfig, chain_bounds,
                     equal_allocation, load_config, max_supported_chains,
                     read_config_file, transmit_budget, validate_config)
from .exact import (DimensionMismatchError, NegativeSinrError, RateReport,
                    evaluate, exact_sinr, rate_report)
from .joint import EARLY_STOP, EXHAUSTIVE, JointResult, optimize
from .kkt import (BracketFailureError, KktInputs, MultiplierBracket,
                  SolveDiagnostics, bracket_multiplier, budget_residual,
                  candidate_power, objective, solve)
from .montecarlo import (CHAIN_COUNT, SUM_RATE, EqualPowerStrategy,
                         JointStrategy, KktStrategy, SweepResult,
                         TrialFailureError, run_trial, run_trials, sweep)

__all__ = [
    "__version__",
    "BUDGET_TOL",
    "BadDimensionsError",
    "BracketFailureError",
    "BudgetViolationError",
    "CHAIN_COUNT",
    "ChainCount",
    "ChannelMatrix",
    "ConfigError",
    "DimensionMismatchError",
    "EARLY_STOP",
    "EXHAUSTIVE",
    "EqualPowerSolution",
    "EqualPowerStrategy",
    "GramStats",
    "InfeasibleBudgetError",
    "JointResult",
    "JointStrategy",
    "KktInputs",
    "KktStrategy",
    "MultiplierBracket",
    "NegativeSinrError",
    "PowerAllocation",
    "RateReport",
    "SUM_RATE",
    "SolveDiagnostics",
    "SweepResult",
    "SystemConfig",
    "TrialFailureError",
    "antenna_permutation",
    "approx_sinr_unequal",
    "avg_sum_rate_equal",
    "bracket_multiplier",
    "budget_residual",
    "candidate_power",
    "chain_bounds",
    "continuous_optimum_x",
    "derive_seed",
    "dump_channel",
    "equal_allocation",
    "evaluate",
    "exact_sinr",
    "generate_channel",
    "gram_stats",
    "load_channel_dump",
    "load_config",
    "max_supported_chains",
    "objective",
    "optimal_chains_equal",
    "optimize",
    "rate_report",
    "read_config_file",
    "run_trial",
    "run_trials",
    "select_antennas",
    "solve",
    "sweep",
    "transmit_budget",
    "validate_config",
]
