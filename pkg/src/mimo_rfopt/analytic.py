r"""Closed-form layer: average sum-rate under equal power and the optimal
chain count.

In the large-array limit the per-user SINR under equal power tends to
(p_out/K) S / (p_out + K) with p_out = p_max - S p_c, which gives the
average sum-rate

    R(S) = K log2(1 + S (p_max - S p_c) / (K (p_max - S p_c + K))).

R is unimodal in S; its continuous maximizer is

    x = (p_max + K - sqrt(K (p_max + K))) / p_c,

and the integer optimum is floor(x) or ceil(x), clamped to the admissible
chain range.
"""

import math
from dataclasses import dataclass

from .config import (ChainCount, SystemConfig, chain_bounds, chain_value,
                     max_supported_chains, transmit_budget)


@dataclass(frozen=True)
class EqualPowerSolution:
    """Optimal chain count under equal power with its predicted rate."""

    s_star: ChainCount
    x_continuous: float
    r_bar: float
    per_user_power: float


def _rbar(cfg: SystemConfig, s: int) -> float:
    # formula without chain-range checks, for probing floor/ceil candidates
    p_out = max(cfg.p_max - s * cfg.p_c, 0.0)
    k = cfg.n_users
    return k * math.log2(1.0 + s * p_out / (k * (p_out + k)))


def avg_sum_rate_equal(cfg: SystemConfig, s) -> float:
    """Predicted average sum-rate at chain count s under equal power."""
    v = chain_value(s)
    p_out = transmit_budget(cfg, v)
    k = cfg.n_users
    return k * math.log2(1.0 + v * p_out / (k * (p_out + k)))


def continuous_optimum_x(cfg: SystemConfig) -> float:
    """Continuous maximizer of the equal-power average sum-rate.

    Always strictly below p_max/p_c, so the optimum never spends the whole
    budget on circuit power.
    """
    k = cfg.n_users
    return (cfg.p_max + k - math.sqrt(k * (cfg.p_max + k))) / cfg.p_c


def optimal_chains_equal(cfg: SystemConfig) -> EqualPowerSolution:
    """Integer-optimal chain count under equal power allocation.

    Rounds the continuous maximizer x to floor(x) when that strictly wins
    (or when floor(x) already sits on the budget boundary), otherwise to
    ceil(x); the result is clamped to the admissible chain range.
    """
    x = continuous_optimum_x(cfg)
    budget_cap = max_supported_chains(cfg)
    fl = math.floor(x)
    ce = math.ceil(x)
    if fl >= budget_cap:
        pick = budget_cap
    elif _rbar(cfg, fl) > _rbar(cfg, ce):
        pick = fl
    else:
        pick = ce
    lo, hi = chain_bounds(cfg)
    s_star = min(max(pick, lo), hi)
    return EqualPowerSolution(
        s_star=ChainCount(s_star),
        x_continuous=x,
        r_bar=avg_sum_rate_equal(cfg, s_star),
        per_user_power=transmit_budget(cfg, s_star) / cfg.n_users,
    )


def approx_sinr_unequal(p_k: float, beta_k_sq: float, s,
                        cfg: SystemConfig) -> float:
    """Mean-field SINR of one user under an arbitrary power split.

    p_k beta_k^2 / (S (p_max - S p_c - p_k + K)); valid for
    0 <= p_k <= p_max - S p_c.
    """
    v = chain_value(s)
    if p_k < 0.0:
        raise ValueError(f"p_k must be non-negative, got {p_k}")
    return (p_k * beta_k_sq
            / (v * (cfg.p_max - v * cfg.p_c - p_k + cfg.n_users)))
