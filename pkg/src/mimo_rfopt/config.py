"""Domain types, configuration validation, and power-budget arithmetic.

Every power in this package is unitless, normalized by the average noise
power. A base station with ``n_antennas`` antennas serves ``n_users``
single-antenna users; each activated RF chain burns a fixed ``p_c`` out of
the total budget ``p_max``, and whatever is left over is transmit power.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

#: Absolute tolerance on power sums; bisection and floating-point summation
#: leave residuals while powers are O(1) to O(100).
BUDGET_TOL = 1e-9

#: Relative slack when turning the ratio p_max/p_c into an integer chain
#: bound, so a budget that exactly fits s chains is not lost to rounding.
_RATIO_EPS = 1e-9


class ConfigError(ValueError):
    """A scenario parameter violates its invariant."""


class BadDimensionsError(ConfigError):
    """Non-positive parameter, or more users than antennas."""


class InfeasibleBudgetError(ConfigError):
    """p_max cannot power one RF chain per user with headroom to transmit."""


class BudgetViolationError(ValueError):
    """A power allocation exceeds the transmit budget or goes negative."""


@dataclass(frozen=True)
class SystemConfig:
    """Static scenario parameters.

    n_antennas: antennas available at the base station
    n_users: single-antenna users served at the same time
    p_max: total power budget
    p_c: circuit power drawn by one active RF chain
    """

    n_antennas: int
    n_users: int
    p_max: float
    p_c: float


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Raise a ConfigError subclass naming the violated invariant.

    Returns the config unchanged so calls can be chained. Warns when
    n_users > n_antennas / 4, where the mean-field approximations start
    to degrade.
    """
    if cfg.n_antennas <= 0 or cfg.n_users <= 0:
        raise BadDimensionsError("n_antennas and n_users must be positive")
    if cfg.p_max <= 0 or cfg.p_c <= 0:
        raise BadDimensionsError("p_max and p_c must be positive")
    if cfg.n_users > cfg.n_antennas:
        raise BadDimensionsError(
            f"n_users={cfg.n_users} exceeds n_antennas={cfg.n_antennas}")
    if cfg.p_max <= cfg.n_users * cfg.p_c:
        raise InfeasibleBudgetError(
            f"p_max={cfg.p_max} must exceed n_users*p_c="
            f"{cfg.n_users * cfg.p_c} to leave transmit power")
    if cfg.n_users > cfg.n_antennas / 4:
        warnings.warn(
            f"n_users={cfg.n_users} is large relative to "
            f"n_antennas={cfg.n_antennas}; large-array approximations degrade",
            stacklevel=2)
    return cfg


def max_supported_chains(cfg: SystemConfig) -> int:
    """Largest chain count the budget can power, floor(p_max / p_c)."""
    return int(math.floor(cfg.p_max / cfg.p_c * (1.0 + _RATIO_EPS)))


def chain_bounds(cfg: SystemConfig) -> tuple[int, int]:
    """Inclusive (low, high) range of admissible chain counts.

    At least one chain per served user, at most what the budget and the
    physical array support.
    """
    return cfg.n_users, min(cfg.n_antennas, max_supported_chains(cfg))


@dataclass(frozen=True)
class ChainCount:
    """Number of activated RF chains."""

    s: int

    def __post_init__(self):
        object.__setattr__(self, "s", int(self.s))
        if self.s < 1:
            raise ConfigError(f"chain count must be positive, got {self.s}")

    def __int__(self) -> int:
        return self.s

    @classmethod
    def checked(cls, cfg: SystemConfig, s) -> "ChainCount":
        """Construct a chain count validated against the config bounds."""
        lo, hi = chain_bounds(cfg)
        v = int(s)
        if not lo <= v <= hi:
            raise ConfigError(
                f"chain count {v} outside admissible range [{lo}, {hi}]")
        return cls(v)


def chain_value(s) -> int:
    """Plain integer value of a chain count given as ChainCount or int."""
    if isinstance(s, ChainCount):
        return s.s
    return int(s)


def transmit_budget(cfg: SystemConfig, s) -> float:
    """Maximum total transmit power when s chains are active.

    p_max - s*p_c, snapped to zero when rounding leaves a residual within
    BUDGET_TOL of zero (e.g. when s*p_c consumes the budget exactly).
    """
    v = chain_value(s)
    lo, hi = chain_bounds(cfg)
    if not lo <= v <= hi:
        raise ConfigError(
            f"chain count {v} outside admissible range [{lo}, {hi}]")
    raw = cfg.p_max - v * cfg.p_c
    if raw < 0.0:
        if raw < -BUDGET_TOL:
            raise ConfigError(
                f"negative transmit budget {raw} for s={v}")
        return 0.0
    return raw


@dataclass(frozen=True)
class PowerAllocation:
    """Per-user transmit powers plus the chain count that produced them."""

    chain_count: ChainCount
    per_user: np.ndarray
    p_out: float

    def __post_init__(self):
        if self.per_user.ndim != 1:
            raise BudgetViolationError("per_user must be a 1-D vector")

    @property
    def n_users(self) -> int:
        return self.per_user.size

    @classmethod
    def within_budget(cls, chain_count: ChainCount, per_user,
                      budget: float) -> "PowerAllocation":
        """Validate powers against an already-computed transmit budget."""
        arr = np.array(per_user, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise BudgetViolationError("per_user must be a non-empty vector")
        if not np.all(np.isfinite(arr)):
            raise BudgetViolationError("per_user contains non-finite values")
        if np.any(arr < 0.0):
            raise BudgetViolationError("per_user contains negative power")
        p_out = float(arr.sum())
        if p_out > budget + BUDGET_TOL:
            raise BudgetViolationError(
                f"total power {p_out} exceeds transmit budget {budget}")
        arr.setflags(write=False)
        return cls(chain_count, arr, p_out)

    @classmethod
    def create(cls, cfg: SystemConfig, chain_count: ChainCount,
               per_user) -> "PowerAllocation":
        """Validate powers against the budget implied by cfg and s."""
        return cls.within_budget(chain_count, per_user,
                                 transmit_budget(cfg, chain_count))


def equal_allocation(cfg: SystemConfig, chain_count: ChainCount) -> PowerAllocation:
    """Split the transmit budget evenly across users."""
    budget = transmit_budget(cfg, chain_count)
    per_user = np.full(cfg.n_users, budget / cfg.n_users)
    return PowerAllocation.within_budget(chain_count, per_user, budget)


_CONFIG_KEYS = {
    "n_antennas": int,
    "n_users": int,
    "p_max": float,
    "p_c": float,
}


def read_config_file(path) -> dict:
    """Parse a plain key-value scenario file.

    One ``key = value`` (or ``key: value``) pair per line; blank lines and
    ``#`` comments ignored. Recognized keys: n_antennas, n_users, p_max,
    p_c. Returns only the keys present.
    """
    found = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            for sep in ("=", ":"):
                if sep in line:
                    key, _, value = line.partition(sep)
                    break
            else:
                raise ConfigError(
                    f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                found[key] = _CONFIG_KEYS[key](value.strip())
            except ValueError as exc:
                raise ConfigError(
                    f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return found


def load_config(path) -> SystemConfig:
    """Load a complete SystemConfig from a key-value file and validate it."""
    found = read_config_file(path)
    missing = sorted(set(_CONFIG_KEYS) - set(found))
    if missing:
        raise ConfigError(f"{path}: missing keys {missing}")
    return validate_config(SystemConfig(**found))
