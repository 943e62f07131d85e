r"""Water-filling-style power allocation for a fixed chain count.

For chain count S the surrogate per-user rate is

    f_k(p) = log2(1 + p beta_k^2 / (S (a - p))),    a = p_max - S p_c + K,

increasing in p, so the transmit budget p_max - S p_c binds at the
optimum. Stationarity at price lam > 0 (the negated Lagrange multiplier
of the budget constraint, a positive water-level parameter) reduces to
the per-user quadratic

    p^2 (S - b) + p a (b - 2S) + S a^2 - a b / (lam ln 2) = 0,   b = beta_k^2,

whose discriminant simplifies to a^2 b^2 - 4 (b - S) a b / (lam ln 2).
The root on the concave branch of f_k, clamped to [0, budget], is the
candidate power; one-dimensional bisection on lam drives the spent-power
residual to zero.

f_k is concave only below the inflection point a (b - 2S) / (2 (b - S)).
Users with b <= 2S have no concave branch at all (their surrogate rate is
convex on the whole feasible range); in the operating regime b is near
S^2 and such users occur only in extreme fades. The solver prices them
out at zero and water-fills the rest; when nobody has a concave branch
the surrogate optimum is a vertex of the budget simplex and is returned
directly.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import ChainCount, PowerAllocation, SystemConfig, transmit_budget

LN2 = math.log(2.0)

#: |S - beta^2| below EPS_QUAD_SCALE * S^2 collapses the quadratic to the
#: linear stationarity equation.
EPS_QUAD_SCALE = 1e-9

DEFAULT_MAX_ITERATIONS = 200
_BRACKET_GROWTH = 10.0
_MAX_BRACKET_GROWTHS = 60


class BracketFailureError(RuntimeError):
    """No sign change found for the budget residual over the search range."""


def default_tolerance(budget: float) -> float:
    """Power tolerance for the bisection, 1e-8 of the budget (floor 1e-12)."""
    return max(1e-8 * budget, 1e-12)


@dataclass(frozen=True)
class KktInputs:
    """Fixed quantities of one allocation problem.

    beta_sq: per-user squared self-gains at the current chain count
    s: active chain count
    a: interference-plus-noise offset p_max - S p_c + K
    budget: transmit budget p_max - S p_c
    """

    beta_sq: np.ndarray
    s: ChainCount
    a: float
    budget: float

    def __post_init__(self):
        arr = np.array(self.beta_sq, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("beta_sq must be a non-empty 1-D vector")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
            raise ValueError("beta_sq must be finite and non-negative")
        if self.budget < 0.0:
            raise ValueError(f"budget must be non-negative, got {self.budget}")
        if self.a != self.budget + arr.size:
            raise ValueError("a must equal budget + n_users exactly")
        arr.setflags(write=False)
        object.__setattr__(self, "beta_sq", arr)

    @property
    def n_users(self) -> int:
        return self.beta_sq.size

    @classmethod
    def from_config(cls, cfg: SystemConfig, s, beta_sq) -> "KktInputs":
        chain = s if isinstance(s, ChainCount) else ChainCount.checked(cfg, s)
        budget = transmit_budget(cfg, chain)
        beta = np.asarray(beta_sq, dtype=float)
        if beta.size != cfg.n_users:
            raise ValueError(
                f"{beta.size} gains for {cfg.n_users} users")
        return cls(beta, chain, budget + cfg.n_users, budget)


@dataclass(frozen=True)
class MultiplierBracket:
    """Water-level interval with opposite-sign budget residuals."""

    lam_low: float
    lam_high: float
    tolerance_power: float
    max_iterations: int


@dataclass(frozen=True)
class SolveDiagnostics:
    """Bisection iterations, final budget residual, final water level."""

    iterations: int
    residual: float
    multiplier: float


def _candidate_vector(beta: np.ndarray, s: int, a: float, cap: float,
                      lam: float) -> np.ndarray:
    """Clamped stationarity roots for a vector of self-gains at price lam."""
    s = float(s)
    out = np.zeros(beta.shape)
    if lam <= 0.0 or not math.isfinite(lam):
        raise ValueError(f"water level must be positive, got {lam}")
    positive = beta > 0.0
    near = positive & (np.abs(s - beta) < EPS_QUAD_SCALE * s * s)
    quad = positive & ~near
    if near.any():
        out[near] = min(max(a - 1.0 / (lam * LN2), 0.0), cap)
    if quad.any():
        b = beta[quad]
        delta = (a * a * (b - 2.0 * s) ** 2
                 - 4.0 * (s - b) * (s * a * a - a * b / (lam * LN2)))
        root = np.zeros(b.shape)
        ok = delta >= 0.0
        root[ok] = ((a * (2.0 * s - b[ok]) + np.sqrt(delta[ok]))
                    / (2.0 * (s - b[ok])))
        out[quad] = np.where(ok, np.clip(root, 0.0, cap), 0.0)
    return out


def candidate_power(beta_k_sq: float, inputs: KktInputs, lam: float) -> float:
    """Stationarity root for one user, clamped to [0, budget].

    Returns 0 for a dead channel, 0 when the discriminant is negative, and
    the linear-fallback solution when the quadratic degenerates.
    """
    vec = _candidate_vector(np.array([float(beta_k_sq)]), int(inputs.s),
                            inputs.a, inputs.budget, lam)
    return float(vec[0])


def budget_residual(inputs: KktInputs, lam: float) -> float:
    """Spent power minus budget when every user takes its candidate."""
    vec = _candidate_vector(inputs.beta_sq, int(inputs.s), inputs.a,
                            inputs.budget, lam)
    return float(vec.sum()) - inputs.budget


def _waterfilling_mask(inputs: KktInputs) -> np.ndarray:
    # users whose surrogate rate has a concave branch to water-fill on
    return inputs.beta_sq > 2.0 * int(inputs.s)


def _concave_candidates(b: np.ndarray, s: float, a: float, cap: float,
                        lam: float) -> np.ndarray:
    # fast path for users with b > 2s at lam above the critical level:
    # the discriminant is non-negative (clamped against rounding at the
    # double root) and the quadratic never degenerates
    delta = (a * a * (b - 2.0 * s) ** 2
             - 4.0 * (s - b) * (s * a * a - a * b / (lam * LN2)))
    np.maximum(delta, 0.0, out=delta)
    root = (a * (2.0 * s - b) + np.sqrt(delta)) / (2.0 * (s - b))
    return np.clip(root, 0.0, cap)


def _masked_candidates(inputs: KktInputs, lam: float,
                       mask: np.ndarray) -> np.ndarray:
    out = np.zeros(inputs.n_users)
    out[mask] = _concave_candidates(inputs.beta_sq[mask],
                                    float(int(inputs.s)), inputs.a,
                                    inputs.budget, lam)
    return out


def _masked_residual(inputs: KktInputs, lam: float, mask: np.ndarray) -> float:
    return float(_masked_candidates(inputs, lam, mask).sum()) - inputs.budget


def _smallest_usable_multiplier(inputs: KktInputs, mask: np.ndarray) -> float:
    # largest per-user critical level where the discriminant turns zero;
    # above it every masked user has a real stationarity root
    beta = inputs.beta_sq[mask]
    s = float(int(inputs.s))
    crit = 4.0 * (beta - s) / (inputs.a * beta * LN2)
    return float(crit.max()) * (1.0 + 1e-9)


def bracket_multiplier(inputs: KktInputs, tolerance: float | None = None,
                       max_iterations: int = DEFAULT_MAX_ITERATIONS,
                       ) -> MultiplierBracket:
    """Bracket the water level so the budget residual changes sign.

    The lower end sits just above the largest critical level (residual
    positive: candidates overshoot the budget); the upper end grows
    geometrically until the residual goes negative.
    """
    tol = default_tolerance(inputs.budget) if tolerance is None else tolerance
    mask = _waterfilling_mask(inputs)
    if not mask.any():
        raise BracketFailureError(
            "no user has a concave surrogate rate; nothing to bracket")
    lam_low = _smallest_usable_multiplier(inputs, mask)
    r_low = _masked_residual(inputs, lam_low, mask)
    if r_low <= 0.0:
        raise BracketFailureError(
            f"spent power already short of budget at the smallest usable "
            f"water level (residual {r_low})")
    lam_high = max(1.0, lam_low * _BRACKET_GROWTH)
    for _ in range(_MAX_BRACKET_GROWTHS):
        if _masked_residual(inputs, lam_high, mask) <= 0.0:
            return MultiplierBracket(lam_low, lam_high, tol, max_iterations)
        lam_high *= _BRACKET_GROWTH
    raise BracketFailureError(
        f"no sign change up to water level {lam_high}")


def _allocation(inputs: KktInputs, per_user: np.ndarray) -> PowerAllocation:
    return PowerAllocation.within_budget(inputs.s, per_user, inputs.budget)


def solve(inputs: KktInputs, tolerance: float | None = None,
          max_iterations: int = DEFAULT_MAX_ITERATIONS,
          ) -> tuple[PowerAllocation, SolveDiagnostics]:
    """Allocate the transmit budget across users for a fixed chain count.

    Returns the allocation plus bisection diagnostics. Powers are
    non-negative and sum to the budget within the tolerance, approaching
    it from below so the circuit-power constraint is never exceeded.
    """
    beta = inputs.beta_sq
    n = inputs.n_users
    budget = inputs.budget
    tol = default_tolerance(budget) if tolerance is None else float(tolerance)

    if budget <= 0.0:
        return (_allocation(inputs, np.zeros(n)),
                SolveDiagnostics(0, 0.0, math.nan))

    mask = _waterfilling_mask(inputs)
    if n == 1 or not mask.any():
        # nothing to trade off (or no concave head-room anywhere): the
        # surrogate objective rises in every coordinate, so the optimum is
        # a vertex of the budget simplex
        p = np.zeros(n)
        p[int(np.argmax(beta))] = budget
        return _allocation(inputs, p), SolveDiagnostics(0, 0.0, math.nan)

    lam_low = _smallest_usable_multiplier(inputs, mask)
    r_low = _masked_residual(inputs, lam_low, mask)
    if r_low < -tol:
        raise BracketFailureError(
            f"spent power short of budget at the smallest usable water "
            f"level (residual {r_low})")
    if r_low <= 0.0:
        p = _masked_candidates(inputs, lam_low, mask)
        return _allocation(inputs, p), SolveDiagnostics(0, r_low, lam_low)

    bracket = bracket_multiplier(inputs, tolerance=tol,
                                 max_iterations=max_iterations)
    lam_a, lam_b = bracket.lam_low, bracket.lam_high
    # converge from the under-budget side: only residuals in [-tol, 0] are
    # acceptable, and refinement continues toward the machine-precision
    # limit so the returned point is not left a full tolerance away
    best_lam = None
    best_residual = -math.inf
    r_b = _masked_residual(inputs, lam_b, mask)
    if -tol <= r_b <= 0.0:
        best_lam, best_residual = lam_b, r_b
    iterations = 0
    while iterations < max_iterations:
        iterations += 1
        lam = 0.5 * (lam_a + lam_b)
        if lam <= lam_a or lam >= lam_b:
            break
        residual = _masked_residual(inputs, lam, mask)
        if -tol <= residual <= 0.0 and residual > best_residual:
            best_lam, best_residual = lam, residual
            if residual == 0.0:
                break
        if residual > 0.0:
            lam_a = lam
        else:
            lam_b = lam
    if best_lam is None:
        raise BracketFailureError(
            f"bisection did not reach |residual| <= {tol} in "
            f"{iterations} iterations")
    p = _masked_candidates(inputs, best_lam, mask)
    return (_allocation(inputs, p),
            SolveDiagnostics(iterations, best_residual, best_lam))


def objective(inputs: KktInputs, per_user) -> float:
    """Surrogate sum-rate of a power vector, in bits/s/Hz."""
    p = np.asarray(per_user, dtype=float)
    s = float(int(inputs.s))
    terms = p * inputs.beta_sq / (s * (inputs.a - p))
    return float(np.log2(1.0 + terms).sum())


def rate_slope(inputs: KktInputs, per_user) -> np.ndarray:
    """First derivative of each user's surrogate rate at its power."""
    p = np.asarray(per_user, dtype=float)
    s = float(int(inputs.s))
    a = inputs.a
    return (a * inputs.beta_sq
            / (LN2 * (s * (a - p) + p * inputs.beta_sq) * (a - p)))


def sinr_curvature(inputs: KktInputs, per_user) -> np.ndarray:
    """Concavity certificate -2 beta^2 a / (S (a - p)^3) at each power."""
    p = np.asarray(per_user, dtype=float)
    s = float(int(inputs.s))
    a = inputs.a
    return -2.0 * inputs.beta_sq * a / (s * (a - p) ** 3)
