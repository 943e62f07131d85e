r"""Exact per-realization SINR and rates under conjugate beamforming.

The precoder is the Hermitian of the channel matrix normalized by its
Frobenius norm, so user k receives desired power (p_k/eta) |h_k h_k^H|^2
and leakage (p_i/eta) |h_k h_i^H|^2 from every other user i, against unit
noise. This module is the ground truth that every approximation in the
package is measured against.
"""

from dataclasses import dataclass

import numpy as np

from .channel import GramStats
from .config import PowerAllocation


class DimensionMismatchError(ValueError):
    """Power vector and Gram statistics describe different user counts."""


class NegativeSinrError(ValueError):
    """SINR values must be non-negative and finite."""


@dataclass(frozen=True)
class RateReport:
    """Per-user SINRs and rates plus their sum, in bits/s/Hz."""

    per_user_sinr: np.ndarray
    per_user_rate: np.ndarray
    sum_rate: float


def exact_sinr(stats: GramStats, allocation: PowerAllocation) -> np.ndarray:
    """Received SINR of every user for one channel realization."""
    p = allocation.per_user
    if p.size != stats.n_users:
        raise DimensionMismatchError(
            f"{p.size} powers for {stats.n_users} users")
    # cross_sq has a zero diagonal, so the matrix product sums over i != k
    interference = (stats.cross_sq @ p) / stats.eta
    desired = p * stats.beta_sq / stats.eta
    return desired / (interference + 1.0)


def rate_report(sinr) -> RateReport:
    """Shannon rates log2(1 + SINR) per user and their sum."""
    arr = np.asarray(sinr, dtype=float)
    if arr.ndim != 1:
        raise NegativeSinrError("sinr must be a 1-D vector")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise NegativeSinrError("sinr values must be finite and >= 0")
    arr = arr.copy()
    rates = np.log2(1.0 + arr)
    arr.setflags(write=False)
    rates.setflags(write=False)
    return RateReport(arr, rates, float(rates.sum()))


def evaluate(stats: GramStats, allocation: PowerAllocation) -> RateReport:
    """Rate report for an allocation on one realization."""
    return rate_report(exact_sinr(stats, allocation))
