"""Visits to a distinguished set: hitting times, excursion lengths, visit counts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tails import DomainError


@dataclass
class ExcursionRecord:
    """``sigma[0] = 0 < sigma[1] < ...`` are the visit times; ``nu = diff(sigma)``.

    The excursion still running at the horizon is not part of ``nu``; its
    elapsed length is kept in ``open_length`` and flagged by ``last_censored``.
    """

    sigma: np.ndarray
    horizon: int
    checkpoints: np.ndarray
    visits: np.ndarray
    last_censored: bool
    open_length: int

    @property
    def nu(self):
        return np.diff(self.sigma)

    def visits_at(self, t):
        """``N(t) = max{n : sigma_n <= t}``."""
        return np.searchsorted(self.sigma, np.asarray(t), side="right") - 1


def from_sigma(sigma, horizon, checkpoints=None) -> ExcursionRecord:
    sigma = np.asarray(sigma, dtype=np.int64)
    if sigma.size == 0 or sigma[0] != 0:
        raise DomainError("sigma must start at 0")
    if checkpoints is None:
        checkpoints = np.arange(horizon + 1)
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    visits = np.searchsorted(sigma, checkpoints, side="right") - 1
    open_length = int(horizon - sigma[-1])
    return ExcursionRecord(sigma, int(horizon), checkpoints, visits,
                           open_length > 0, open_length)


def record_excursions(membership, horizon=None, checkpoints=None) -> ExcursionRecord:
    """Build the record from a per-step membership stream ``1{Y_t in C}``, t = 0..T."""
    membership = np.asarray(membership, dtype=bool)
    if membership.size == 0 or not membership[0]:
        raise DomainError("membership[0] must be true (the walk starts in C)")
    if horizon is None:
        horizon = len(membership) - 1
    membership = membership[: horizon + 1]
    return from_sigma(np.flatnonzero(membership), horizon, checkpoints)


def sigma_growth_check(rec: ExcursionRecord, gamma, eps, burn_in=100):
    """Counts of ``n >= burn_in`` with ``sigma_n > n^(1/(gamma ^ 1) + eps)`` (upper)
    and ``sigma_n < n^(1/gamma - eps)`` (lower)."""
    if not 0 < gamma <= 1:
        raise DomainError("gamma must lie in (0, 1]")
    if not eps > 0:
        raise DomainError("eps must be positive")
    n = np.arange(len(rec.sigma))
    mask = n >= max(burn_in, 1)
    n, s = n[mask].astype(float), rec.sigma[mask].astype(float)
    upper = int(np.sum(s > n ** (1.0 / min(gamma, 1.0) + eps)))
    lower = int(np.sum(s < n ** (1.0 / gamma - eps)))
    return upper, lower


def visits_growth_check(rec: ExcursionRecord, gamma, eps, burn_in=1000, times=None):
    """Counts of ``t >= burn_in`` with ``N(t) < t^((gamma ^ 1) - eps)`` (lower)
    and ``N(t) > t^(gamma + eps)`` (upper), returned as ``(lower, upper)``."""
    if not 0 < gamma <= 1:
        raise DomainError("gamma must lie in (0, 1]")
    if not eps > 0:
        raise DomainError("eps must be positive")
    if times is None:
        times, visits = rec.checkpoints, rec.visits
    else:
        times = np.asarray(times)
        visits = rec.visits_at(times)
    mask = times >= max(burn_in, 1)
    t, v = times[mask].astype(float), visits[mask].astype(float)
    lower = int(np.sum(v < t ** (min(gamma, 1.0) - eps)))
    upper = int(np.sum(v > t ** (gamma + eps)))
    return lower, upper
