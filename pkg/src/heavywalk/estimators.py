"""Tail-exponent and growth-exponent estimates from simulated samples."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .seeding import data_seed, stream
from .tails import DomainError

N_BOOTSTRAP = 500


class DegenerateSampleError(DomainError):
    """Too few distinct values for the requested order statistics."""


@dataclass(frozen=True)
class ExponentEstimate:
    point: float
    ci_lo: float
    ci_hi: float
    method: str
    n_effective: int
    flags: tuple = field(default=())

    def __post_init__(self):
        if not self.ci_lo <= self.point <= self.ci_hi:
            raise ValueError("confidence interval must contain the point estimate")
        if self.n_effective <= 0:
            raise ValueError("n_effective must be positive")

    def to_dict(self):
        return {"method": self.method, "point": self.point,
                "ci": [self.ci_lo, self.ci_hi], "n": self.n_effective,
                "flags": list(self.flags)}


def _positive_sample(samples, name="samples"):
    x = check_array(np.asarray(samples, dtype=float).reshape(-1, 1),
                    ensure_min_samples=1, input_name=name).ravel()
    if np.any(x <= 0):
        raise DomainError(f"{name} must be positive")
    return x


def _censor_flags(censored, n):
    if censored is None:
        return np.zeros(n, dtype=bool)
    c = np.asarray(censored, dtype=bool).ravel()
    if c.shape[0] != n:
        raise DomainError("censored must have one flag per sample")
    return c


def _percentile_ci(point, draws):
    draws = draws[np.isfinite(draws)]
    if draws.size == 0:
        return point, point
    lo, hi = np.percentile(draws, [2.5, 97.5])
    return min(lo, point), max(hi, point)


def _hill_core(x, c, k):
    # Top k order statistics against the (k+1)-th largest; censored tops
    # contribute log-excess but no event.
    idx = np.argpartition(x, x.size - k - 1)
    thresh = x[idx[x.size - k - 1]]
    top = idx[x.size - k:]
    denom = np.sum(np.log(x[top] / thresh))
    events = k - int(np.count_nonzero(c[top]))
    if denom <= 0 or events <= 0:
        return math.nan
    return events / denom


def hill_estimate(samples, k=None, censored=None, n_bootstrap=N_BOOTSTRAP) -> ExponentEstimate:
    """Hill tail index from the ``k`` largest values; ``k`` defaults to ``floor(n^0.6)``.

    ``censored`` marks right-censored values (e.g. capped excursions). They stay
    in the order statistics, and only uncensored tops count as events.
    """
    x = _positive_sample(samples)
    c = _censor_flags(censored, x.size)
    n = x.size
    if k is None:
        k = int(math.floor(n ** 0.6))
    k = int(k)
    if k < 10 or k >= n:
        raise DomainError(f"k={k} outside [10, n) with n={n}")
    if np.unique(x).size < k + 1:
        raise DegenerateSampleError(f"fewer than k+1={k + 1} distinct values")
    point = _hill_core(x, c, k)
    if not np.isfinite(point):
        raise DegenerateSampleError("no uncensored values among the top order statistics")

    rng = stream(data_seed(x), "bootstrap", "hill")
    draws = np.empty(n_bootstrap)
    for b in range(n_bootstrap):
        i = rng.integers(0, n, n)
        draws[b] = _hill_core(x[i], c[i], k)
    lo, hi = _percentile_ci(point, draws)
    return ExponentEstimate(float(point), float(lo), float(hi), "hill", k)


class HillEstimator(BaseEstimator):
    """Tail index estimator with the usual ``fit`` / ``get_params`` surface.

    ``X`` is a single column of positive samples; ``censored`` may be passed
    to ``fit`` as a boolean array of the same length.
    """

    def __init__(self, k=None, n_bootstrap=N_BOOTSTRAP):
        self.k = k
        self.n_bootstrap = n_bootstrap

    def fit(self, X, y=None, censored=None):
        X = check_array(X, ensure_2d=False)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise DomainError("HillEstimator expects a single column of samples")
            X = X[:, 0]
        est = hill_estimate(X, self.k, censored, self.n_bootstrap)
        self.estimate_ = est
        self.alpha_ = est.point
        self.ci_ = (est.ci_lo, est.ci_hi)
        self.k_ = est.n_effective
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        """Fitted tail probability ``P[Z > x]`` relative to the Hill threshold scale."""
        check_is_fitted(self, "alpha_")
        x = check_array(np.asarray(X, float).reshape(-1, 1)).ravel()
        return np.minimum(1.0, np.power(np.maximum(x, 1e-300), -self.alpha_))


def loglog_slope(traj, burn_in=1, absolute=False) -> ExponentEstimate:
    """Least-squares slope of ``log max(X_t, 1)`` on ``log t`` over checkpoints ``t >= burn_in``.

    With ``absolute=True`` the response is ``log max(|X_t|, 1)``. The interval
    is the 95% regression interval of the slope.
    """
    t = np.asarray(traj.times, dtype=float)
    v = np.asarray(traj.values, dtype=float)
    mask = t >= max(burn_in, 1)
    t, v = t[mask], v[mask]
    if t.size < 5:
        raise DomainError(f"need at least 5 checkpoints past burn_in, got {t.size}")
    if absolute:
        v = np.abs(v)
    y = np.log(np.maximum(v, 1.0))
    lx = np.log(t)
    fit = stats.linregress(lx, y)
    slope = float(fit.slope)
    if fit.stderr > 0 and np.isfinite(fit.stderr):
        half = stats.t.ppf(0.975, t.size - 2) * fit.stderr
    else:
        half = 0.0
    return ExponentEstimate(slope, slope - half, slope + half, "loglog-slope", int(t.size))


def growth_ratio(traj, absolute=False) -> float:
    """``log max(X_T, 1) / log T`` at the final checkpoint."""
    T = float(traj.times[-1])
    if T < 2:
        raise DomainError("horizon must be at least 2")
    v = float(traj.values[-1])
    if absolute:
        v = abs(v)
    return math.log(max(v, 1.0)) / math.log(T)


def kaplan_meier(samples, censored=None):
    """Event times and the product-limit survival just after each of them."""
    x = np.asarray(samples, dtype=float)
    c = _censor_flags(censored, x.size)
    order = np.argsort(x, kind="stable")
    x, ev = x[order], ~c[order]
    times, first = np.unique(x, return_index=True)
    at_risk = x.size - first
    deaths = np.add.reduceat(ev.astype(np.int64), first)
    keep = deaths > 0
    surv = np.cumprod(1.0 - deaths[keep] / at_risk[keep])
    return times[keep], surv


def _survival_at(times, surv, grid):
    i = np.searchsorted(times, grid, side="right") - 1
    return np.where(i >= 0, surv[np.maximum(i, 0)], 1.0)


def default_survival_grid(samples, censored=None, points=12):
    """Geometric grid from the uncensored median to the largest ``t`` still
    exceeded by ``max(10, 0.1% n)`` uncensored values."""
    x = np.asarray(samples, dtype=float)
    c = _censor_flags(censored, x.size)
    obs = np.sort(x[~c])
    m = max(10, int(math.ceil(0.001 * x.size)))
    if obs.size <= m:
        raise DomainError("too few uncensored samples for a default grid")
    lo = float(np.median(obs))
    hi = float(obs[-m - 1])
    if not hi > lo > 0:
        raise DomainError("uncensored range too narrow for a survival grid")
    return np.geomspace(lo, hi, points)


def _grid_slope(lt, ls):
    ok = np.isfinite(ls)
    if ok.sum() < 3:
        return math.nan
    return float(np.polyfit(lt[ok], ls[ok], 1)[0])


def _rss(u, y):
    return float(np.sum((y - np.polyval(np.polyfit(u, y, 1), u)) ** 2))


def _exponential_like(grid, ls):
    ok = np.isfinite(ls)
    if ok.sum() < 4:
        return False
    g, y = grid[ok], ls[ok]
    rss_log = _rss(np.log(g), y)
    return rss_log > 0 and _rss(g, y) < 0.2 * rss_log


def survival_slope(samples, censored=None, t_grid=None, n_bootstrap=N_BOOTSTRAP) -> ExponentEstimate:
    """Slope of ``log S(t)`` on ``log t`` for the Kaplan-Meier survival ``S``.

    Censored values only enter the at-risk sets. The flag
    ``"all-moments-finite"`` is raised when ``log S`` is fitted far better by a
    line in ``t`` than by a line in ``log t`` (residual ratio below 0.2), the
    signature of an exponential tail.
    """
    x = _positive_sample(samples)
    c = _censor_flags(censored, x.size)
    n_obs = int(np.count_nonzero(~c))
    if n_obs == 0:
        raise DomainError("all samples are censored")
    if n_obs < 100:
        raise DomainError(f"need at least 100 uncensored samples, got {n_obs}")
    grid = default_survival_grid(x, c) if t_grid is None else np.asarray(t_grid, float)
    obs_max = x[~c].max()
    if grid.size < 3 or np.any(grid <= 0) or grid.max() > obs_max:
        raise DomainError("grid must hold >= 3 positive points within the uncensored range")
    lt = np.log(grid)

    def fit(xs, cs):
        times, surv = kaplan_meier(xs, cs)
        s = _survival_at(times, surv, grid)
        with np.errstate(divide="ignore"):
            return np.log(s)

    ls = fit(x, c)
    point = _grid_slope(lt, ls)
    if not np.isfinite(point):
        raise DomainError("survival vanishes on the grid")

    flags = ("all-moments-finite",) if _exponential_like(grid, ls) else ()

    rng = stream(data_seed(np.concatenate([x, c.astype(float)])), "bootstrap", "survival")
    draws = np.empty(n_bootstrap)
    for b in range(n_bootstrap):
        i = rng.integers(0, x.size, x.size)
        draws[b] = _grid_slope(lt, fit(x[i], c[i]))
    lo, hi = _percentile_ci(point, draws)
    return ExponentEstimate(point, float(lo), float(hi), "survival-slope", n_obs, flags)


def moment_diagnostic(samples, p) -> str:
    """Classify ``E[Z^p]`` as ``"converging"``, ``"diverging"`` or ``"inconclusive"``.

    The running moment at block size s is the median over disjoint blocks of
    the block means of ``Z^p``, for s = n/16, n/8, n/4, n/2. Converging when
    every doubling moves it by under 10%; diverging when it grows by over 50%
    overall and the largest term holds at least 10% of the total.
    """
    x = _positive_sample(samples)
    if x.size < 1000:
        raise DomainError("need at least 1000 samples")
    if p == 0:
        return "converging"
    with np.errstate(over="ignore"):
        z = np.power(x, float(p))
    if not np.all(np.isfinite(z)):
        return "diverging"
    n = z.size
    m = np.array([np.median(z[: (n // s) * s].reshape(-1, s).mean(axis=1))
                  for s in (n // 16, n // 8, n // 4, n // 2)])
    changes = np.abs(np.diff(m)) / m[:-1]
    if np.all(changes < 0.10):
        return "converging"
    if m[-1] > 1.5 * m[0] and z.max() >= 0.10 * z.sum():
        return "diverging"
    return "inconclusive"
