"""Adapted-process simulator with single-pass stopping-time bookkeeping.

Paths start at ``X_0 = 0`` and are summarised at checkpoint times only
(dyadic by default), so memory does not grow with the horizon.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from . import _sampling
from .seeding import stream
from .tails import DomainError, TailLaw


class ReplicaAborted(RuntimeError):
    """A replica produced a non-finite state."""

    def __init__(self, time, state):
        super().__init__(f"non-finite state {state!r} at t={time}")
        self.time = time
        self.state = state


@dataclass(frozen=True)
class IncrementLaw:
    """Signed increment ``Delta = Delta+ - Delta- + drift_shift``.

    The sign is positive with probability ``p_pos`` or, when a rule table is
    given, with probability ``rule_probs[i]`` on the ``i``-th state interval cut
    by ``rule_breaks``.  Tables should stay bounded away from 0 and 1 for the
    uniformity the asymptotic results assume; this is documented, not checked.
    """

    pos: TailLaw
    neg: TailLaw
    p_pos: float = 0.5
    drift_shift: float = 0.0
    rule_breaks: tuple = ()
    rule_probs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "rule_breaks", tuple(float(b) for b in self.rule_breaks))
        object.__setattr__(self, "rule_probs", tuple(float(p) for p in self.rule_probs))
        if not 0.0 <= self.p_pos <= 1.0:
            raise DomainError("p_pos must lie in [0, 1]")
        if self.rule_probs:
            if len(self.rule_probs) != len(self.rule_breaks) + 1:
                raise DomainError("rule_probs needs len(rule_breaks) + 1 entries")
            if any(not 0.0 <= p <= 1.0 for p in self.rule_probs):
                raise DomainError("rule probabilities must lie in [0, 1]")
            if list(self.rule_breaks) != sorted(self.rule_breaks):
                raise DomainError("rule_breaks must be sorted")
        elif self.rule_breaks:
            raise DomainError("rule_breaks given without rule_probs")
        if not math.isfinite(self.drift_shift):
            raise DomainError("drift_shift must be finite")

    @property
    def probs(self):
        return self.rule_probs if self.rule_probs else (self.p_pos,)

    @property
    def up_possible(self):
        return max(self.probs) > 0.0

    @property
    def down_possible(self):
        return min(self.probs) < 1.0

    @property
    def up_exponent(self):
        """Tail exponent of the positive part (inf when bounded or absent)."""
        return self.pos.tail_exponent if self.up_possible else math.inf

    @property
    def down_exponent(self):
        return self.neg.tail_exponent if self.down_possible else math.inf

    def max_step(self):
        """Largest possible increment (inf when the positive side is heavy)."""
        up = self.pos.upper_bound if self.up_possible else -math.inf
        down = 0.0 if self.down_possible else -math.inf
        # the negative side contributes at most 0 before the shift
        if self.down_possible and self.neg.kind == "constant":
            down = -self.neg.bound
        return max(up, down) + self.drift_shift

    def kernel_args(self):
        breaks = np.asarray(self.rule_breaks, dtype=np.float64)
        probs = np.asarray(self.probs, dtype=np.float64)
        return self.pos.as_array(), self.neg.as_array(), breaks, probs, float(self.drift_shift)

    def to_dict(self):
        return {
            "pos": self.pos.to_dict(), "neg": self.neg.to_dict(), "p_pos": self.p_pos,
            "drift_shift": self.drift_shift, "rule_breaks": list(self.rule_breaks),
            "rule_probs": list(self.rule_probs),
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["pos"] = TailLaw.from_dict(d["pos"])
        d["neg"] = TailLaw.from_dict(d["neg"])
        return cls(**d)


def sample_increments(law: IncrementLaw, n, rng, state=0.0, integer=False):
    """``n`` independent increments drawn at a fixed state."""
    pos, neg, breaks, probs, shift = law.kernel_args()
    return _draw_many(rng, pos, neg, breaks, probs, shift, float(state), int(n), integer)


@nb.njit(cache=True)
def _draw_many(rng, pos, neg, breaks, probs, shift, x, n, integer):
    out = np.empty(n)
    for i in range(n):
        out[i] = _sampling.draw_increment(rng, pos, neg, breaks, probs, shift, x, integer)
    return out


@dataclass(frozen=True)
class Censored:
    """First passage not observed by the horizon."""

    horizon: int


@dataclass(frozen=True)
class Unresolved:
    """Path still at or below the level at the horizon; true exit may be later."""

    last: int
    horizon: int


@dataclass
class Trajectory:
    times: np.ndarray
    values: np.ndarray
    run_min: np.ndarray
    run_max: np.ndarray
    max_inc: np.ndarray
    horizon: int

    def __len__(self):
        return len(self.times)

    def scaled(self, c):
        return Trajectory(self.times, self.values * c, self.run_min * c,
                          self.run_max * c, self.max_inc * c, self.horizon)


@dataclass
class StoppingRecord:
    levels: np.ndarray
    tau_times: np.ndarray
    tau_censored: np.ndarray
    lam_times: np.ndarray
    lam_unresolved: np.ndarray
    horizon: int
    tau: dict = field(init=False)
    lam: dict = field(init=False)

    def __post_init__(self):
        self.tau = {}
        self.lam = {}
        for i, x in enumerate(self.levels.tolist()):
            self.tau[x] = Censored(self.horizon) if self.tau_censored[i] else int(self.tau_times[i])
            if self.lam_times[i] < 0:
                self.lam[x] = None
            elif self.lam_unresolved[i]:
                self.lam[x] = Unresolved(int(self.lam_times[i]), self.horizon)
            else:
                self.lam[x] = int(self.lam_times[i])


def dyadic_checkpoints(horizon):
    """``{0, 1, 2, 4, ..., 2^k <= T} | {T}``."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    pts = [0]
    t = 1
    while t <= horizon:
        pts.append(t)
        t *= 2
    if pts[-1] != horizon:
        pts.append(horizon)
    return np.asarray(pts, dtype=np.int64)


@nb.njit(cache=True)
def _walk_kernel(rng, pos, neg, breaks, probs, shift, horizon, checkpoints, levels):
    ncp = checkpoints.shape[0]
    nlev = levels.shape[0]
    values = np.empty(ncp)
    rmin = np.empty(ncp)
    rmax = np.empty(ncp)
    minc = np.empty(ncp)
    tau = np.full(nlev, -1, np.int64)
    stamp = np.full(nlev + 1, -1, np.int64)
    x = 0.0
    lo = 0.0
    hi = 0.0
    mi = 0.0
    ptr = 0
    while ptr < nlev and x >= levels[ptr]:
        tau[ptr] = 0
        ptr += 1
    stamp[np.searchsorted(levels, x)] = 0
    cp = 0
    if checkpoints[0] == 0:
        values[0] = 0.0
        rmin[0] = 0.0
        rmax[0] = 0.0
        minc[0] = 0.0
        cp = 1
    for t in range(1, horizon + 1):
        d = _sampling.draw_increment(rng, pos, neg, breaks, probs, shift, x, False)
        x += d
        if not np.isfinite(x):
            return values, rmin, rmax, minc, tau, stamp, x, t
        if x < lo:
            lo = x
        if x > hi:
            hi = x
        if d > mi:
            mi = d
        while ptr < nlev and x >= levels[ptr]:
            tau[ptr] = t
            ptr += 1
        stamp[np.searchsorted(levels, x)] = t
        if cp < ncp and checkpoints[cp] == t:
            values[cp] = x
            rmin[cp] = lo
            rmax[cp] = hi
            minc[cp] = mi
            cp += 1
    return values, rmin, rmax, minc, tau, stamp, x, -1


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(seed)


def simulate_walk(law: IncrementLaw, horizon: int, seed, levels=(), checkpoints=None):
    """Simulate one replica; returns ``(Trajectory, StoppingRecord)``.

    ``seed`` is an int (a root stream) or a ready ``numpy.random.Generator``.
    Raises :class:`ReplicaAborted` if the state becomes non-finite.
    """
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    cps = dyadic_checkpoints(horizon) if checkpoints is None else np.asarray(checkpoints, np.int64)
    lev = np.sort(np.asarray(levels, dtype=np.float64))
    if lev.size and not np.all(np.isfinite(lev)):
        raise DomainError("levels must be finite")
    pos, neg, breaks, probs, shift = law.kernel_args()
    values, rmin, rmax, minc, tau, stamp, x, abort = _walk_kernel(
        _as_rng(seed), pos, neg, breaks, probs, shift, int(horizon), cps, lev)
    if abort >= 0:
        raise ReplicaAborted(int(abort), float(x))
    traj = Trajectory(cps, values, rmin, rmax, minc, int(horizon))
    # stamp[j] = last t with levels[j-1] < X_t <= levels[j]; prefix max gives lambda
    lam = np.maximum.accumulate(stamp[:-1]) if lev.size else np.empty(0, np.int64)
    rec = StoppingRecord(lev, np.where(tau < 0, horizon, tau), tau < 0,
                         lam, (lam >= 0) & (x <= lev), int(horizon))
    return traj, rec


def simulate_path(law: IncrementLaw, horizon: int, seed):
    """Full path ``X_0..X_T`` (small horizons only; uses the same kernel)."""
    traj, _ = simulate_walk(law, horizon, seed, checkpoints=np.arange(horizon + 1))
    return traj.values


@nb.njit(cache=True)
def _passage_kernel(rng, pos, neg, breaks, probs, shift, horizon, levels, max_step):
    nlev = levels.shape[0]
    tau = np.full(nlev, -1, np.int64)
    x = 0.0
    ptr = 0
    while ptr < nlev and x >= levels[ptr]:
        tau[ptr] = 0
        ptr += 1
    for t in range(1, horizon + 1):
        if ptr >= nlev:
            break
        # exact early censoring: the next level is out of reach even at max speed
        if x + max_step * (horizon - t + 1) < levels[ptr]:
            break
        x += _sampling.draw_increment(rng, pos, neg, breaks, probs, shift, x, False)
        if not np.isfinite(x):
            return tau, t
        while ptr < nlev and x >= levels[ptr]:
            tau[ptr] = t
            ptr += 1
    return tau, -1


def simulate_passage(law: IncrementLaw, horizon: int, seed, levels):
    """First-passage times only, stopping as soon as every level is decided.

    When the positive side is bounded a level ``x`` is declared censored once
    ``X_t + max_step * (T - t) < x``, which is exact, not an approximation.
    Returns ``(tau_times, tau_censored)`` aligned with ``sorted(levels)``.
    """
    lev = np.sort(np.asarray(levels, dtype=np.float64))
    pos, neg, breaks, probs, shift = law.kernel_args()
    tau, abort = _passage_kernel(_as_rng(seed), pos, neg, breaks, probs, shift,
                                 int(horizon), lev, float(law.max_step()))
    if abort >= 0:
        raise ReplicaAborted(int(abort), math.nan)
    return np.where(tau < 0, horizon, tau), tau < 0


def first_passage(path, x):
    """``min{t : X_t >= x}`` on a full path, or :class:`Censored`."""
    path = np.asarray(path, dtype=np.float64)
    if path.size == 0:
        raise DomainError("path must be nonempty")
    hits = np.flatnonzero(path >= x)
    return int(hits[0]) if hits.size else Censored(len(path) - 1)


def last_exit(path, x):
    """``max{t <= T : X_t <= x}``; :class:`Unresolved` if ``X_T <= x``; None if never."""
    path = np.asarray(path, dtype=np.float64)
    if path.size == 0:
        raise DomainError("path must be nonempty")
    below = np.flatnonzero(path <= x)
    if below.size == 0:
        return None
    horizon = len(path) - 1
    if below[-1] == horizon:
        return Unresolved(horizon, horizon)
    return int(below[-1])


@dataclass(frozen=True)
class UpperEnvelope:
    """``t^(1/theta) (log t)^((phi+2)/theta + eps)``; at theta = 1 the exponent is ``(1+phi)^+ + 1 + eps``."""

    theta: float
    phi: float = 0.0
    eps: float = 0.5
    side = "upper"

    def __post_init__(self):
        if not 0 < self.theta <= 1:
            raise DomainError("theta must lie in (0, 1]")
        if not self.eps > 0:
            raise DomainError("eps must be positive")

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.theta == 1.0:
            power = max(1.0 + self.phi, 0.0) + 1.0 + self.eps
        else:
            power = (self.phi + 2.0) / self.theta + self.eps
        return t ** (1.0 / self.theta) * np.log(t) ** power


@dataclass(frozen=True)
class LowerEnvelope:
    """``t^(1/alpha) (log t)^(-(1/alpha) - eps)``."""

    alpha: float
    eps: float = 0.5
    side = "lower"

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")
        if not self.eps > 0:
            raise DomainError("eps must be positive")

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        return t ** (1.0 / self.alpha) * np.log(t) ** (-1.0 / self.alpha - self.eps)


def _count_violations(times, series, bound, burn_in):
    if burn_in < 3:
        raise DomainError("burn_in must be >= 3")
    mask = np.asarray(times) >= burn_in
    if not mask.any():
        return 0
    env = bound(np.asarray(times)[mask])
    vals = np.asarray(series)[mask]
    bad = vals > env if bound.side == "upper" else vals < env
    return int(bad.sum())


def envelope_check(traj: Trajectory, bound, burn_in: int) -> int:
    """Checkpoints ``t >= burn_in`` where ``X_t`` breaks the envelope."""
    return _count_violations(traj.times, traj.values, bound, burn_in)


def max_increment_envelope(traj: Trajectory, alpha: float, eps: float, burn_in: int) -> int:
    return _count_violations(traj.times, traj.max_inc, LowerEnvelope(alpha, eps), burn_in)
