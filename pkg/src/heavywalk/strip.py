"""Random walk on a strip ``A x Z`` driven by an induced line chain.

The line index ``U_t`` is itself a Markov chain (finite ergodic, reflected
simple walk, or a Lamperti-type chain on ``Z+``).  The in-line jump of ``V_t``
is drawn from ``boundary_jump`` on the 0-line and from ``bulk_jump``
elsewhere, independently of the next line, so the law is translation
invariant in ``V``.  Jump magnitudes are rounded up to integers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np
from scipy.special import zeta

from . import _sampling
from .excursions import ExcursionRecord, from_sigma
from .seeding import stream
from .tails import DomainError, TailLaw
from .walk import IncrementLaw, ReplicaAborted, Trajectory, dyadic_checkpoints

FINITE = 0
LAMPERTI = 1
INDUCED_KINDS = ("finite-ergodic", "reflected-srw", "lamperti")


@dataclass(frozen=True)
class InducedChainSpec:
    kind: str
    matrix: tuple = ()
    gamma: float = 0.5
    sigma2: float = 1.0
    x_min: int = 1

    def __post_init__(self):
        if self.kind not in INDUCED_KINDS:
            raise DomainError(f"unknown induced chain kind {self.kind!r}")
        if self.kind == "finite-ergodic":
            m = np.asarray(self.matrix, dtype=np.float64)
            if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
                raise DomainError("matrix must be square and nonempty")
            if np.any(m < 0) or not np.allclose(m.sum(axis=1), 1.0, atol=1e-12):
                raise DomainError("matrix rows must be probability vectors")
            if not _irreducible(m):
                raise DomainError("induced chain must be irreducible")
            object.__setattr__(self, "matrix", tuple(tuple(float(v) for v in row) for row in m))
        else:
            if self.kind == "reflected-srw":
                object.__setattr__(self, "gamma", 0.5)
                object.__setattr__(self, "sigma2", 1.0)
            if not 0 < self.gamma <= 1:
                raise DomainError("gamma must lie in (0, 1]")
            if not 0 < self.sigma2 <= 1:
                raise DomainError("sigma2 must lie in (0, 1]")
            object.__setattr__(self, "x_min", max(int(self.x_min), _min_valid_site(self.gamma, self.sigma2)))

    @property
    def k(self):
        return len(self.matrix) if self.kind == "finite-ergodic" else math.inf

    @property
    def positive_recurrent(self):
        return self.kind == "finite-ergodic"

    @property
    def return_exponent(self):
        """Tail exponent of the return time to 0 (inf when positive recurrent)."""
        return math.inf if self.positive_recurrent else self.gamma

    def step_probs(self, x):
        """``(p, q)``: up and down probabilities at site ``x >= 1``."""
        if self.kind == "finite-ergodic":
            raise DomainError("step_probs is defined for chains on Z+")
        half = 0.5 * self.sigma2
        if x < self.x_min:
            return half, half
        d = (0.5 - self.gamma) / x
        return half * (1 + d), half * (1 - d)

    def kernel_args(self):
        if self.kind == "finite-ergodic":
            cum = np.cumsum(np.asarray(self.matrix), axis=1)
            cum[:, -1] = 1.0
            return FINITE, cum, 0.5, 1.0, 1
        return LAMPERTI, np.zeros((1, 1)), float(self.gamma), float(self.sigma2), int(self.x_min)

    def to_dict(self):
        return {"kind": self.kind, "matrix": [list(r) for r in self.matrix],
                "gamma": self.gamma, "sigma2": self.sigma2, "x_min": self.x_min}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["matrix"] = tuple(tuple(r) for r in d.get("matrix", ()))
        return cls(**d)


def _irreducible(m):
    k = m.shape[0]
    adj = m > 0
    for start in range(k):
        seen = {start}
        frontier = [start]
        while frontier:
            i = frontier.pop()
            for j in np.flatnonzero(adj[i]):
                if j not in seen:
                    seen.add(int(j))
                    frontier.append(int(j))
        if len(seen) < k:
            return False
    return True


def _min_valid_site(gamma, sigma2):
    # smallest x_min keeping p, q in [0, 1] for all x >= x_min
    x = 1
    while True:
        d = (0.5 - gamma) / x
        p, q = 0.5 * sigma2 * (1 + d), 0.5 * sigma2 * (1 - d)
        if 0 <= q and p <= 1 and p + q <= 1:
            return x
        x += 1


def build_lamperti(gamma, sigma2=1.0, x_min=1) -> InducedChainSpec:
    """Nearest-neighbour chain on Z+ with drift ``(1/2 - gamma) sigma2 / x``.

    ``p(x) = (sigma2/2)(1 + (1/2 - gamma)/x)``, ``q(x) = (sigma2/2)(1 - (1/2 - gamma)/x)``
    for ``x >= x_min``, symmetric below ``x_min``, holding otherwise; 0 reflects to 1.
    Return times to 0 then have tail exponent ``gamma``.
    """
    return InducedChainSpec("lamperti", gamma=gamma, sigma2=sigma2, x_min=x_min)


@dataclass(frozen=True)
class StripKernel:
    induced: InducedChainSpec
    boundary_jump: IncrementLaw
    bulk_jump: IncrementLaw

    def __post_init__(self):
        for name in ("boundary_jump", "bulk_jump"):
            shift = getattr(self, name).drift_shift
            if shift != int(shift):
                raise DomainError(f"{name}.drift_shift must be an integer on the strip")

    def line_mean(self, line):
        """``mu_l = E[V_{t+1} - V_t | U_t = l]`` (inf/nan when undefined)."""
        law = self.boundary_jump if line == 0 else self.bulk_jump
        p = law.probs[0] if not law.rule_probs else math.nan
        up = _ceil_mean(law.pos)
        down = _ceil_mean(law.neg)
        if math.isinf(up) and math.isinf(down) and 0 < p < 1:
            return math.nan
        terms = []
        if p > 0:
            terms.append(p * up)
        if p < 1:
            terms.append(-(1 - p) * down)
        return sum(terms) + law.drift_shift

    def to_dict(self):
        return {"induced": self.induced.to_dict(), "boundary_jump": self.boundary_jump.to_dict(),
                "bulk_jump": self.bulk_jump.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(InducedChainSpec.from_dict(d["induced"]),
                   IncrementLaw.from_dict(d["boundary_jump"]),
                   IncrementLaw.from_dict(d["bulk_jump"]))


def _ceil_mean(law: TailLaw):
    # E[ceil Z] = sum_{n >= 0} P[Z > n]
    if law.kind == "zero":
        return 0.0
    if law.kind == "constant":
        return float(math.ceil(law.bound))
    if law.kind == "bounded-uniform":
        b = law.bound
        return sum(max(0.0, 1 - n / b) for n in range(int(math.ceil(b))))
    if law.alpha <= 1:
        return math.inf
    if law.kind == "pareto":
        m = math.ceil(law.cutoff_x0)
        return m + law.cutoff_x0 ** law.alpha * float(zeta(law.alpha, m))
    return math.nan


@nb.njit(cache=True)
def induced_step(rng, code, cum, gamma, s2, xmin, u):
    r = rng.random()
    if code == FINITE:
        k = cum.shape[1]
        j = np.searchsorted(cum[u], r, side="right")
        return j if j < k else k - 1
    if u == 0:
        return 1
    half = 0.5 * s2
    if u >= xmin:
        d = (0.5 - gamma) / u
        p = half * (1.0 + d)
        q = half * (1.0 - d)
    else:
        p = half
        q = half
    if r < p:
        return u + 1
    if r < p + q:
        return u - 1
    return u


@nb.njit(cache=True)
def _induced_path(rng, code, cum, gamma, s2, xmin, horizon):
    out = np.empty(horizon + 1, np.int64)
    u = 0
    out[0] = 0
    for t in range(1, horizon + 1):
        u = induced_step(rng, code, cum, gamma, s2, xmin, u)
        out[t] = u
    return out


@nb.njit(cache=True)
def _return_time(rng, code, cum, gamma, s2, xmin, cap):
    u = 0
    for t in range(1, cap + 1):
        u = induced_step(rng, code, cum, gamma, s2, xmin, u)
        if u == 0:
            return t, False
    return cap, True


@nb.njit(cache=True)
def _strip_kernel(rng_u, rng_v, code, cum, gamma, s2, xmin,
                  b_pos, b_neg, b_breaks, b_probs, b_shift,
                  k_pos, k_neg, k_breaks, k_probs, k_shift,
                  horizon, checkpoints, keep_sigma):
    ncp = checkpoints.shape[0]
    values = np.empty(ncp)
    rmin = np.empty(ncp)
    rmax = np.empty(ncp)
    minc = np.empty(ncp)
    on0 = np.zeros(ncp, np.bool_)
    nvis = np.zeros(ncp, np.int64)
    sigma = np.empty(horizon + 1 if keep_sigma else 1, np.int64)
    sigma[0] = 0
    nsig = 1
    u = 0
    v = 0.0
    lo = 0.0
    hi = 0.0
    mi = 0.0
    cp = 0
    if checkpoints[0] == 0:
        values[0] = 0.0
        rmin[0] = 0.0
        rmax[0] = 0.0
        minc[0] = 0.0
        on0[0] = True
        cp = 1
    for t in range(1, horizon + 1):
        if u == 0:
            d = _sampling.draw_increment(rng_v, b_pos, b_neg, b_breaks, b_probs, b_shift, v, True)
        else:
            d = _sampling.draw_increment(rng_v, k_pos, k_neg, k_breaks, k_probs, k_shift, v, True)
        v += d
        if not np.isfinite(v):
            return values, rmin, rmax, minc, on0, nvis, sigma[:nsig], v, t
        u = induced_step(rng_u, code, cum, gamma, s2, xmin, u)
        if u == 0:
            if keep_sigma:
                sigma[nsig] = t
            nsig += 1
        if v < lo:
            lo = v
        if v > hi:
            hi = v
        if d > mi:
            mi = d
        if cp < ncp and checkpoints[cp] == t:
            values[cp] = v
            rmin[cp] = lo
            rmax[cp] = hi
            minc[cp] = mi
            on0[cp] = u == 0
            nvis[cp] = nsig - 1
            cp += 1
    return values, rmin, rmax, minc, on0, nvis, sigma[:nsig], v, -1


def _seed_path(seed):
    return tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)


def simulate_induced(spec: InducedChainSpec, horizon, seed):
    """Path ``U_0..U_T`` of the induced chain alone, on the same stream the strip uses."""
    rng = stream(*_seed_path(seed), "U")
    return _induced_path(rng, *spec.kernel_args(), int(horizon))


def sample_return_time(spec: InducedChainSpec, cap, seed):
    """One return time to 0 started from 0; ``(nu, censored)`` with ``nu = cap`` if capped."""
    rng = stream(*_seed_path(seed), "U")
    nu, cens = _return_time(rng, *spec.kernel_args(), int(cap))
    return int(nu), bool(cens)


def return_time_sample(spec: InducedChainSpec, n, cap, master_seed):
    """``n`` independent excursion lengths; excursion ``i`` uses replica stream ``i``."""
    nu = np.empty(n, np.int64)
    cens = np.empty(n, bool)
    for i in range(n):
        nu[i], cens[i] = sample_return_time(spec, cap, (master_seed, i))
    return nu, cens


@dataclass
class StripRun:
    trajectory: Trajectory
    excursions: ExcursionRecord
    on_boundary: np.ndarray


def simulate_strip(kernel: StripKernel, horizon, seed, checkpoints=None, keep_sigma=True) -> StripRun:
    """Joint evolution of ``(U_t, V_t)`` from ``(0, 0)``.

    ``U`` and ``V`` draw from separate sub-streams (``"U"`` and ``"V"``), so the
    ``U`` path equals :func:`simulate_induced` with the same seed.
    """
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    path = _seed_path(seed)
    cps = dyadic_checkpoints(horizon) if checkpoints is None else np.asarray(checkpoints, np.int64)
    b = kernel.boundary_jump.kernel_args()
    k = kernel.bulk_jump.kernel_args()
    values, rmin, rmax, minc, on0, nvis, sigma, v, abort = _strip_kernel(
        stream(*path, "U"), stream(*path, "V"), *kernel.induced.kernel_args(),
        *b, *k, int(horizon), cps, bool(keep_sigma))
    if abort >= 0:
        raise ReplicaAborted(int(abort), float(v))
    traj = Trajectory(cps, values, rmin, rmax, minc, int(horizon))
    if keep_sigma:
        rec = from_sigma(sigma, horizon, cps)
    else:
        rec = ExcursionRecord(np.zeros(1, np.int64), int(horizon), cps, nvis, False, 0)
    return StripRun(traj, rec, on0)


@dataclass(frozen=True)
class Regime:
    kind: str
    direction: int = 0
    slope: float | None = None
    case: str = ""

    def __str__(self):
        if self.kind == "unclassified":
            return "unclassified"
        sign = "+inf" if self.direction > 0 else "-inf"
        return f"{self.kind}({sign}, slope={self.slope:g})"


UNCLASSIFIED = Regime("unclassified")


def _classify_oriented(induced, b_up, b_down, k_up, k_down):
    # b_*: boundary-line tail exponents, k_*: bulk tail exponents, oriented so
    # that the boundary's heavy side points up and the bulk's heavy side down.
    beta_sup = min(b_down, k_down, k_up)
    alpha = b_up
    if induced.positive_recurrent:
        if 0 < alpha < 1 and beta_sup > alpha:
            return Regime("boundary-dominates", 1, 1.0 / alpha, "positive-recurrent")
        return None
    gamma = induced.gamma
    if 0 < alpha < 1 and alpha < gamma * min(beta_sup, 1.0):
        return Regime("boundary-dominates", 1, gamma / alpha, "null-recurrent boundary")
    beta = k_down
    if gamma < 1 and 0 < beta < 1 and k_up > beta and min(b_up, b_down, 1.0) > gamma * beta:
        return Regime("bulk-dominates", -1, 1.0 / beta, "null-recurrent bulk")
    return None


def classify_regime(kernel: StripKernel) -> Regime:
    """Predicted direction and growth exponent of ``V_t`` from ``(alpha, beta, gamma)``.

    Depends only on tail exponents of the line laws and the return-time
    exponent of the induced chain; deterministic shifts never enter.
    Equality cases fall through to ``unclassified``.
    """
    b, k = kernel.boundary_jump, kernel.bulk_jump
    up = _classify_oriented(kernel.induced, b.up_exponent, b.down_exponent,
                            k.up_exponent, k.down_exponent)
    down = _classify_oriented(kernel.induced, b.down_exponent, b.up_exponent,
                              k.down_exponent, k.up_exponent)
    if up is not None and down is None:
        return up
    if down is not None and up is None:
        return Regime(down.kind, -down.direction, down.slope, down.case)
    return UNCLASSIFIED
