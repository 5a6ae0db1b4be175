"""Lyapunov functions and Monte Carlo checks of their one-step drift."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .seeding import stream
from .tails import DomainError, TailLaw
from .walk import IncrementLaw, sample_increments, simulate_walk

W_CAP = 1e9
Z95 = 1.959963984540054

KINDS = ("f-power-decay", "w-power", "concave-h", "identity", "monomial")

LE0 = "<=0 confirmed"
GE0 = ">=0 confirmed"
STRONG = "<=-eps*W^eta confirmed"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class LyapunovSpec:
    """A scalar transform of the state.

    * ``f-power-decay``: 1 on ``y <= z``, ``(1 + y - z)^-delta`` above.
    * ``w-power``: ``(y - x)^gamma`` below ``y``, 0 from ``y`` on, capped at ``W_CAP``.
    * ``concave-h``: ``max(x, 0)^theta`` with ``theta`` in (0, 1].
    * ``identity``: ``x``.
    * ``monomial``: ``x^power``.
    """

    kind: str
    z: float = 0.0
    delta: float = 1.0
    y: float = 0.0
    gamma: float = 1.0
    theta: float = 0.5
    power: float = 2.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown Lyapunov kind {self.kind!r}")
        if self.kind == "f-power-decay" and not self.delta > 0:
            raise DomainError("delta must be positive")
        if self.kind == "w-power" and not self.gamma > 0:
            raise DomainError("gamma must be positive")
        if self.kind == "concave-h" and not 0 < self.theta <= 1:
            raise DomainError("theta must lie in (0, 1]")

    @classmethod
    def f_power_decay(cls, z=0.0, delta=1.0):
        return cls("f-power-decay", z=z, delta=delta)

    @classmethod
    def w_power(cls, y=0.0, gamma=1.0):
        return cls("w-power", y=y, gamma=gamma)

    @classmethod
    def concave_h(cls, theta=0.5):
        return cls("concave-h", theta=theta)

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def monomial(cls, power=2.0):
        return cls("monomial", power=power)

    def inverse_h(self, v):
        """Inverse of the ``concave-h`` transform on ``[0, inf)``."""
        if self.kind != "concave-h":
            raise DomainError("inverse only defined for concave-h")
        return np.power(np.asarray(v, float), 1.0 / self.theta)

    def to_dict(self):
        return {k: getattr(self, k) for k in ("kind", "z", "delta", "y", "gamma", "theta", "power")}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _eval(spec: LyapunovSpec, x):
    x = np.asarray(x, dtype=float)
    if spec.kind == "f-power-decay":
        gap = np.maximum(x - spec.z, 0.0)
        return np.where(x <= spec.z, 1.0, np.power(1.0 + gap, -spec.delta))
    if spec.kind == "w-power":
        gap = np.maximum(spec.y - x, 0.0)
        return np.minimum(np.power(gap, spec.gamma), W_CAP)
    if spec.kind == "concave-h":
        return np.power(np.maximum(x, 0.0), spec.theta)
    if spec.kind == "identity":
        return x.copy()
    return np.power(x, spec.power)


def eval_lyapunov(spec: LyapunovSpec, state):
    """Exact function value; arrays are evaluated elementwise."""
    out = _eval(spec, state)
    return float(out) if out.ndim == 0 else out


def _cap_hits(spec, values):
    if spec.kind != "w-power":
        return 0
    return int(np.count_nonzero(values >= W_CAP))


def _drift_sample(law, spec, state, n, rng):
    inc = sample_increments(law, n, rng, state)
    after = _eval(spec, state + inc)
    return after - _eval(spec, state), _cap_hits(spec, after)


def _mean_ci(d):
    mean = float(np.mean(d))
    if d.size < 2:
        return mean, 0.0
    sd = float(np.std(d, ddof=1))
    return mean, Z95 * sd / math.sqrt(d.size)


def drift_estimate(law: IncrementLaw, spec: LyapunovSpec, state, n, seed):
    """Monte Carlo ``E[V(x + Delta) - V(x)]`` at ``x = state`` with a 95% normal half-width."""
    if n < 1000:
        raise DomainError("n must be at least 1000")
    rng = seed if isinstance(seed, np.random.Generator) else stream(seed, "drift", repr(float(state)))
    d, _ = _drift_sample(law, spec, float(state), int(n), rng)
    return _mean_ci(d)


@dataclass(frozen=True)
class Direction:
    """``supermartingale``, ``submartingale`` or ``strong-drift`` with ``(eta, eps)``."""

    kind: str
    eta: float = 0.0
    eps: float = 0.0

    def __post_init__(self):
        if self.kind not in ("supermartingale", "submartingale", "strong-drift"):
            raise DomainError(f"unknown direction {self.kind!r}")
        if self.kind == "strong-drift" and not (self.eta > 0 and self.eps > 0):
            raise DomainError("strong-drift needs eta > 0 and eps > 0")

    @classmethod
    def parse(cls, d):
        if isinstance(d, cls):
            return d
        if isinstance(d, str):
            return cls(d)
        if isinstance(d, (tuple, list)):
            return cls(*d)
        return cls(**d)

    @property
    def confirmed_label(self):
        return _LABELS[self.kind]


_LABELS = {"supermartingale": LE0, "submartingale": GE0, "strong-drift": STRONG}


@dataclass
class DriftReport:
    grid: list
    mean_drift: list
    ci_half_width: list
    n_samples: int
    verdicts: list
    direction: str
    A: float | None = None
    cap_hits: int = 0
    targets: list = field(default_factory=list)

    @property
    def region_confirmed(self):
        """True when ``A`` was found and every grid state from it onward is confirmed."""
        if self.A is None:
            return False
        i = self.grid.index(self.A)
        label = _LABELS[self.direction]
        return all(v == label for v in self.verdicts[i:])

    def to_dict(self):
        return {"grid": self.grid, "mean_drift": self.mean_drift,
                "ci_half_width": self.ci_half_width, "n_samples": self.n_samples,
                "verdicts": self.verdicts, "direction": self.direction, "A": self.A,
                "cap_hits": self.cap_hits}


def _verdict(mean, hw, direction: Direction, target):
    if direction.kind == "strong-drift":
        return STRONG if mean + hw <= target else INCONCLUSIVE
    if mean + hw <= 0:
        return LE0
    if mean - hw >= 0:
        return GE0
    return INCONCLUSIVE


def verify_drift_region(law: IncrementLaw, spec: LyapunovSpec, grid, direction, n, seed,
                        region=None, run=3) -> DriftReport:
    """Per-state drift verdicts along ``grid``, which runs away from the region's edge.

    ``A`` is the first grid state opening ``run`` consecutive confirmed states
    for ``direction``. With ``region`` given, the first ``region`` grid states
    lie outside the region and are reported inconclusive without simulation.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise DomainError("grid must be nonempty")
    direction = Direction.parse(direction)
    label = direction.confirmed_label
    means, hws, verdicts, targets = [], [], [], []
    hits = 0
    for j, x in enumerate(grid):
        target = -direction.eps * eval_lyapunov(spec, x) ** direction.eta \
            if direction.kind == "strong-drift" else 0.0
        targets.append(target)
        if region is not None and j < region:
            means.append(math.nan)
            hws.append(math.nan)
            verdicts.append(INCONCLUSIVE)
            continue
        rng = stream(seed, "drift", j)
        d, h = _drift_sample(law, spec, x, int(n), rng)
        hits += h
        mean, hw = _mean_ci(d)
        means.append(mean)
        hws.append(hw)
        verdicts.append(_verdict(mean, hw, direction, target))
    A = None
    for i in range(len(grid) - run + 1):
        if all(v == label for v in verdicts[i:i + run]):
            A = grid[i]
            break
    return DriftReport(grid, means, hws, int(n), verdicts, direction.kind, A, hits, targets)


def dyadic_grid(origin, jmin=1, jmax=14, sign=1):
    """States ``origin + sign * 2^j`` for ``j = jmin..jmax``."""
    return [float(origin + sign * 2.0 ** j) for j in range(jmin, jmax + 1)]


@dataclass
class MaximalCheck:
    x: np.ndarray
    empirical: np.ndarray
    bound: np.ndarray
    passed: np.ndarray

    @property
    def all_passed(self):
        return bool(np.all(self.passed))


def maximal_inequality_check(maxima, nu, B, z0, x_grid) -> MaximalCheck:
    """Compare ``P[max_{s<=nu} Z_s >= x]`` with ``(B E[nu] + E[Z_0]) / x``.

    ``maxima[i]`` is the running maximum of replica ``i`` up to its stopping
    time ``nu[i]``. A grid point passes when the empirical probability is at
    most the bound plus three binomial standard errors taken at the bound.
    """
    maxima = np.asarray(maxima, float)
    nu = np.asarray(nu, float)
    z0 = np.broadcast_to(np.asarray(z0, float), maxima.shape)
    x = np.asarray(x_grid, float)
    if np.any(maxima < 0) or np.any(z0 < 0):
        raise DomainError("process must be nonnegative")
    if np.any(x <= 0):
        raise DomainError("x_grid must be positive")
    r = maxima.size
    emp = np.array([np.mean(maxima >= xi) for xi in x])
    bound = (B * nu.mean() + z0.mean()) / x
    b = np.clip(bound, 0.0, 1.0)
    passed = emp <= bound + 3.0 * np.sqrt(b * (1.0 - b) / r)
    return MaximalCheck(x, emp, bound, passed)


def concave_sum_maxima(up: TailLaw, h: LyapunovSpec, nu_p, replicas, seed):
    """Replicas of ``max_{s<=nu} h(sum of nu up-steps)`` with ``nu ~ Geometric(nu_p)``.

    Returns ``(maxima, nu, B)`` where ``B`` is ``E[h(up)]`` by quadrature of the
    tail (the drift bound from subadditivity of a concave ``h``).
    """
    from .tails import sample_array
    rng = stream(seed, "maxineq")
    nu = rng.geometric(nu_p, replicas)
    steps = sample_array(up, rng.random(int(nu.sum())))
    ends = np.cumsum(nu)
    sums = np.add.reduceat(steps, ends - nu)
    maxima = _eval(h, sums)  # h increasing and steps >= 0: max is at nu
    return maxima, nu, _mean_h(up, h)


def _mean_h(up: TailLaw, h: LyapunovSpec):
    if h.kind != "concave-h":
        raise DomainError("drift bound needs a concave-h transform")
    if up.kind == "pareto":
        a, x0, th = up.alpha, up.cutoff_x0, h.theta
        if th >= a:
            return math.inf
        return a * x0 ** th / (a - th)
    if up.kind == "bounded-uniform":
        return up.bound ** h.theta / (1.0 + h.theta)
    if up.kind == "constant":
        return up.bound ** h.theta
    if up.kind == "zero":
        return 0.0
    raise DomainError(f"no closed form for E[h] under {up.kind}")


@dataclass
class MinDeviation:
    t_grid: np.ndarray
    probs: np.ndarray
    slope: float
    allowance: float
    bound: float
    verdict: str


def min_deviation_check(law: IncrementLaw, phi, eps, t_grid, replicas, seed) -> MinDeviation:
    """Fit the decay of ``P[min_{s<=t} X_s <= -t^phi]`` and compare with ``1 - beta*phi + eps``."""
    if not phi > 0:
        raise DomainError("phi must be positive")
    t = np.unique(np.asarray(t_grid, dtype=np.int64))
    if t.size < 2 or t[0] < 1:
        raise DomainError("t_grid needs at least two positive times")
    beta = law.down_exponent
    bound = 1.0 - beta * phi + eps
    # bounded down-steps cannot reach -t^phi within t steps once t^phi > t * max down
    if law.neg.upper_bound < math.inf and law.drift_shift >= 0:
        reach = law.neg.upper_bound * t.astype(float)
        if np.all(np.power(t.astype(float), phi) > reach):
            return MinDeviation(t, np.zeros(t.size), -math.inf, 0.0, bound, "pass")
    horizon = int(t[-1])
    cps = np.concatenate([[0], t])
    thresh = -np.power(t.astype(float), phi)
    hits = np.zeros(t.size)
    for i in range(int(replicas)):
        traj, _ = simulate_walk(law, horizon, stream(seed, i, "mindev"), checkpoints=cps)
        hits += traj.run_min[1:] <= thresh
    probs = hits / replicas
    ok = probs > 0
    if ok.sum() < 2:
        return MinDeviation(t, probs, math.nan, math.nan, bound, INCONCLUSIVE)
    lt, lp = np.log(t[ok].astype(float)), np.log(probs[ok])
    if ok.sum() >= 3:
        coef, cov = np.polyfit(lt, lp, 1, cov=True)
        allowance = Z95 * math.sqrt(max(cov[0, 0], 0.0))
    else:
        coef, allowance = np.polyfit(lt, lp, 1), 0.0
    slope = float(coef[0])
    verdict = "pass" if slope <= bound + allowance else "fail"
    return MinDeviation(t, probs, slope, allowance, bound, verdict)


def positive_part_law(law: IncrementLaw) -> IncrementLaw:
    """Law of ``Delta+`` alone: same sign rule, negative side replaced by 0."""
    return IncrementLaw(law.pos, TailLaw.zero(), law.p_pos, 0.0, law.rule_breaks, law.rule_probs)


def upper_mechanism_check(law: IncrementLaw, h: LyapunovSpec, eps, horizon, burn_in, seed):
    """Violations of ``sum_{s<t} Delta+_s <= h^-1(t (log t)^(1+eps))`` for ``t >= burn_in``."""
    traj, _ = simulate_walk(positive_part_law(law), horizon, seed)
    t = traj.times.astype(float)
    mask = t >= max(burn_in, 3)
    limit = h.inverse_h(t[mask] * np.log(t[mask]) ** (1.0 + eps))
    return int(np.sum(traj.run_max[mask] > limit))
