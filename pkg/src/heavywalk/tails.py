"""One-sided jump-magnitude laws with exact samplers and closed-form oracles.

A :class:`TailLaw` describes the law of a nonnegative magnitude ``Z``.  The
heavy-tailed kinds are

* ``pareto``:      ``P[Z > x] = (x / x0) ** -alpha`` for ``x >= x0``;
* ``pareto-log``:  ``P[Z > x] = (x / x0) ** -alpha * (log x / log x0) ** phi``,

and the light kinds (``bounded-uniform``, ``constant``, ``zero``) have bounded
support ``[0, bound]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _sampling

KINDS = tuple(_sampling.KIND_CODES)
HEAVY_KINDS = ("pareto", "pareto-log")


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


@dataclass(frozen=True)
class TailLaw:
    kind: str = "pareto"
    alpha: float = 1.0
    scale_c: float = 1.0
    cutoff_x0: float = 1.0
    log_phi: float = 0.0
    bound: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown tail law kind {self.kind!r}")
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")
        if not self.cutoff_x0 >= 1:
            raise DomainError("cutoff_x0 must be >= 1")
        if self.kind in ("bounded-uniform", "constant") and not self.bound > 0:
            raise DomainError("bound must be positive")
        if self.kind == "pareto-log":
            if self.cutoff_x0 <= 1:
                raise DomainError("pareto-log needs cutoff_x0 > 1")
            # tail must be non-increasing on [x0, inf)
            if self.log_phi > 0 and math.log(self.cutoff_x0) < self.log_phi / self.alpha:
                raise DomainError("pareto-log needs log(cutoff_x0) >= phi / alpha")
        if self.kind == "pareto":
            object.__setattr__(self, "scale_c", self.cutoff_x0 ** self.alpha)

    @classmethod
    def pareto(cls, alpha, x0=1.0):
        return cls("pareto", alpha=alpha, cutoff_x0=x0)

    @classmethod
    def pareto_log(cls, alpha, phi, x0=math.e):
        return cls("pareto-log", alpha=alpha, cutoff_x0=x0, log_phi=phi)

    @classmethod
    def uniform(cls, bound=1.0):
        return cls("bounded-uniform", bound=bound)

    @classmethod
    def constant(cls, value=1.0):
        return cls("constant", bound=value)

    @classmethod
    def zero(cls):
        return cls("zero")

    @property
    def is_heavy(self):
        return self.kind in HEAVY_KINDS

    @property
    def tail_exponent(self):
        """Limit of ``-log P[Z > x] / log x``; infinite for bounded laws."""
        return self.alpha if self.is_heavy else math.inf

    @property
    def upper_bound(self):
        if self.kind in ("bounded-uniform", "constant"):
            return self.bound
        if self.kind == "zero":
            return 0.0
        return math.inf

    def as_array(self):
        return np.array(
            [_sampling.KIND_CODES[self.kind], self.alpha, self.cutoff_x0,
             self.log_phi, self.bound],
            dtype=np.float64,
        )

    def to_dict(self):
        return {
            "kind": self.kind, "alpha": self.alpha, "cutoff_x0": self.cutoff_x0,
            "log_phi": self.log_phi, "bound": self.bound,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d.pop("scale_c", None)
        return cls(**d)


def sample(law: TailLaw, u: float) -> float:
    """Inverse-transform draw; deterministic in ``u``."""
    if not 0.0 <= u < 1.0:
        raise DomainError(f"u must lie in [0, 1), got {u}")
    return float(_sampling.sample_magnitude(law.as_array(), float(u)))


def sample_array(law: TailLaw, u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.size and (u.min() < 0.0 or u.max() >= 1.0):
        raise DomainError("u must lie in [0, 1)")
    return _sampling.sample_many(law.as_array(), u.ravel()).reshape(u.shape)


def _slowly_varying(law, x):
    if law.kind == "pareto":
        return law.cutoff_x0 ** law.alpha
    return law.cutoff_x0 ** law.alpha * (math.log(x) / math.log(law.cutoff_x0)) ** law.log_phi


def tail_prob(law: TailLaw, x: float) -> float:
    """Exact ``P[Z > x]``."""
    if law.is_heavy:
        if x < law.cutoff_x0:
            return 1.0
        return x ** -law.alpha * _slowly_varying(law, x)
    if law.kind == "zero":
        return 1.0 if x < 0 else 0.0
    if law.kind == "constant":
        return 1.0 if x < law.bound else 0.0
    if x < 0:
        return 1.0
    return max(0.0, 1.0 - x / law.bound)


def truncated_mean(law: TailLaw, z: float) -> float:
    """``E[Z 1{Z <= z}]``: closed form where one exists, quadrature otherwise."""
    if z < 0:
        raise DomainError("z must be nonnegative")
    if law.kind == "zero":
        return 0.0
    if law.kind == "constant":
        return law.bound if z >= law.bound else 0.0
    if law.kind == "bounded-uniform":
        z = min(z, law.bound)
        return z * z / (2.0 * law.bound)
    x0, a = law.cutoff_x0, law.alpha
    if z <= x0:
        return 0.0
    if law.kind == "pareto":
        if a == 1.0:
            return x0 * math.log(z / x0)
        return a * x0 ** a * (z ** (1.0 - a) - x0 ** (1.0 - a)) / (1.0 - a)
    # truncated mean = int_0^z P[Z > y] dy - z P[Z > z]
    return integrated_tail(law, z) - z * tail_prob(law, z)


def integrated_tail(law: TailLaw, z: float, rtol: float = 1e-9) -> float:
    """``int_0^z P[Z > y] dy`` by adaptive Simpson on a log scale above x0."""
    if z <= 0:
        return 0.0
    if not law.is_heavy:
        return adaptive_simpson(lambda y: tail_prob(law, y), 0.0, z, rtol)
    x0 = law.cutoff_x0
    head = min(z, x0)
    if z <= x0:
        return head
    # y = x0 * e^s keeps the integrand smooth across many decades
    body = adaptive_simpson(
        lambda s: tail_prob(law, x0 * math.exp(s)) * x0 * math.exp(s),
        0.0, math.log(z / x0), rtol,
    )
    return head + body


def adaptive_simpson(f, a, b, rtol=1e-9, max_depth=60):
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4 * fm + fb) / 6.0
    scale = abs(whole) if whole != 0 else 1.0

    def recurse(a, b, fa, fm, fb, whole, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) * (fa + 4 * flm + fm) / 6.0
        right = (b - m) * (fm + 4 * frm + fb) / 6.0
        err = left + right - whole
        # Richardson-corrected; tolerance share shrinks with interval width
        if depth >= max_depth or abs(err) <= 15.0 * rtol * scale * (b - a) / span:
            return left + right + err / 15.0
        return (recurse(a, m, fa, flm, fm, left, depth + 1)
                + recurse(m, b, fm, frm, fb, right, depth + 1))

    span = b - a
    if span == 0:
        return 0.0
    return recurse(a, b, fa, fm, fb, whole, 0)


def karamata_asymptote(law: TailLaw, z: float) -> float:
    """Regular-variation asymptote ``alpha/(1-alpha) z^(1-alpha) L(z)``."""
    if not law.is_heavy:
        raise DomainError("asymptote defined only for pareto-type laws")
    if not 0 < law.alpha < 1:
        raise DomainError("asymptote requires alpha in (0, 1)")
    if z < law.cutoff_x0:
        raise DomainError("z must be >= cutoff_x0")
    a = law.alpha
    return a / (1.0 - a) * z ** (1.0 - a) * _slowly_varying(law, z)


def moment_finite(law: TailLaw, p: float) -> bool:
    """Whether ``E[Z^p] < inf``."""
    return p < law.tail_exponent
