import math

import numpy as np
import pytest

from heavywalk.strip import (InducedChainSpec, StripKernel, build_lamperti, classify_regime,
                             simulate_induced, simulate_strip)
from heavywalk.tails import DomainError, TailLaw
from heavywalk.walk import IncrementLaw, simulate_walk

P, U = TailLaw.pareto, TailLaw.uniform
SRW = InducedChainSpec("reflected-srw")
ERGODIC = InducedChainSpec("finite-ergodic", ((0.5, 0.5), (0.5, 0.5)))
BOUNDED = IncrementLaw(U(1.0), U(1.0), 0.5)


def _push(a):
    return IncrementLaw(P(a), TailLaw.zero(), 1.0)


def test_lamperti_probabilities():
    p, q = build_lamperti(0.5).step_probs(7)
    assert p == q == 0.5
    p, q = build_lamperti(0.25).step_probs(10)
    assert p - q == pytest.approx(0.025, abs=1e-15)
    p, q = build_lamperti(1.0).step_probs(10)
    assert p - q == pytest.approx(-0.05, abs=1e-15)


def test_lamperti_site_floor():
    spec = build_lamperti(0.25, sigma2=1.0)
    for x in range(spec.x_min, 50):
        p, q = spec.step_probs(x)
        assert 0 <= q <= p <= 1 and p + q <= 1
    assert build_lamperti(0.5, 0.5).step_probs(3) == (0.25, 0.25)


def test_induced_validation():
    with pytest.raises(DomainError):
        InducedChainSpec("finite-ergodic", ((1.0, 0.0), (0.0, 1.0)))
    with pytest.raises(DomainError):
        InducedChainSpec("finite-ergodic", ((0.5, 0.6), (0.5, 0.5)))
    with pytest.raises(DomainError):
        build_lamperti(1.5)
    with pytest.raises(DomainError):
        InducedChainSpec("torus")


def test_classify_positive_recurrent():
    r = classify_regime(StripKernel(ERGODIC, _push(0.5), IncrementLaw(U(1.0), P(2.0), 0.5)))
    assert (r.kind, r.direction, r.slope) == ("boundary-dominates", 1, 2.0)


def test_classify_null_recurrent_boundary():
    r = classify_regime(StripKernel(SRW, _push(0.2), IncrementLaw(U(1.0), P(1.0), 0.5)))
    assert (r.kind, r.direction) == ("boundary-dominates", 1)
    assert r.slope == pytest.approx(2.5)


def test_classify_gap_case():
    # gamma = 0.5, alpha = 0.45, beta = 0.8: alpha > gamma*(beta ^ 1) = 0.4 rules out the
    # boundary case, alpha > gamma*beta = 0.4 with beta < 1 puts us in the bulk case
    r = classify_regime(StripKernel(SRW, _push(0.45), IncrementLaw(U(1.0), P(0.8), 0.5)))
    assert (r.kind, r.direction) == ("bulk-dominates", -1)
    assert r.slope == pytest.approx(1.25)


def test_classify_bulk_and_unclassified():
    r = classify_regime(StripKernel(SRW, BOUNDED, IncrementLaw(U(1.0), P(0.4), 0.5)))
    assert str(r) == "bulk-dominates(-inf, slope=2.5)"
    # alpha = gamma * beta exactly: edge of both regimes
    r = classify_regime(StripKernel(SRW, _push(0.2), IncrementLaw(U(1.0), P(0.4), 0.5)))
    assert str(r) == "unclassified"


def test_classify_ignores_drift_shift():
    base = classify_regime(StripKernel(SRW, BOUNDED, IncrementLaw(U(1.0), P(0.4), 0.5)))
    for mu in (1, 10, 100, -7):
        k = StripKernel(SRW, BOUNDED, IncrementLaw(U(1.0), P(0.4), 0.5, float(mu)))
        assert classify_regime(k) == base


def test_fractional_shift_rejected():
    with pytest.raises(DomainError):
        StripKernel(SRW, BOUNDED, IncrementLaw(U(1.0), U(1.0), 0.5, 0.5))


def test_u_marginal_is_induced_chain():
    kernel = StripKernel(SRW, _push(0.5), BOUNDED)
    T = 5000
    u = simulate_induced(SRW, T, (3, 1))
    run = simulate_strip(kernel, T, (3, 1), checkpoints=np.arange(T + 1))
    assert np.array_equal(run.on_boundary, u == 0)
    assert np.array_equal(run.excursions.sigma, np.flatnonzero(u == 0))


def test_strip_values_integer_and_reproducible():
    kernel = StripKernel(ERGODIC, _push(0.5), IncrementLaw(U(1.0), P(2.0), 0.5))
    a = simulate_strip(kernel, 10**4, (5, 0))
    b = simulate_strip(kernel, 10**4, (5, 0))
    assert np.array_equal(a.trajectory.values, b.trajectory.values)
    assert np.all(a.trajectory.values == np.round(a.trajectory.values))


def test_single_line_strip_matches_walk_rate():
    one = InducedChainSpec("finite-ergodic", ((1.0,),))
    law = IncrementLaw(P(0.5), U(1.0), 0.5)
    kernel = StripKernel(one, law, law)
    T, strip_r, walk_r = 10**5, [], []
    for i in range(30):
        v = simulate_strip(kernel, T, (8, i)).trajectory.values[-1]
        w = simulate_walk(law, T, (8 << 8) + i)[0].values[-1]
        strip_r.append(math.log(max(v, 1)) / math.log(T))
        walk_r.append(math.log(max(w, 1)) / math.log(T))
    assert abs(np.median(strip_r) - 2) < 0.4
    assert abs(np.median(walk_r) - 2) < 0.4


def test_kernel_roundtrip():
    k = StripKernel(build_lamperti(0.25), _push(0.2), BOUNDED)
    assert StripKernel.from_dict(k.to_dict()) == k
