import math

import numpy as np
import pytest

from heavywalk.lyapunov import (GE0, INCONCLUSIVE, LE0, STRONG, Direction, LyapunovSpec,
                                concave_sum_maxima, drift_estimate, dyadic_grid, eval_lyapunov,
                                maximal_inequality_check, min_deviation_check, upper_mechanism_check,
                                verify_drift_region)
from heavywalk.seeding import stream
from heavywalk.tails import DomainError, TailLaw
from heavywalk.walk import IncrementLaw

P, U = TailLaw.pareto, TailLaw.uniform
ESCAPE = IncrementLaw(P(0.5), U(1.0), 0.5)
COIN = IncrementLaw(TailLaw.constant(1.0), TailLaw.constant(1.0), 0.5)


def test_eval_examples():
    f = LyapunovSpec.f_power_decay(0.0, 1.0)
    assert eval_lyapunov(f, 1.0) == 0.5
    assert eval_lyapunov(f, -3.0) == 1.0
    assert eval_lyapunov(LyapunovSpec.w_power(5.0, 0.5), 5.0) == 0.0
    assert eval_lyapunov(LyapunovSpec.monomial(2.0), 3.0) == 9.0


def test_spec_roundtrip_and_inverse():
    h = LyapunovSpec.concave_h(0.5)
    assert LyapunovSpec.from_dict(h.to_dict()) == h
    assert h.inverse_h(eval_lyapunov(h, 49.0)) == pytest.approx(49.0)


def test_drift_coin_identity():
    mean, hw = drift_estimate(COIN, LyapunovSpec.identity(), 3.0, 10**4, 1)
    assert abs(mean) <= hw


def test_drift_deterministic_square():
    up = IncrementLaw(TailLaw.constant(1.0), TailLaw.zero(), 1.0)
    mean, hw = drift_estimate(up, LyapunovSpec.monomial(2.0), 5.0, 1000, 2)
    assert mean == 11.0 and hw == 0.0
    with pytest.raises(DomainError):
        drift_estimate(up, LyapunovSpec.monomial(2.0), 5.0, 999, 2)


def test_direction_parse():
    assert Direction.parse("supermartingale").confirmed_label == LE0
    assert Direction.parse({"kind": "strong-drift", "eta": 0.25, "eps": 0.1}).confirmed_label == STRONG
    with pytest.raises(DomainError):
        Direction.parse("strong-drift")


def test_super_region():
    rep = verify_drift_region(ESCAPE, LyapunovSpec.f_power_decay(0.0, 0.25),
                              dyadic_grid(0.0, 1, 8), "supermartingale", 10**5, 3)
    assert rep.region_confirmed and rep.A == 2.0


def test_sub_region():
    law = IncrementLaw(U(1.0), P(0.75), 0.5)
    rep = verify_drift_region(law, LyapunovSpec.f_power_decay(0.0, 1.0),
                              dyadic_grid(0.0, 1, 8), "submartingale", 10**5, 4)
    assert rep.region_confirmed
    assert all(v == GE0 for v in rep.verdicts)


def test_strong_region():
    direction = {"kind": "strong-drift", "eta": 0.25, "eps": 0.1}
    rep = verify_drift_region(ESCAPE, LyapunovSpec.w_power(0.0, 0.8),
                              dyadic_grid(0.0, 1, 8, sign=-1), direction, 10**5, 5)
    assert rep.region_confirmed
    assert all(m + h <= t for m, h, t in zip(rep.mean_drift, rep.ci_half_width, rep.targets))


def test_region_offset_marks_outside_states():
    rep = verify_drift_region(ESCAPE, LyapunovSpec.f_power_decay(0.0, 0.25),
                              dyadic_grid(0.0, 1, 4), "supermartingale", 1000, 3, region=20)
    assert rep.verdicts == [INCONCLUSIVE] * 4
    assert rep.A is None and not rep.region_confirmed


def test_maximal_trivial_cases():
    chk = maximal_inequality_check(np.full(100, 10.0), np.full(100, 10), 1.0, 0.0, [20.0])
    assert chk.empirical[0] == 0 and chk.all_passed
    chk = maximal_inequality_check(np.zeros(100), np.ones(100), 0.0, 0.0, [1.0, 5.0])
    assert np.all(chk.empirical == 0) and chk.all_passed
    with pytest.raises(DomainError):
        maximal_inequality_check(-np.ones(3), np.ones(3), 1.0, 0.0, [1.0])


def test_maximal_concave_pareto():
    maxima, nu, B = concave_sum_maxima(P(0.6), LyapunovSpec.concave_h(0.5), 0.1, 10**4, 6)
    assert B == pytest.approx(6.0)
    chk = maximal_inequality_check(maxima, nu, B, 0.0, [10.0, 100.0, 1000.0])
    assert chk.all_passed
    assert np.all(np.diff(chk.empirical) <= 0)


def test_min_deviation_examples():
    trivial = min_deviation_check(ESCAPE, 2.0, 0.1, [2, 4, 8], 10, 7)
    assert trivial.verdict == "pass" and np.all(trivial.probs == 0)
    with pytest.raises(DomainError):
        min_deviation_check(ESCAPE, 0.0, 0.1, [2, 4], 10, 7)


def test_min_deviation_pareto_down():
    law = IncrementLaw(P(0.5), P(2.0), 0.5)
    res = min_deviation_check(law, 1.0, 0.1, [4, 16, 64, 256], 10**4, 8)
    assert res.bound == pytest.approx(-0.9)
    assert res.verdict == "pass"
    assert res.slope < -0.5


def test_upper_mechanism():
    h = LyapunovSpec.concave_h(0.5)
    bad = sum(upper_mechanism_check(ESCAPE, h, 0.5, 10**5, 1000, stream(7, i)) > 0
              for i in range(50))
    assert bad <= 5
    assert math.isfinite(h.inverse_h(10.0))
