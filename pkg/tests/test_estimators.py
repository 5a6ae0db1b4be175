import numpy as np
import pytest
from sklearn.base import clone

from heavywalk.estimators import (DegenerateSampleError, ExponentEstimate, HillEstimator,
                                  default_survival_grid, growth_ratio, hill_estimate, kaplan_meier,
                                  loglog_slope, moment_diagnostic, survival_slope)
from heavywalk.seeding import stream
from heavywalk.tails import DomainError
from heavywalk.walk import Trajectory, dyadic_checkpoints


def pareto(alpha, n, seed):
    return stream(seed, "test-pareto").random(n) ** (-1.0 / alpha)


def _traj(values_of_t, T=2**20):
    t = dyadic_checkpoints(T)
    v = values_of_t(t.astype(float))
    return Trajectory(t, v, v, v, v, T)


def test_hill_pareto2():
    est = hill_estimate(pareto(2.0, 10**5, 1), k=1000)
    assert 1.9 <= est.point <= 2.1
    assert est.ci_lo <= est.point <= est.ci_hi
    assert est.n_effective == 1000


def test_hill_errors():
    with pytest.raises(DegenerateSampleError):
        hill_estimate(np.full(1000, 3.0))
    x = pareto(2.0, 100, 2)
    with pytest.raises(DomainError):
        hill_estimate(x, k=100)
    with pytest.raises(DomainError):
        hill_estimate(x, k=5)
    with pytest.raises(DomainError):
        hill_estimate(-x)


@pytest.mark.parametrize("n", [10**3, 10**4, 10**5])
def test_hill_consistency(n):
    est = hill_estimate(pareto(1.5, n, n))
    assert est.ci_lo - 0.1 <= 1.5 <= est.ci_hi + 0.1


def test_hill_censoring_only_removes_events():
    x = pareto(1.0, 10**4, 5)
    cap = np.quantile(x, 0.99)
    capped = np.minimum(x, cap)
    est = hill_estimate(capped, censored=x > cap)
    assert abs(est.point - 1.0) < 0.15
    # treating the capped values as events biases the index upward
    assert hill_estimate(capped).point > est.point


def test_hill_reproducible():
    x = pareto(2.0, 5000, 3)
    assert hill_estimate(x) == hill_estimate(x.copy())


def test_hill_estimator_api():
    est = HillEstimator(k=500)
    assert est.get_params() == {"k": 500, "n_bootstrap": 500}
    c = clone(est).set_params(n_bootstrap=50)
    x = pareto(2.0, 10**4, 4)
    c.fit(x.reshape(-1, 1))
    assert c.k_ == 500 and c.n_features_in_ == 1
    assert c.ci_[0] <= c.alpha_ <= c.ci_[1]
    p = c.predict([1.0, 10.0])
    assert p[0] == 1.0 and p[1] == pytest.approx(10.0 ** -c.alpha_)
    with pytest.raises(DomainError):
        HillEstimator().fit(np.ones((10, 2)))


def test_exponent_estimate_invariants():
    with pytest.raises(ValueError):
        ExponentEstimate(1.0, 1.5, 2.0, "x", 10)
    with pytest.raises(ValueError):
        ExponentEstimate(1.0, 0.5, 2.0, "x", 0)


def test_loglog_exact_powers():
    assert loglog_slope(_traj(lambda t: t**2)).point == pytest.approx(2.0, abs=1e-12)
    assert loglog_slope(_traj(lambda t: t)).point == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        loglog_slope(_traj(lambda t: t, T=8))


def test_loglog_scale_invariance():
    base = loglog_slope(_traj(lambda t: t**1.3 + np.sin(t)), burn_in=16).point
    scaled = loglog_slope(_traj(lambda t: 7.5 * (t**1.3 + np.sin(t))), burn_in=16).point
    assert scaled == pytest.approx(base, abs=1e-12)


def test_growth_ratio():
    assert growth_ratio(_traj(lambda t: t**2)) == pytest.approx(2.0)
    assert growth_ratio(_traj(lambda t: -t**2)) == 0.0
    assert growth_ratio(_traj(lambda t: -t**2), absolute=True) == pytest.approx(2.0)


def test_kaplan_meier_matches_empirical_without_censoring():
    x = pareto(1.0, 500, 6)
    times, surv = kaplan_meier(x)
    emp = 1 - np.arange(1, x.size + 1) / x.size
    assert np.allclose(surv, emp)
    assert np.array_equal(times, np.sort(x))


def test_kaplan_meier_censoring():
    # classic small example: 3 events, 2 censored
    times, surv = kaplan_meier([1, 2, 2, 3, 4], [False, True, False, False, True])
    assert times.tolist() == [1, 2, 3]
    assert np.allclose(surv, [0.8, 0.8 * 3 / 4, 0.8 * 3 / 4 * 1 / 2])


def test_survival_slope_pareto():
    est = survival_slope(pareto(1.5, 10**4, 7))
    assert abs(est.point + 1.5) <= 0.15
    assert "all-moments-finite" not in est.flags


def test_survival_slope_exponential_flag():
    x = stream(8, "exp").exponential(1.0, 10**4)
    assert "all-moments-finite" in survival_slope(x).flags


def test_survival_slope_errors():
    x = pareto(1.5, 1000, 9)
    with pytest.raises(DomainError):
        survival_slope(x, censored=np.ones(x.size, bool))
    with pytest.raises(DomainError):
        survival_slope(x[:50])


def test_survival_slope_agrees_with_hill():
    x = pareto(1.2, 2 * 10**4, 10)
    s = survival_slope(x)
    h = hill_estimate(x)
    assert -s.ci_hi <= h.ci_hi + 0.05 and h.ci_lo - 0.05 <= -s.ci_lo


def test_default_grid_shape():
    x = pareto(1.0, 10**4, 11)
    g = default_survival_grid(x)
    assert g.size == 12
    assert np.allclose(np.diff(np.log(g)), np.log(g[1] / g[0]))
    assert g[0] == pytest.approx(np.median(x))


def test_moment_diagnostic_examples():
    x = pareto(2.0, 10**5, 12)
    assert moment_diagnostic(x, 0) == "converging"
    with pytest.raises(DomainError):
        moment_diagnostic(x[:999], 1)


def test_moment_diagnostic_pareto2_rates():
    conv = div = 0
    for s in range(40):
        x = pareto(2.0, 10**5, 100 + s)
        conv += moment_diagnostic(x, 1) == "converging"
        div += moment_diagnostic(x, 3) == "diverging"
    assert conv >= 38
    assert div >= 30
