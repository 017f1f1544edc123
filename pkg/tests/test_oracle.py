import numpy as np
import pytest

from overfit_lab.dataset import Dataset
from overfit_lab.experiments import sample_iid, trial_rng
from overfit_lab.interpolators import exact_spike
from overfit_lab.oracle import brute_force_minnorm, monte_carlo_risk, sup_distance
from overfit_lab.pwl import PiecewiseLinear
from overfit_lab.risk import GaussianNoise, population_risk
from overfit_lab.solver import minnorm_interpolate

ZERO = PiecewiseLinear.zero()


def test_collinear_cost_zero():
    ds = Dataset(x=np.array([0.1, 0.5, 0.9]), y=np.array([0.2, 1.0, 1.8]))
    res = brute_force_minnorm(ds, resolution=0.05)
    assert res.cost == pytest.approx(0.0, abs=1e-10)
    assert res.function.kinks == ()


def test_three_point_corner():
    ds = Dataset(x=np.array([0.2, 0.5, 0.8]), y=np.array([0.0, 1.0, 0.0]))
    res = brute_force_minnorm(ds, resolution=0.02)
    d = ds.secants
    expected = np.sqrt(1 + 0.25) * abs(d[1] - d[0])
    assert res.cost == pytest.approx(expected, rel=1e-9)
    assert len(res.function.kinks) == 1
    assert res.function.kinks[0][0] == pytest.approx(0.5, abs=1e-6)


def test_spike_configuration():
    ds = Dataset(x=np.array([0.2, 0.38, 0.62, 0.8]), y=np.array([-1.0, 1.0, 1.0, -1.0]))
    spike = exact_spike(ds, 1)
    res = brute_force_minnorm(ds, resolution=1e-2)
    xs = np.linspace(ds.x[1], ds.x[2], 300, endpoint=False)
    assert np.max(np.abs(res.function(xs) - spike(xs))) <= 1e-6


def test_cost_monotone_in_resolution():
    ds = Dataset(x=np.array([0.2, 0.5, 0.8]), y=np.array([0.1, 0.9, 0.3]))
    costs = [brute_force_minnorm(ds, resolution=r).cost for r in (1 / 8, 1 / 16, 1 / 32)]
    assert costs[1] <= costs[0] + 1e-9
    assert costs[2] <= costs[1] + 1e-9


def test_rejects_large_n_and_bad_resolution():
    rng = np.random.default_rng(1)
    x = np.sort(rng.random(7))
    ds = Dataset(x=x, y=rng.normal(size=7))
    with pytest.raises(ValueError):
        brute_force_minnorm(ds)
    ds4 = Dataset(x=np.array([0.1, 0.3, 0.6, 0.9]), y=np.zeros(4))
    with pytest.raises(ValueError):
        brute_force_minnorm(ds4, resolution=0.9)


def test_mutual_certification_small_n():
    for i in range(20):
        n = (2, 3, 4)[i % 3]
        ds = sample_iid(n, ZERO, GaussianNoise(1.0), trial_rng(1000 + i, n, 0))
        res = minnorm_interpolate(ds)
        ref = brute_force_minnorm(ds, resolution=1e-2)
        assert res.cost <= ref.cost + 1e-6 * max(1.0, ref.cost)
        assert res.cost >= ref.cost - 1e-6 * max(1e-9, abs(ref.cost))
        assert sup_distance(res.function, ref.function) <= 1e-4


def test_sup_distance_values():
    f = PiecewiseLinear.affine(1.0, 0.0)
    assert sup_distance(f, f) == 0.0
    g = PiecewiseLinear.affine(1.0, 0.5)
    assert sup_distance(f, g) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        sup_distance(f, g, grid_points=1)


def test_sup_distance_matches_dense_grid():
    rng = np.random.default_rng(5)
    for _ in range(5):
        kinks_f = [(rng.uniform(0, 1), rng.uniform(-3, 3)) for _ in range(4)]
        kinks_g = [(rng.uniform(0, 1), rng.uniform(-3, 3)) for _ in range(4)]
        f = PiecewiseLinear(anchor=(0.5, 0.0), initial_slope=1.0, kinks=kinks_f)
        g = PiecewiseLinear(anchor=(0.5, 0.2), initial_slope=-1.0, kinks=kinks_g)
        dense = np.max(np.abs(f(np.linspace(0, 1, 1_000_001))
                              - g(np.linspace(0, 1, 1_000_001))))
        assert sup_distance(f, g) >= dense - 1e-12


def test_monte_carlo_risk_basics():
    assert monte_carlo_risk(ZERO, ZERO, GaussianNoise(0.0), 2.0, 10_000,
                            np.random.default_rng(3)) == (0.0, 0.0)
    f = PiecewiseLinear.affine(0.0, 1.0)
    est, se = monte_carlo_risk(f, ZERO, GaussianNoise(1.0), 2.0, 200_000,
                               np.random.default_rng(4))
    assert abs(est - 2.0) <= 3 * se
    with pytest.raises(ValueError):
        monte_carlo_risk(f, ZERO, GaussianNoise(1.0), 2.0, 10, np.random.default_rng(5))


def test_monte_carlo_matches_quadrature():
    rng = np.random.default_rng(6)
    kinks = [(rng.uniform(0, 1), rng.uniform(-3, 3)) for _ in range(3)]
    f = PiecewiseLinear(anchor=(0.0, 0.3), initial_slope=0.5, kinks=kinks)
    noise = GaussianNoise(0.8)
    exact = population_risk(f, ZERO, noise, 1.5)
    est, se = monte_carlo_risk(f, ZERO, noise, 1.5, 500_000, np.random.default_rng(7))
    assert abs(est - exact) <= 3 * se
