import numpy as np
import pytest

from overfit_lab.dataset import Dataset
from overfit_lab.experiments import sample_iid, trial_rng
from overfit_lab.interpolators import (exact_spike, linear_spline,
                                       pinned_intervals)
from overfit_lab.oracle import brute_force_minnorm, sup_distance
from overfit_lab.pwl import PiecewiseLinear, representation_cost
from overfit_lab.risk import GaussianNoise
from overfit_lab.solver import (MinNormResult, SolverOptions, minnorm_interpolate,
                                solve_interval_run)
from overfit_lab.verify import _structural_violations

ZERO = PiecewiseLinear.zero()


def random_dataset(seed, n):
    return sample_iid(n, ZERO, GaussianNoise(1.0), trial_rng(seed, n, 0))


def test_collinear_gives_affine():
    ds = Dataset(x=np.array([0.1, 0.4, 0.8]), y=np.array([0.2, 0.8, 1.6]))
    res = minnorm_interpolate(ds)
    assert res.converged
    assert res.cost == pytest.approx(0.0, abs=1e-12)
    assert res.function.kinks == ()


def test_two_and_three_points():
    ds2 = Dataset(x=np.array([0.2, 0.7]), y=np.array([1.0, -1.0]))
    res = minnorm_interpolate(ds2)
    assert res.function.kinks == ()
    assert res.function(0.45) == pytest.approx(0.0, abs=1e-12)

    ds3 = Dataset(x=np.array([0.2, 0.5, 0.8]), y=np.array([0.0, 1.0, 0.0]))
    res3 = minnorm_interpolate(ds3)
    # single kink at the middle sample
    assert len(res3.function.kinks) == 1
    assert res3.function.kinks[0][0] == pytest.approx(0.5, abs=1e-12)
    d = ds3.secants
    expected = np.sqrt(1 + 0.25) * abs(d[1] - d[0])
    assert res3.cost == pytest.approx(expected, rel=1e-12)


def test_spike_configuration_matches_closed_form():
    ds = Dataset(x=np.array([0.2, 0.38, 0.63, 0.8]), y=np.array([-1.1, 1.2, 1.05, -0.9]))
    spike = exact_spike(ds, 1)
    assert spike is not None
    res = minnorm_interpolate(ds)
    xs = np.linspace(ds.x[1], ds.x[2], 500, endpoint=False)
    assert np.max(np.abs(res.function(xs) - spike(xs))) <= 1e-8


def test_matches_oracle_on_small_random_datasets():
    for i, n in enumerate([2, 3, 4, 4, 3, 2, 4, 4, 3, 4]):
        ds = random_dataset(100 + i, n)
        res = minnorm_interpolate(ds)
        ref = brute_force_minnorm(ds, resolution=1e-2)
        assert abs(res.cost - ref.cost) <= 1e-6 * max(1e-9, ref.cost)
        assert sup_distance(res.function, ref.function) <= 1e-4


def test_matches_oracle_with_longer_runs():
    # n = 5 and 6 can contain runs of 2-3 free intervals
    for i, n in enumerate([5, 5, 6, 6, 5, 6]):
        ds = random_dataset(200 + i, n)
        res = minnorm_interpolate(ds)
        ref = brute_force_minnorm(ds, resolution=1e-2)
        assert abs(res.cost - ref.cost) <= 1e-6 * max(1e-9, ref.cost)
        assert sup_distance(res.function, ref.function) <= 1e-4


def test_constructed_length_two_run_matches_dense_grid():
    """A run of two free intervals against a dense zoomed 2-d position grid."""
    x = np.array([0.1, 0.3, 0.5, 0.7, 0.9])
    y = np.array([0.0, 1.0, 1.3, 1.0, 0.0])
    ds = Dataset(x=x, y=y)
    pinned = pinned_intervals(ds)
    assert list(pinned) == [True, False, False, True]
    res = minnorm_interpolate(ds)

    def chain_cost(t1, t2):
        # tau_0 = x_0 and tau_3 = x_3 pin the boundary-identity structure
        m = 0.0 * t1 + ds.secants[0]
        cost = 0.0
        taus = (np.full_like(t1, x[0]), t1, t2, np.full_like(t1, x[3]))
        for j in range(4):
            m_next = (y[j] - y[j + 1] + m * (taus[j] - x[j])) / (taus[j] - x[j + 1])
            cost = cost + np.sqrt(1 + taus[j] ** 2) * np.abs(m_next - m)
            m = m_next
        return cost

    lo = np.array([x[1], x[2]])
    hi = np.array([x[2], x[3]])
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    for _ in range(8):   # zoomed dense grid: 201^2 cells per round
        g1 = np.clip(np.linspace(center[0] - half[0], center[0] + half[0], 201), lo[0], hi[0] - 1e-12)
        g2 = np.clip(np.linspace(center[1] - half[1], center[1] + half[1], 201), lo[1], hi[1] - 1e-12)
        t1, t2 = np.meshgrid(g1, g2, indexing="ij")
        cost = chain_cost(t1, t2)
        k = np.unravel_index(int(np.argmin(cost)), cost.shape)
        center = np.array([g1[k[0]], g2[k[1]]])
        half = half / 50.0
    grid_cost = float(np.min(cost))
    assert abs(res.cost - grid_cost) <= 1e-6 * max(1e-9, grid_cost)
    kink_pos = np.array([t for t, _ in res.function.kinks])
    assert np.max(np.abs(kink_pos - center)) <= 1e-4


def test_random_5point_cost_matches_oracle():
    for i in range(4):
        ds = random_dataset(900 + i, 5)
        res = minnorm_interpolate(ds)
        ref = brute_force_minnorm(ds, resolution=1e-2)
        assert abs(res.cost - ref.cost) <= 1e-6 * max(1e-9, ref.cost)


def test_alternating_curvature_equals_spline_inside():
    x = np.linspace(0.1, 0.9, 8)
    y = np.array([0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0])
    ds = Dataset(x=x, y=y)
    res = minnorm_interpolate(ds)
    spline = linear_spline(ds)
    xs = np.linspace(x[1], x[-2], 400)
    assert np.max(np.abs(res.function(xs) - spline(xs))) <= 1e-10


def test_interpolation_and_certificates():
    for seed, n in [(7, 5), (8, 20), (9, 100), (10, 400)]:
        ds = random_dataset(seed, n)
        res = minnorm_interpolate(ds)
        assert res.converged
        assert np.max(np.abs(res.function(ds.x) - ds.y)) <= 1e-9
        v = _structural_violations(ds)
        assert v["kink_budget"] == 0
        assert v["envelope"] == 0
        assert v["boundary"] == 0
        assert v["slopes"] == 0


def test_cost_never_exceeds_spline_cost():
    for seed in range(5):
        ds = random_dataset(300 + seed, 30)
        res = minnorm_interpolate(ds)
        assert res.cost <= representation_cost(linear_spline(ds)) + 1e-9


def test_determinism():
    ds = random_dataset(42, 50)
    a = minnorm_interpolate(ds)
    b = minnorm_interpolate(ds)
    assert a.function == b.function
    assert a.cost == b.cost


def test_boundary_identities_exact():
    ds = random_dataset(55, 40)
    res = minnorm_interpolate(ds)
    d = ds.secants
    g0 = PiecewiseLinear(anchor=(ds.x[0], ds.y[0]), initial_slope=d[0])
    gl = PiecewiseLinear(anchor=(ds.x[-1], ds.y[-1]), initial_slope=d[-1])
    xs_left = np.linspace(0.0, ds.x[1], 100, endpoint=False)
    xs_right = np.linspace(ds.x[-2], 1.0, 100)
    assert np.max(np.abs(res.function(xs_left) - g0(xs_left))) <= 1e-10
    assert np.max(np.abs(res.function(xs_right) - gl(xs_right))) <= 1e-10


def test_isolated_run_closed_form():
    ds = Dataset(x=np.array([0.2, 0.4, 0.6, 0.8]), y=np.array([-1.0, 1.0, 1.0, -1.0]))
    slopes, cost, converged, sweeps = solve_interval_run(ds, 1, 1)
    assert converged and sweeps == 0
    d = ds.secants
    assert slopes[0] == d[2]   # arrive along the right secant: one interior kink
    tau = 0.4 + 0.2 * (d[2] - d[1]) / (d[2] - d[0])
    assert cost == pytest.approx(np.sqrt(1 + tau * tau) * abs(d[2] - d[0]), rel=1e-12)


def test_non_convergence_flag():
    x = np.array([0.1, 0.3, 0.5, 0.7, 0.9])
    y = np.array([0.0, 1.0, 1.3, 1.0, 0.0])
    ds = Dataset(x=x, y=y)
    res = minnorm_interpolate(ds, SolverOptions(max_iters=0))
    assert not res.converged
    # the fallback iterate still interpolates
    assert np.max(np.abs(res.function(ds.x) - ds.y)) <= 1e-9
    full = minnorm_interpolate(ds)
    assert full.cost <= res.cost + 1e-12


def test_run_requires_pinned_delimiters():
    ds = random_dataset(77, 10)
    with pytest.raises(ValueError):
        solve_interval_run(ds, 0, 1)
