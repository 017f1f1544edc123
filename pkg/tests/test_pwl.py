import json
import math

import numpy as np
import pytest

from overfit_lab.pwl import (PiecewiseLinear, affine_max, affine_min, difference,
                             negate, representation_cost, to_network)


def random_pwl(rng, n_kinks=5):
    kinks = [(rng.uniform(-2, 2), rng.uniform(-5, 5)) for _ in range(n_kinks)]
    return PiecewiseLinear(anchor=(rng.uniform(-1, 1), rng.uniform(-3, 3)),
                           initial_slope=rng.uniform(-5, 5), kinks=kinks)


def relu_sum_eval(f, x):
    """Independent reference: the raw anchored ReLU-sum definition."""
    x0, y0 = f.anchor
    total = y0 + f.initial_slope * (x - x0)
    for t, c in f.kinks:
        total += c * (max(x - t, 0.0) - max(x0 - t, 0.0))
    return total


def test_affine_identity():
    f = PiecewiseLinear(anchor=(0.0, 0.0), initial_slope=1.0)
    assert f(3.5) == 3.5


def test_single_ramp():
    f = PiecewiseLinear(anchor=(0.0, 0.0), initial_slope=0.0, kinks=[(1.0, 2.0)])
    assert f(2.0) == pytest.approx(2.0, abs=1e-15)
    assert f(0.5) == 0.0


def test_eval_matches_relu_sum():
    rng = np.random.default_rng(7)
    for _ in range(20):
        f = random_pwl(rng)
        for x in rng.uniform(-3, 3, size=50):
            assert f(float(x)) == pytest.approx(relu_sum_eval(f, float(x)), abs=1e-12)


def test_eval_vectorized_matches_scalar():
    rng = np.random.default_rng(8)
    f = random_pwl(rng)
    xs = rng.uniform(-3, 3, size=100)
    vec = f(xs)
    assert vec.shape == xs.shape
    for x, v in zip(xs, vec):
        assert v == f(float(x))


def test_eval_rejects_non_finite():
    f = PiecewiseLinear.zero()
    with pytest.raises(ValueError):
        f(float("nan"))
    with pytest.raises(ValueError):
        f(np.array([0.0, np.inf]))


def test_cost_affine_is_zero():
    assert representation_cost(PiecewiseLinear.affine(2.0, -1.0)) == 0.0


def test_cost_single_kink_at_origin():
    f = PiecewiseLinear(anchor=(0.0, 0.0), initial_slope=0.0, kinks=[(0.0, 3.0)])
    assert representation_cost(f) == pytest.approx(3.0)


def test_cost_hand_value():
    # sqrt(2)*2 at each of t=1 and t=-1
    f = PiecewiseLinear(anchor=(0.0, 0.0), initial_slope=0.0,
                        kinks=[(1.0, 2.0), (-1.0, -2.0)])
    assert representation_cost(f) == pytest.approx(4.0 * math.sqrt(2.0), rel=1e-15)


def test_cost_invariant_under_reorder_and_split():
    rng = np.random.default_rng(11)
    for _ in range(20):
        f = random_pwl(rng, n_kinks=4)
        shuffled = list(f.kinks)
        rng.shuffle(shuffled)
        g = PiecewiseLinear(anchor=f.anchor, initial_slope=f.initial_slope,
                            kinks=shuffled)
        assert representation_cost(g) == pytest.approx(representation_cost(f), rel=1e-12)
        # split one kink into same-sign halves at the same position
        t, c = f.kinks[0]
        split = [(t, 0.25 * c), (t, 0.75 * c)] + list(f.kinks[1:])
        h = PiecewiseLinear(anchor=f.anchor, initial_slope=f.initial_slope, kinks=split)
        assert representation_cost(h) == pytest.approx(representation_cost(f), rel=1e-12)


def test_normalization_merges_and_drops():
    f = PiecewiseLinear(anchor=(0.0, 0.0), initial_slope=0.0,
                        kinks=[(0.5, 1.0), (0.5, 2.0), (0.25, 1e-14)])
    assert f.kinks == ((0.5, 3.0),)
    positions = [t for t, _ in f.kinks]
    assert positions == sorted(positions)


def test_nearby_but_distinct_kinks_survive():
    # distinct positions ~1e-12 apart carry huge slope changes; merging them
    # would shift the function by ~1e-5
    f = PiecewiseLinear(anchor=(0.0, 0.0), initial_slope=0.0,
                        kinks=[(0.5, 1e7), (0.5 + 1e-12, -2e7)])
    assert len(f.kinks) == 2


def test_constructor_rejects_non_finite():
    with pytest.raises(ValueError):
        PiecewiseLinear(anchor=(0.0, float("inf")), initial_slope=0.0)
    with pytest.raises(ValueError):
        PiecewiseLinear(anchor=(0.0, 0.0), initial_slope=0.0, kinks=[(np.nan, 1.0)])


def test_network_affine_has_no_units():
    f = PiecewiseLinear.affine(1.5, -0.25)
    net = to_network(f)
    assert net.units == ()
    assert net.skip == (1.5, -0.25)
    assert net(2.0) == pytest.approx(f(2.0))


def test_network_unit_norm_origin_kink():
    f = PiecewiseLinear(anchor=(0.0, 0.0), initial_slope=0.0, kinks=[(0.0, -3.0)])
    net = to_network(f)
    assert net.squared_norm == pytest.approx(2.0 * 3.0, rel=1e-14)


def test_network_unit_norm_general_kink():
    t, c = 0.75, -2.5
    f = PiecewiseLinear(anchor=(0.0, 0.0), initial_slope=0.0, kinks=[(t, c)])
    net = to_network(f)
    assert net.squared_norm == pytest.approx(2.0 * abs(c) * math.sqrt(1 + t * t), rel=1e-14)


def test_network_roundtrip_balance_and_norm():
    rng = np.random.default_rng(13)
    for _ in range(20):
        f = random_pwl(rng)
        net = to_network(f)
        xs = rng.uniform(-2, 2, size=200)
        assert np.max(np.abs(net(xs) - f(xs))) <= 1e-10
        assert net.squared_norm == pytest.approx(2.0 * representation_cost(f), rel=1e-12)
        for a, w, b in net.units:
            assert w > 0
            assert a * a == pytest.approx(w * w + b * b, rel=1e-12)


def test_difference_with_self_is_zero():
    rng = np.random.default_rng(17)
    f = random_pwl(rng)
    d = difference(f, f)
    assert d.kinks == ()
    assert d(0.3) == pytest.approx(0.0, abs=1e-12)


def test_difference_with_affine_keeps_kinks():
    rng = np.random.default_rng(19)
    f = random_pwl(rng, n_kinks=3)
    g = PiecewiseLinear.affine(2.0, 1.0)
    d = f - g
    assert [t for t, _ in d.kinks] == [t for t, _ in f.kinks]


def test_difference_pointwise():
    rng = np.random.default_rng(23)
    for _ in range(10):
        f = random_pwl(rng, n_kinks=3)
        g = random_pwl(rng, n_kinks=3)
        d = difference(f, g)
        xs = np.linspace(-2.5, 2.5, 1000)
        assert np.max(np.abs(d(xs) - (f(xs) - g(xs)))) <= 1e-12


def test_negate():
    rng = np.random.default_rng(29)
    f = random_pwl(rng)
    xs = rng.uniform(-2, 2, 50)
    assert np.allclose(negate(f)(xs), -f(xs), atol=1e-14)


def test_affine_min_max():
    f = PiecewiseLinear.affine(2.0, 0.0)
    g = PiecewiseLinear.affine(-1.0, 1.5)
    lo = affine_min(f, g)
    hi = affine_max(f, g)
    xs = np.linspace(-3, 3, 400)
    assert np.max(np.abs(lo(xs) - np.minimum(f(xs), g(xs)))) <= 1e-12
    assert np.max(np.abs(hi(xs) - np.maximum(f(xs), g(xs)))) <= 1e-12


def test_json_roundtrip_is_exact():
    rng = np.random.default_rng(31)
    f = random_pwl(rng)
    doc = json.loads(f.to_json())
    assert set(doc) == {"anchor", "initial_slope", "kinks"}
    g = PiecewiseLinear.from_json(f.to_json())
    assert g == f


def test_slope_left_right():
    f = PiecewiseLinear(anchor=(0.0, 0.0), initial_slope=1.0, kinks=[(0.5, 2.0)])
    assert f.slope_left_of(0.5) == 1.0
    assert f.slope_right_of(0.5) == 3.0
    assert f.slope_left_of(0.7) == 3.0
