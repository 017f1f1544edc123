"""Invariant suites shared by the CLI ``verify`` command and the test gate.

Each suite returns (passed, payload) where the payload is JSON-serializable
and records the checked quantities; on failure it includes the first
offending instance.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate as scipy_integrate

from .dataset import Dataset
from .experiments import gap_distribution_test, sample_iid, trial_rng
from .interpolators import curvature, envelope, exact_spike, special_points
from .oracle import brute_force_minnorm, sup_distance
from .pwl import PiecewiseLinear, representation_cost
from .risk import (GaussianNoise, gamma_bounds_check, max_exp_inverse_moment,
                   noise_moment, population_risk, reconstruction_risk,
                   symmetric_noise_inequality_check)
from .solver import minnorm_interpolate

ZERO = PiecewiseLinear.zero()


def _random_pwl(rng: np.random.Generator, max_kinks: int = 6) -> PiecewiseLinear:
    k = int(rng.integers(0, max_kinks + 1))
    kinks = [(rng.uniform(-0.2, 1.2), rng.uniform(-4.0, 4.0)) for _ in range(k)]
    return PiecewiseLinear(anchor=(rng.uniform(0, 1), rng.uniform(-2, 2)),
                           initial_slope=rng.uniform(-4, 4), kinks=kinks)


def suite_gamma(seed: int = 0) -> tuple[bool, dict]:
    """1/(2z) <= Gamma(z) <= 1/z on a 1000-point grid of (0, 1]."""
    zs = np.linspace(1e-3, 1.0, 1000)
    worst = None
    for z in zs:
        lo, val, hi = gamma_bounds_check(float(z))
        if not lo <= val <= hi:
            worst = {"z": float(z), "lower": lo, "value": val, "upper": hi}
            break
    return worst is None, {"points": len(zs), "failure": worst}


def _folded_moment_quadrature(sigma: float, p: float) -> float:
    val, _ = scipy_integrate.quad(
        lambda u: u ** p * math.exp(-u * u / 2.0), 0.0, np.inf,
        epsabs=1e-14, epsrel=1e-13, limit=200)
    return sigma ** p * 2.0 / math.sqrt(2.0 * math.pi) * val


def suite_moments(seed: int = 20240100, mc_samples: int = 10_000_000) -> tuple[bool, dict]:
    """Folded-Gaussian moments, the 1/max(A,B)^p bound, and E[1/Gamma(9,1)^2]."""
    rng = trial_rng(seed, 0, 0)
    payload: dict = {}
    ok = True

    folded = []
    for p in (1.0, 1.5, 2.0, 3.0):
        closed = noise_moment(GaussianNoise(1.3), p)
        quad = _folded_moment_quadrature(1.3, p)
        folded.append({"p": p, "closed": closed, "quadrature": quad,
                       "diff": abs(closed - quad)})
        ok &= abs(closed - quad) <= 1e-10 * max(1.0, closed)
    payload["folded_gaussian"] = folded

    def mc_inverse_max(p, gen, samples):
        total = total_sq = 0.0
        done = 0
        while done < samples:
            take = min(1 << 20, samples - done)
            a = gen.exponential(size=take)
            b = gen.exponential(size=take)
            vals = 1.0 / np.maximum(a, b) ** p
            total += float(np.sum(vals))
            total_sq += float(np.sum(vals * vals))
            done += take
        mean = total / samples
        var = max(total_sq / samples - mean * mean, 0.0)
        return mean, math.sqrt(var / samples)

    max_ab = []
    for p in (1.0, 1.5):
        exact, bound = max_exp_inverse_moment(p)
        e1, se1 = mc_inverse_max(p, trial_rng(seed, 1, int(p * 10)), mc_samples)
        e2, se2 = mc_inverse_max(p, trial_rng(seed, 2, int(p * 10)), mc_samples)
        agree = abs(e1 - e2) <= 3.0 * math.hypot(se1, se2)
        under = e1 <= bound and e1 <= exact + 3.0 * se1
        max_ab.append({"p": p, "mc": e1, "mc_repeat": e2, "se": se1,
                       "chain_value": exact, "bound": bound,
                       "within_3se": agree, "below_bound": under})
        ok &= agree and under
    payload["inverse_max"] = max_ab

    gen = trial_rng(seed, 3, 0)
    z = gen.gamma(9.0, 1.0, size=2_000_000)
    vals = 1.0 / (z * z)
    est = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
    truth = math.gamma(7.0) / math.gamma(9.0)
    gamma_ok = abs(est - truth) <= 3.0 * se
    payload["inverse_gamma_square"] = {"estimate": est, "se": se, "truth": truth,
                                       "within_3se": gamma_ok}
    ok &= gamma_ok
    return ok, payload


def suite_inequality(seed: int = 20240200, triples: int = 100_000,
                     risk_instances: int = 100) -> tuple[bool, dict]:
    """Midpoint inequality fuzz plus population >= reconstruction risk."""
    rng = trial_rng(seed, 0, 0)
    ok = True
    failure = None
    for _ in range(triples):
        mu = float(rng.normal(0, 3))
        delta = float(abs(rng.normal(0, 3)))
        p = float(rng.uniform(1, 4))
        if not symmetric_noise_inequality_check(mu, delta, p):
            ok = False
            failure = {"mu": mu, "delta": delta, "p": p}
            break
    worst_gap = math.inf
    risk_failure = None
    for _ in range(risk_instances):
        f = _random_pwl(rng)
        target = _random_pwl(rng)
        sigma = float(rng.uniform(0.1, 2.0))
        p = float(rng.uniform(1.0, 3.0))
        lp = population_risk(f, target, GaussianNoise(sigma), p)
        rp = reconstruction_risk(f, target, p)
        gap = lp - rp
        worst_gap = min(worst_gap, gap)
        if gap < -1e-9:
            ok = False
            risk_failure = {"sigma": sigma, "p": p, "L_p": lp, "R_p": rp}
            break
    return ok, {"triples": triples, "fuzz_failure": failure,
                "risk_instances": risk_instances, "worst_gap": worst_gap,
                "risk_failure": risk_failure}


def _random_dataset(rng: np.random.Generator, n: int) -> Dataset:
    return sample_iid(n, ZERO, GaussianNoise(1.0), rng)


def suite_oracle(seed: int = 20240300, instances: int = 100,
                 cost_rtol: float = 1e-6, sup_tol: float = 1e-4) -> tuple[bool, dict]:
    """Solver equals the exhaustive reference on random tiny datasets."""
    sizes = (2, 3, 4)
    ok = True
    worst = {"cost_gap": 0.0, "sup": 0.0}
    failure = None
    for i in range(instances):
        n = sizes[i % len(sizes)]
        ds = _random_dataset(trial_rng(seed, n, i), n)
        res = minnorm_interpolate(ds)
        ref = brute_force_minnorm(ds, resolution=1e-2)
        gap = abs(res.cost - ref.cost) / max(1e-9, ref.cost)
        sup = sup_distance(res.function, ref.function)
        worst["cost_gap"] = max(worst["cost_gap"], gap)
        worst["sup"] = max(worst["sup"], sup)
        if gap > cost_rtol or sup > sup_tol:
            ok = False
            failure = {"instance": i, "n": n, "solver_cost": res.cost,
                       "oracle_cost": ref.cost, "sup_distance": sup}
            break
    return ok, {"instances": instances, "worst": worst, "failure": failure}


def _structural_violations(ds: Dataset, tol_env: float = 1e-8,
                           tol_boundary: float = 1e-10,
                           tol_slope: float = 1e-8,
                           samples_per_interval: int = 500) -> dict:
    res = minnorm_interpolate(ds)
    f = res.function
    x = ds.x
    n = ds.n
    out = {"kink_budget": 0, "envelope": 0, "boundary": 0, "slopes": 0,
           "converged": res.converged}

    kinks = np.array([t for t, _ in f.kinks])
    if len(kinks):
        before = np.sum(kinks < x[0] - 1e-12)
        after = np.sum(kinks >= x[-1] - 1e-12)
        idx = np.searchsorted(x, kinks, side="right") - 1
        idx = idx[(idx >= 0) & (idx <= n - 2)]
        per_interval = np.bincount(idx, minlength=n - 1)
        out["kink_budget"] = int(before + after + np.sum(per_interval > 1))

    for env in envelope(ds):
        if env.x_hi - env.x_lo <= 0:
            continue
        xs = np.linspace(env.x_lo, env.x_hi, samples_per_interval, endpoint=False)
        fx = f(xs)
        lo = env.lower(xs)
        hi = env.upper(xs)
        out["envelope"] += int(np.sum((fx < lo - tol_env) | (fx > hi + tol_env)))

    d = ds.secants
    g_first = PiecewiseLinear(anchor=(x[0], ds.y[0]), initial_slope=d[0])
    g_last = PiecewiseLinear(anchor=(x[-1], ds.y[-1]), initial_slope=d[-1])
    xs_left = np.linspace(0.0, x[1], 200, endpoint=False)
    xs_right = np.linspace(x[-2], 1.0, 200)
    out["boundary"] += int(np.sum(np.abs(f(xs_left) - g_first(xs_left)) > tol_boundary))
    out["boundary"] += int(np.sum(np.abs(f(xs_right) - g_last(xs_right)) > tol_boundary))

    padded = ds.secants_padded
    arrive = f.slope_left_of(x)
    lo_bound = np.minimum(padded[:-1], padded[1:]) - tol_slope
    hi_bound = np.maximum(padded[:-1], padded[1:]) + tol_slope
    out["slopes"] = int(np.sum((arrive < lo_bound) | (arrive > hi_bound)))
    return out


def suite_envelope(seed: int = 20240400, instances: int = 60) -> tuple[bool, dict]:
    """Kink budget and envelope containment on random datasets."""
    sizes = (5, 20, 100)
    total = {"kink_budget": 0, "envelope": 0}
    for i in range(instances):
        n = sizes[i % len(sizes)]
        ds = _random_dataset(trial_rng(seed, n, i), n)
        v = _structural_violations(ds)
        total["kink_budget"] += v["kink_budget"]
        total["envelope"] += v["envelope"]
    ok = total["kink_budget"] == 0 and total["envelope"] == 0
    return ok, {"instances": instances, "violations": total}


def suite_slopes(seed: int = 20240500, instances: int = 60) -> tuple[bool, dict]:
    """Arrival-slope bounds and boundary secant identities on random datasets."""
    sizes = (5, 20, 100)
    total = {"boundary": 0, "slopes": 0}
    for i in range(instances):
        n = sizes[i % len(sizes)]
        ds = _random_dataset(trial_rng(seed, n, i), n)
        v = _structural_violations(ds)
        total["boundary"] += v["boundary"]
        total["slopes"] += v["slopes"]
    ok = total["boundary"] == 0 and total["slopes"] == 0
    return ok, {"instances": instances, "violations": total}


def make_spike_dataset(rng: np.random.Generator, sign: int = -1) -> Dataset:
    """Four points whose middle interval forces a spike of the given sign.

    The middle gap is the longest, the outer labels sit in [1, 2] bands and
    the inner pair at -1 (mirrored for sign=+1), which pins the interpolant
    to the min/max of the two extended outer secants on the middle interval.
    """
    left = rng.uniform(0.02, 0.2)
    mid = rng.uniform(float(left), 0.4)
    right = rng.uniform(0.02, float(min(mid, 0.2)))
    x0 = rng.uniform(0.05, 0.95 - (left + mid + right))
    x = np.array([x0, x0 + left, x0 + left + mid, x0 + left + mid + right])
    y = np.array([-1.0, 1.0, 1.0, -1.0])
    if sign == +1:
        y = -y
    return Dataset(x=x, y=y)


def suite_spike(seed: int = 20240600, instances: int = 50,
                tol: float = 1e-8) -> tuple[bool, dict]:
    """Solver matches the closed-form spike and its intersection position."""
    ok = True
    failure = None
    worst = 0.0
    for i in range(instances):
        rng = trial_rng(seed, 4, i)
        sign = -1 if i % 2 == 0 else 1
        ds = make_spike_dataset(rng, sign)
        spike = exact_spike(ds, 1)
        if spike is None:
            ok = False
            failure = {"instance": i, "reason": "hypotheses unexpectedly unmet"}
            break
        res = minnorm_interpolate(ds)
        xs = np.linspace(ds.x[1], ds.x[2], 400, endpoint=False)
        err = float(np.max(np.abs(res.function(xs) - spike(xs))))
        gaps = np.diff(ds.x)
        expected = gaps[0] * gaps[1] / (gaps[0] + gaps[2])
        kink_err = abs((spike.kinks[0][0] - ds.x[1]) - expected)
        worst = max(worst, err, kink_err)
        if err > tol or kink_err > tol:
            ok = False
            failure = {"instance": i, "segment_error": err, "kink_error": kink_err}
            break
    return ok, {"instances": instances, "worst": worst, "failure": failure}


def suite_gaps(seed: int = 20240700, n: int = 100, draws: int = 10_000) -> tuple[bool, dict]:
    """Scaled spacings pass KS against Exp(1); grid spacings fail decisively."""
    iid = gap_distribution_test(n, draws, trial_rng(seed, n, 0), design="iid")
    grid = gap_distribution_test(n, draws, trial_rng(seed, n, 1), design="grid")
    ok = iid.passed and not grid.passed
    return ok, {"iid": {"statistic": iid.statistic, "pvalue": iid.pvalue,
                        "passed": iid.passed},
                "grid": {"statistic": grid.statistic, "pvalue": grid.pvalue,
                         "passed": grid.passed}}


SUITES = {
    "oracle": suite_oracle,
    "envelope": suite_envelope,
    "spike": suite_spike,
    "slopes": suite_slopes,
    "gaps": suite_gaps,
    "moments": suite_moments,
    "inequality": suite_inequality,
    "gamma": suite_gamma,
}


def run_suite(name: str, seed: int | None = None) -> tuple[bool, dict]:
    if name not in SUITES:
        raise KeyError(name)
    fn = SUITES[name]
    return fn() if seed is None else fn(seed=seed)
