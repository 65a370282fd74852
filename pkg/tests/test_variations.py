"""Variation-statistic tests: hand values, exact identities, limit draws."""

import math

import numpy as np
import pytest

from fbmvar import (
    GridSpec,
    SeedSpec,
    WeightFunction,
    check_derivatives,
    coarse_weight_variation,
    endpoint_variation,
    get_weight,
    ks_one_sample,
    limit_conditional_std,
    limit_quadrature,
    limit_sigma,
    make_path,
    midpoint_variation,
    sample_fbm,
    simulate_limit,
    taylor_remainder_split,
    trapezoidal_variation,
    unweighted_variation,
)
from fbmvar.weights import REGISTRY
from scipy import stats as sps

F_ONE = get_weight("one")
F_ZERO = get_weight("zero")
F_ID = get_weight("identity")
F_SQ = get_weight("square")
F_SIN = get_weight("sin")
F_GAUSS = get_weight("gauss")


def _path(level=8, h=0.25, seed=0, t_max=1.0, t_min=0.0):
    grid = GridSpec(level=level, t_min=t_min, t_max=t_max)
    return sample_fbm(h, grid, SeedSpec(seed, 0))


# --- weight registry -------------------------------------------------------

@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_registry_derivatives_match_finite_differences(name):
    xs = np.linspace(-3, 3, 25)
    check_derivatives(REGISTRY[name], xs, k_max=6, tol=1e-6)


def test_weight_order_guard():
    f = WeightFunction("lin", 1, lambda k, x: x if k == 0 else np.ones_like(x))
    f.eval(1, 0.5)
    with pytest.raises(ValueError):
        f.eval(2, 0.5)


def test_bad_derivatives_are_caught():
    f = WeightFunction("broken", 2, lambda k, x: np.sin(x) if k == 0 else np.cos(x))
    with pytest.raises(ValueError):
        check_derivatives(f, np.linspace(-1, 1, 9), k_max=2)


# --- hand-computed values --------------------------------------------------

def test_midpoint_hand_example():
    path = make_path(1, [0.0, 1.0, 2.0], 0.25)
    series = midpoint_variation(path, F_ID, 1)
    assert series.value_at(1.0) == pytest.approx(2.0**0.75, rel=1e-12)


def test_trapezoid_hand_example():
    path = make_path(1, [0.0, 1.0, 2.0], 0.25)
    series = trapezoidal_variation(path, F_SQ, 1)
    assert series.value_at(1.0) == pytest.approx(3.0 * 2.0**-0.25, rel=1e-12)


def test_zero_weight_gives_zero_series():
    path = _path()
    assert np.all(midpoint_variation(path, F_ZERO, 2).values == 0.0)


def test_unit_weight_equals_unweighted():
    path = _path(seed=3)
    weighted = midpoint_variation(path, F_ONE, 2)
    plain = unweighted_variation(path, 2)
    assert np.array_equal(weighted.raw, plain.raw)
    assert np.array_equal(trapezoidal_variation(path, F_ONE, 2).raw, plain.raw)


# --- series mechanics ------------------------------------------------------

def test_series_starts_at_zero_and_is_right_continuous():
    path = _path(level=6)
    series = midpoint_variation(path, F_GAUSS, 2)
    assert series.values[0] == 0.0
    k = 37
    t_lo, t_hi = k * 2.0**-6, (k + 1) * 2.0**-6
    assert series.value_at(t_lo) == series.value_at(t_hi - 1e-9)
    assert series.value_at(t_lo) == series.values[k]
    with pytest.raises(ValueError):
        series.value_at(2.0)


def test_empty_sum_below_first_step():
    path = _path(level=6)
    assert unweighted_variation(path, 1).value_at(2.0**-7) == 0.0


def test_summands_recover_per_step_terms():
    path = _path(level=7, seed=5)
    series = trapezoidal_variation(path, F_SIN, 2)
    n = 7
    x = path.values[path.grid.zero_index :]
    xi = 2.0 ** (n * 0.25) * np.diff(x)
    expected = 2.0 ** (-n / 2) * 0.5 * (np.sin(x[:-1]) + np.sin(x[1:])) * xi * xi * xi
    # differencing recovers summands up to an ulp of the running sum
    atol = 1e-15 * (1.0 + np.max(np.abs(series.values)))
    assert np.allclose(series.summands(), expected, rtol=1e-12, atol=atol)


# --- exact algebraic identities -------------------------------------------

def test_trapezoid_is_mean_of_endpoint_sums():
    for seed in range(5):
        path = _path(level=9, seed=seed)
        for r in (1, 2, 3):
            trap = trapezoidal_variation(path, F_GAUSS, r)
            left = endpoint_variation(path, F_GAUSS, r, "left")
            right = endpoint_variation(path, F_GAUSS, r, "right")
            mean_raw = 0.5 * (left.raw + right.raw)
            scale = np.max(np.abs(trap.raw)) + 1.0
            assert np.max(np.abs(trap.raw - mean_raw)) <= 1e-12 * scale


def test_affine_weight_collapses_trapezoid_to_midpoint():
    path = _path(level=8, seed=2)
    assert np.array_equal(
        trapezoidal_variation(path, F_ID, 2).raw, midpoint_variation(path, F_ID, 2).raw
    )
    affine = WeightFunction(
        "affine", 8, lambda k, x: (1.7 * x + 0.3, np.full_like(x, 1.7), np.zeros_like(x))[min(k, 2)]
    )
    psi = trapezoidal_variation(path, affine, 2)
    phi = midpoint_variation(path, affine, 2)
    assert np.allclose(psi.raw, phi.raw, rtol=1e-12, atol=1e-13)


def test_unweighted_r1_brownian_telescopes_to_path():
    path = _path(level=10, h=0.5, seed=7)
    series = unweighted_variation(path, 1)
    n = 10
    for t in (0.25, 0.5, 1.0):
        recovered = 2.0 ** (n / 2) * series.value_at(t) * 2.0 ** (-n * 0.5)
        assert recovered == pytest.approx(path.value_at(t), rel=1e-12, abs=1e-14)


def test_odd_symmetry():
    path = _path(level=8, seed=11)
    flipped = make_path(8, -path.values, 0.25)
    reflected = WeightFunction("refl", 8, lambda k, x: F_GAUSS.eval(k, -x))
    for stat, f, args in (
        (midpoint_variation, F_GAUSS, (2,)),
        (trapezoidal_variation, F_GAUSS, (2,)),
        (unweighted_variation, None, (2,)),
    ):
        if f is None:
            a, b = stat(path, *args), stat(flipped, *args)
        else:
            a, b = stat(path, f, *args), stat(flipped, reflected, *args)
        assert np.array_equal(a.raw, -b.raw)


def test_endpoint_left_r1_identity_and_limit():
    # identity: raw left sum with f(x)=x equals (X_t^2 - sum dX^2)/2
    path = _path(level=9, seed=13)
    n = 9
    left = endpoint_variation(path, F_ID, 1, "left")
    x = path.values[path.grid.zero_index :]
    dx = np.diff(x)
    for t in (0.5, 1.0):
        k = math.floor(t * 2**n)
        expected_raw = 2.0 ** (n * 0.25) * 0.5 * (x[k] ** 2 - np.sum(dx[:k] ** 2))
        assert left.raw[k] == pytest.approx(expected_raw, rel=1e-10)
    # convergence of the statistic at t=1 toward -1/2 as n grows
    errs = {}
    for n in (8, 14):
        sq = []
        for i in range(150):
            p = _path(level=n, h=0.25, seed=1000 + i)
            sq.append((endpoint_variation(p, F_ID, 1, "left").value_at(1.0) + 0.5) ** 2)
        errs[n] = np.mean(sq)
    assert errs[14] < errs[8]
    assert errs[14] < 0.05


def test_coarse_weight_reduces_to_midpoint_and_scales():
    path = _path(level=8, seed=4)
    full = coarse_weight_variation(path, F_GAUSS, 2, 8)
    assert np.array_equal(full.raw, midpoint_variation(path, F_GAUSS, 2).raw)
    const = coarse_weight_variation(path, F_ONE, 2, 3)
    assert np.array_equal(const.raw, unweighted_variation(path, 2).raw)
    with pytest.raises(ValueError):
        coarse_weight_variation(path, F_GAUSS, 2, 9)


def test_coarse_weight_gap_shrinks_with_m():
    h, r = 0.25, 2
    f = get_weight("xsq_gauss")
    gaps = {}
    for m in (2, 5, 8):
        sq = []
        for i in range(250):
            path = _path(level=10, h=h, seed=3000 + i)
            phi = midpoint_variation(path, f, r).value_at(1.0)
            phi_m = coarse_weight_variation(path, f, r, m).value_at(1.0)
            sq.append((phi - phi_m) ** 2)
        gaps[m] = np.mean(sq)
    assert gaps[8] < gaps[5] < gaps[2]


# --- Taylor split ----------------------------------------------------------

def test_taylor_split_affine_vanishes():
    path = _path(level=8, seed=6)
    a, b = taylor_remainder_split(path, F_ID, 2, 3)
    assert np.all(a.raw == 0.0)
    assert np.all(b.raw == 0.0)


def test_taylor_split_square_is_exact_at_order_two():
    path = _path(level=8, seed=8)
    a, b = taylor_remainder_split(path, F_SQ, 2, 2)
    scale = np.max(np.abs(a.raw)) + 1.0
    assert np.max(np.abs(b.raw)) <= 1e-12 * scale


def test_taylor_split_partitions_the_gap():
    path = _path(level=9, seed=9)
    a, b = taylor_remainder_split(path, F_SIN, 2, 4)
    delta = trapezoidal_variation(path, F_SIN, 2).raw - midpoint_variation(path, F_SIN, 2).raw
    scale = np.max(np.abs(delta)) + 1.0
    assert np.max(np.abs(a.raw + b.raw - delta)) <= 1e-13 * scale


def test_taylor_split_requires_derivatives():
    path = _path(level=6)
    poor = WeightFunction("loworder", 1, lambda k, x: np.sin(x))
    with pytest.raises(ValueError):
        taylor_remainder_split(path, poor, 2, 2)


def test_taylor_residual_sup_shrinks_with_level():
    h, n_order = 0.3, 2
    sups = {}
    for n in (6, 10):
        vals = []
        for i in range(150):
            path = _path(level=n, h=h, seed=5000 + i)
            _, b = taylor_remainder_split(path, F_SIN, 2, n_order)
            vals.append(np.max(np.abs(b.values)))
        sups[n] = np.mean(vals)
    assert sups[10] < sups[6]


# --- quadrature and limit draws -------------------------------------------

def test_quadrature_constant_weight_is_exact():
    path = _path(level=8, seed=10)
    assert limit_quadrature(path, F_ONE, "f", 1.0) == 1.0
    assert limit_quadrature(path, F_ONE, "f", 0.625) == 0.625
    const = WeightFunction("c07", 4, lambda k, x: np.full_like(x, 0.7) if k == 0 else np.zeros_like(x))
    assert limit_quadrature(path, const, "f", 1.0) == pytest.approx(0.7, rel=1e-12)
    assert limit_quadrature(path, F_ID, "f_prime", 1.0) == 1.0


def _bridge_refine(values, level, h_rng):
    # Brownian midpoint refinement (exact for H = 1/2)
    mid = 0.5 * (values[:-1] + values[1:]) + h_rng.standard_normal(
        len(values) - 1
    ) * math.sqrt(2.0 ** -(level + 2))
    out = np.empty(2 * len(values) - 1)
    out[::2] = values
    out[1::2] = mid
    return out


def test_quadrature_refinement_is_cauchy():
    rng = np.random.default_rng(2024)
    diffs = {1: [], 2: []}
    for _ in range(60):
        path6 = _path(level=6, h=0.5, seed=int(rng.integers(1 << 30)))
        v6 = path6.values
        v8 = _bridge_refine(_bridge_refine(v6, 6, rng), 7, rng)
        v10 = _bridge_refine(_bridge_refine(v8, 8, rng), 9, rng)
        q6 = limit_quadrature(path6, F_SIN, "f", 1.0)
        q8 = limit_quadrature(make_path(8, v8, 0.5), F_SIN, "f", 1.0)
        q10 = limit_quadrature(make_path(10, v10, 0.5), F_SIN, "f", 1.0)
        diffs[1].append(abs(q8 - q6))
        diffs[2].append(abs(q10 - q8))
    assert np.mean(diffs[2]) < np.mean(diffs[1])


def test_simulate_limit_zero_weight():
    path = _path(level=8)
    assert simulate_limit(path, F_ZERO, 2.0, 1.0, SeedSpec(1, 1)) == 0.0


def test_simulate_limit_unit_weight_law():
    sigma = limit_sigma(2, 0.25, 1e-8)
    path = _path(level=8, seed=20)
    draws = np.array(
        [simulate_limit(path, F_ONE, sigma, 1.0, SeedSpec(50, i)) for i in range(10_000)]
    )
    _, p = ks_one_sample(draws / sigma.value, sps.norm.cdf)
    assert p > 0.01


def test_simulate_limit_conditional_variance():
    sigma = limit_sigma(2, 0.25, 1e-8)
    path = _path(level=8, seed=21)
    target_sd = limit_conditional_std(path, F_GAUSS, sigma, 1.0)
    draws = np.array(
        [simulate_limit(path, F_GAUSS, sigma, 1.0, SeedSpec(51, i)) for i in range(3000)]
    )
    var = draws.var(ddof=1)
    se = target_sd**2 * math.sqrt(2.0 / (len(draws) - 1))
    assert abs(var - target_sd**2) < 4 * se
    assert abs(draws.mean()) < 4 * target_sd / math.sqrt(len(draws))
