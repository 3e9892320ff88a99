import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockstat.errors import DegenerateKernel, TooFewBlocks
from blockstat.ustat import (
    Discrete,
    Empirical,
    Normal,
    bernoulli,
    check_kernel,
    gamma_n_squared,
    get_kernel,
    gini_mean_difference,
    hoeffding,
    kernel_covariance_mc,
    standardized_statistic,
    u_statistic,
)

GINI = get_kernel("gini")
# Var of E[|x - N'|] under N(0,1); closed form from E|XY| for a correlated normal pair
GINI_GAMMA_UNIT = 1.0 / 3.0 + (2.0 * math.sqrt(3.0) - 4.0) / math.pi


def brute_covariance(h, dist):
    """Cov(h(W1, W2), h(W2, W3)) by enumerating all triples."""
    v, p = dist.values, dist.probs
    e_h = sum(p[i] * p[j] * h(v[i], v[j]) for i, j in itertools.product(range(v.size), repeat=2))
    e_prod = sum(p[i] * p[j] * p[k] * h(v[i], v[j]) * h(v[j], v[k])
                 for i, j, k in itertools.product(range(v.size), repeat=3))
    return float(e_prod - e_h**2)


DISCRETE_LAWS = [
    Discrete([0.0, 1.0, 3.0], [0.2, 0.5, 0.3]),
    Discrete([-2.0, -0.5, 0.25, 4.0], [1.0, 2.0, 3.0, 4.0]),
    Empirical([0.3, -1.2, 0.3, 2.2, 5.0]),
    bernoulli(0.3),
]


@pytest.mark.parametrize("law", DISCRETE_LAWS)
@pytest.mark.parametrize("kname", ["gini", "sum", "product", "half_squared_difference"])
def test_hoeffding_exact_on_finite_support(law, kname):
    h = get_kernel(kname)
    parts = hoeffding(h, law)
    v, p = law.values, law.probs
    assert abs(p @ parts.h1(v)) < 1e-12
    for x in v:
        assert abs(p @ parts.h2(x, v)) < 1e-12
    X, Y = np.meshgrid(v, v)
    np.testing.assert_allclose(parts.reconstruct(X, Y), h(X, Y), atol=1e-12, rtol=0)
    # gamma_n^2 through Var h1 equals the triple covariance
    f = parts.h1(v)
    var_h1 = float(p @ f**2)
    assert var_h1 == pytest.approx(brute_covariance(h, law), abs=1e-12)


def test_bernoulli_gini_is_degenerate():
    with pytest.raises(DegenerateKernel):
        gamma_n_squared(GINI, bernoulli(0.5))


def test_product_kernel_degenerate_under_centered_normal():
    with pytest.raises(DegenerateKernel):
        gamma_n_squared(get_kernel("product"), Normal(1.0))


def test_gini_constants_by_quadrature():
    parts = hoeffding(GINI, Normal(1.0))
    assert parts.theta == pytest.approx(2.0 / math.sqrt(math.pi), abs=1e-10)
    assert gamma_n_squared(GINI, Normal(1.0), parts) == pytest.approx(GINI_GAMMA_UNIT, abs=1e-10)
    assert GINI_GAMMA_UNIT == pytest.approx(0.16275157944175, abs=1e-13)


def test_gini_projection_closed_form():
    # E|x - N| = 2 phi(x) + x (2 Phi(x) - 1)
    from scipy import stats

    parts = hoeffding(GINI, Normal(1.0))
    x = np.array([-2.0, -0.3, 0.0, 1.7])
    expect = 2 * stats.norm.pdf(x) + x * (2 * stats.norm.cdf(x) - 1) - 2 / math.sqrt(math.pi)
    np.testing.assert_allclose(parts.h1(x), expect, atol=1e-11)


def test_sum_kernel_gamma_is_variance():
    assert gamma_n_squared(get_kernel("sum"), Normal(1.5)) == pytest.approx(2.25, rel=1e-12)


def test_kernel_covariance_monte_carlo_agrees():
    draws = np.random.default_rng(5).standard_normal((400_000, 3))
    est, se = kernel_covariance_mc(GINI, draws)
    assert abs(est - GINI_GAMMA_UNIT) < 4 * se


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=60))
def test_sorted_fast_path_equals_double_sum(vals):
    w = np.array(vals)
    fast = u_statistic(w, GINI, "sorted")
    slow = u_statistic(w, GINI, "exact")
    assert fast == pytest.approx(slow, rel=1e-12, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-2**20, 2**20), min_size=2, max_size=40), st.integers(-2**20, 2**20))
def test_shift_invariance_exact_on_dyadics(ints, shift):
    w = np.array(ints, dtype=float) / 64.0
    c = shift / 64.0
    assert u_statistic(w + c, GINI, "exact") == u_statistic(w, GINI, "exact")
    assert u_statistic(w + c, GINI) == u_statistic(w, GINI)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=30), st.randoms())
def test_u_statistic_symmetric_in_order(vals, rnd):
    w = np.array(vals)
    perm = w.copy()
    rnd.shuffle(perm)
    for kname in ("gini", "half_squared_difference", "sum"):
        h = get_kernel(kname)
        assert u_statistic(perm, h) == pytest.approx(u_statistic(w, h), rel=1e-12, abs=1e-12)


def test_u_statistic_small_example():
    w = np.array([0.0, 1.0, 3.0])
    # pairs: 1, 3, 2 -> mean 2
    assert u_statistic(w, GINI) == pytest.approx(2.0)
    assert gini_mean_difference(np.vstack([w, 2 * w])) == pytest.approx([2.0, 4.0])


def test_batch_u_statistic_rows():
    w = np.random.default_rng(6).standard_normal((4, 25))
    h = get_kernel("half_squared_difference")
    batch = u_statistic(w, h)
    np.testing.assert_allclose(batch, [u_statistic(r, h) for r in w], rtol=1e-14)
    # half squared difference U-statistic is the sample variance
    np.testing.assert_allclose(batch, w.var(axis=1, ddof=1), rtol=1e-12)


def test_too_few_blocks():
    with pytest.raises(TooFewBlocks):
        u_statistic(np.array([1.0]), GINI)


def test_check_kernel_properties():
    assert all(check_kernel(GINI).values())
    assert check_kernel(get_kernel("sum"))["symmetric"]


def test_standardized_statistic_and_json():
    w = np.array([0.1, -0.4, 1.3, 0.8, -1.1, 0.0])
    rep = standardized_statistic(w, GINI, 2 / math.sqrt(math.pi), GINI_GAMMA_UNIT)
    expect = math.sqrt(6) * (u_statistic(w, GINI) - 2 / math.sqrt(math.pi)) / (2 * math.sqrt(GINI_GAMMA_UNIT))
    assert rep.standardized == pytest.approx(expect, rel=1e-14)
    assert 0.0 <= rep.p_value <= 1.0
    back = json.loads(rep.to_json())
    assert back["block_count"] == 6 and back["U_n"] == rep.U_n
    with pytest.raises(DegenerateKernel):
        standardized_statistic(w, GINI, 0.0, 0.0)


def test_discrete_ppf():
    law = Discrete([3.0, 1.0, 2.0], [0.5, 0.25, 0.25])
    np.testing.assert_array_equal(law.ppf(np.array([0.1, 0.3, 0.6, 0.99])), [1.0, 2.0, 3.0, 3.0])
