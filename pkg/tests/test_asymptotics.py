import math

import numpy as np
import pytest

from blockstat.asymptotics import (
    LimitLaw,
    centering,
    gamma_squared,
    gaussian_centering,
    long_run_variance,
    sigma_squared,
    truncated_centering,
    zn_centering,
)
from blockstat.errors import DegenerateKernel, MethodUnavailable
from blockstat.gfuncs import linear_g, preset_g
from blockstat.processes import ProcessSpec, builtin_specs, generate, population_moments
from blockstat.ustat import Normal, gamma_n_squared, get_kernel

GINI = get_kernel("gini")
GAMMA_UNIT = 1.0 / 3.0 + (2.0 * math.sqrt(3.0) - 4.0) / math.pi


def test_sigma_sq_iid_linear_g():
    r = sigma_squared(ProcessSpec.iid(), linear_g([1.0], [0.0]))
    assert r.mode == "iid" and r.estimate == pytest.approx(1.0, abs=1e-14)


def test_sigma_sq_ar_linear_g():
    s = ProcessSpec.ar1(0.5)
    r = sigma_squared(s, linear_g([1.0], [0.0]))
    assert r.mode == "hermite"
    # truncated filter: (sum a_j)^2 = 4 (1 - 2^-28)^2
    assert r.estimate == pytest.approx(4.0 * (1 - 2.0**-28) ** 2, rel=1e-12)


def test_sigma_sq_iid_log_variance():
    r = sigma_squared(ProcessSpec.iid(), preset_g("log_variance", [0.0, 1.0]))
    assert r.estimate == pytest.approx(2.0, abs=1e-12)


def test_sigma_sq_ar_log_variance_matches_closed_form():
    # D_t = (X_t^2 - v2) / v2 with v2 = 4/3; Cov(X_0^2, X_t^2) = 2 (v2 rho_t)^2
    s = ProcessSpec.ar1(0.5)
    v = population_moments(s, 2)[0]
    r = sigma_squared(s, preset_g("log_variance", v))
    expect = 2.0 * (1.0 + 2.0 * sum(0.25**t for t in range(1, 28)))
    assert r.estimate == pytest.approx(expect, rel=1e-10)
    assert r.estimate == pytest.approx(10.0 / 3.0, rel=1e-8)


@pytest.mark.parametrize("name", ["linear_0.5", "hermite"])
def test_sigma_sq_monte_carlo_agrees_with_analytic(name):
    s = builtin_specs(seed=3)[name]
    g = preset_g("log_variance", population_moments(s, 2)[0])
    an = sigma_squared(s, g)
    mc = sigma_squared(s, g, mode="mc", replications=100)
    assert abs(mc.estimate - an.estimate) < 3 * mc.stderr + 0.01 * an.estimate


def test_sigma_sq_iid_mc_matches_plain_variance():
    s = ProcessSpec.iid("laplace", seed=4)
    g = preset_g("log_variance", population_moments(s, 2)[0])
    an = sigma_squared(s, g)
    # Laplace: E X^4 = 6, so Var X^2 = 5
    assert an.estimate == pytest.approx(5.0, rel=1e-12)
    mc = sigma_squared(s, g, mode="mc", lags=2)
    assert abs(mc.estimate - 5.0) < 3 * mc.stderr


def test_sigma_sq_mode_unavailable():
    with pytest.raises(MethodUnavailable):
        sigma_squared(builtin_specs()["volterra"], linear_g([1.0], [0.0]), mode="hermite")


def test_gamma_sq_gini_unit_and_scaling():
    assert gamma_squared(GINI, 1.0) == pytest.approx(GAMMA_UNIT, abs=1e-10)
    for sigma in (0.3, 2.0, 7.5):
        direct = gamma_n_squared(GINI, Normal(sigma))
        assert direct == pytest.approx(sigma**2 * GAMMA_UNIT, rel=1e-10)
        assert gamma_squared(GINI, sigma) == pytest.approx(direct, rel=1e-10)


def test_gamma_sq_degenerate_product():
    with pytest.raises(DegenerateKernel):
        gamma_squared(get_kernel("product"), 1.0)


def test_gaussian_centering_value():
    c = gaussian_centering(GINI, 2.0)
    assert c.value == pytest.approx(4.0 / math.sqrt(math.pi), abs=1e-10)
    assert c.value == pytest.approx(2.2568, abs=1e-4)
    assert c.stderr == 0.0
    with pytest.raises(MethodUnavailable):
        gaussian_centering(get_kernel("product"), 1.0)
    with pytest.raises(MethodUnavailable):
        centering("zn-expectation", GINI, sigma=1.0)


def test_zn_centering_linear_iid_is_exact():
    c = zn_centering(ProcessSpec.iid(seed=1), linear_g([1.0], [0.0]), GINI, 400, 100_000)
    target = 2.0 / math.sqrt(math.pi)
    assert abs(c.value - target) < 0.01 * target
    assert abs(c.value - target) < 4 * c.stderr


def test_truncated_centering_pathological_is_finite():
    s = ProcessSpec.pathological()
    from blockstat.gfuncs import log_second_moment_g

    v0 = population_moments(s, 2)[0]
    g = log_second_moment_g(v0)
    c = truncated_centering(s, g, GINI, 100, 10, 50)
    assert np.isfinite(c.value) and np.isfinite(c.stderr)


def test_long_run_variance_bartlett():
    x = generate(ProcessSpec.ar1(0.5, seed=2), 200_000)
    L = math.ceil(200_000 ** (1 / 3))
    d = x - x.mean()
    manual = d @ d / d.size + 2 * sum((1 - t / (L + 1)) * (d[:-t] @ d[t:]) / d.size for t in range(1, L + 1))
    assert long_run_variance(x) == pytest.approx(manual, rel=1e-12)
    assert long_run_variance(x) == pytest.approx(4.0, rel=0.1)
    assert long_run_variance(np.array([1.0, -1.0] * 50), lags=5) >= 0.0


def test_limit_law_nonnegative():
    with pytest.raises(ValueError):
        LimitLaw(-1.0, 0.1, "gaussian", 0.0)
    law = LimitLaw(2.0, 2.0 * GAMMA_UNIT, "gaussian", 2 * math.sqrt(2) / math.sqrt(math.pi))
    assert law.to_dict()["sigma_sq"] == 2.0
    assert gamma_squared(GINI, math.sqrt(law.sigma_sq)) == pytest.approx(law.gamma_sq, rel=1e-10)
