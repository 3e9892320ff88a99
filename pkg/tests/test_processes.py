import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockstat.errors import InvalidCoefficients, NonSquareIntegrable
from blockstat.processes import (
    ProcessSpec,
    builtin_specs,
    coupled_origin,
    generate,
    generate_batch,
    generate_coupled,
    hermite_expand,
    innovations,
    innovation_moments,
    pathological_atoms,
    population_moments,
)


def test_identity_filter_is_iid_stream():
    a = generate(ProcessSpec.linear([1.0], seed=3), 500)
    b = generate(ProcessSpec.iid(seed=3), 500)
    np.testing.assert_array_equal(a, b)


def test_seed_determinism_and_sensitivity():
    s = ProcessSpec.ar1(0.5)
    np.testing.assert_array_equal(generate(s, 1000, seed=7), generate(s, 1000, seed=7))
    assert not np.array_equal(generate(s, 1000, seed=7), generate(s, 1000, seed=8))
    assert not np.array_equal(generate(s, 1000, seed=7, replication=1), generate(s, 1000, seed=7))


@settings(max_examples=25, deadline=None)
@given(st.integers(-500, 500), st.integers(1, 200), st.integers(0, 2**31))
def test_random_access_windows_agree(start, n, seed):
    s = ProcessSpec.geometric(0.4, two_sided=True)
    full = generate(s, 1400, seed, start=-600)
    part = generate(s, n, seed, start=start)
    off = start + 600
    np.testing.assert_array_equal(part, full[off:off + n])


def test_batch_rows_equal_single_runs():
    s = ProcessSpec.hoelder_linear("abs_pow", 0.5, [1.0, 0.5, 0.25])
    batch = generate_batch(s, 50, [0, 3, 9], seed=2)
    for row, r in zip(batch, [0, 3, 9]):
        np.testing.assert_array_equal(row, generate(s, 50, 2, r))


def test_linear_coupling_identity():
    s = ProcessSpec.linear([0.7, -0.2, 0.1, 0.05], lag_start=-1, seed=4)
    x, xs = generate_coupled(s, 40, 10)
    eps = innovations(s, 10, 1, 4, 0)[0]
    eps_prime = innovations(s, 10, 1, 4, 0, stream=1)[0]
    # copies differ only at t with t - 10 in the lag window [-1, 2]
    diff = np.flatnonzero(x != xs) + 1
    assert set(diff) == set(range(9, 13))
    for t in diff:
        assert x[t - 1] - xs[t - 1] == pytest.approx(s.coefficient(t - 10) * (eps - eps_prime), abs=1e-14)


def test_coupling_outside_window_is_identical():
    s = ProcessSpec.ar1(0.5)
    x, xs = generate_coupled(s, 100, 500)
    np.testing.assert_array_equal(x, xs)
    a, b = coupled_origin(s, 5, 1000)
    np.testing.assert_array_equal(a, b)


def test_iid_coupling_single_coordinate():
    x, xs = generate_coupled(ProcessSpec.iid(seed=1), 20, 0, start=0)
    assert list(np.flatnonzero(x != xs)) == [0]


def test_stationarity_halves():
    x = generate(ProcessSpec.ar1(0.5, seed=11), 100_000)
    h1, h2 = x[:50_000], x[50_000:]
    # long-run sd of the mean is 2 / sqrt(n)
    assert abs(h1.mean() - h2.mean()) < 4 * 2 * math.sqrt(2 / 50_000)
    assert abs(h1.var() - h2.var()) < 4 * 0.05


def test_gaussian_hermite_latent_variance():
    s = ProcessSpec.gaussian_hermite([3.0, 2.0, 1.0], phi="identity", seed=2)
    assert sum(c * c for c in s.coeffs) == pytest.approx(1.0)
    y = generate(s, 100_000)
    # long-run variance bound for the variance estimate: sum rho^2 <= 3 -> se < sqrt(2 * 3 / n)
    assert abs(y.var() - 1.0) < 4 * math.sqrt(6 / 100_000)


def test_long_run_variance_of_ar_half():
    reps = generate_batch(ProcessSpec.ar1(0.5, seed=5), 4000, range(400))
    s = reps.sum(axis=1) / math.sqrt(4000)
    # finite-n value of Var(S_n / sqrt(n)) sits slightly below 4
    var = s.var(ddof=1)
    assert abs(var - 4.0) < 4 * 4.0 * math.sqrt(2 / 399) + 0.01


def test_invalid_specs():
    with pytest.raises(InvalidCoefficients):
        ProcessSpec("linear", coeffs=(np.nan,))
    with pytest.raises(InvalidCoefficients):
        ProcessSpec("gaussian_hermite", coeffs=(1.0, 1.0), phi="identity")
    with pytest.raises(InvalidCoefficients):
        ProcessSpec.volterra_process([[1.0, 0.5], [0.0, 0.0]])
    with pytest.raises(InvalidCoefficients):
        ProcessSpec.hoelder_linear("abs_pow", 1.5, [1.0])
    with pytest.raises(InvalidCoefficients):
        ProcessSpec.geometric(1.0)
    with pytest.raises(InvalidCoefficients):
        ProcessSpec.from_dict({"variant": "iid", "bogus": 1})


def test_geometric_window_tail_bound():
    s = ProcessSpec.ar1(0.5)
    assert s.tail_bound < 1e-8
    assert s.width == 28
    assert s.coeffs[:3] == (1.0, 0.5, 0.25)


def test_json_round_trip():
    for s in builtin_specs(seed=9).values():
        assert ProcessSpec.from_json(s.to_json()) == s


def test_innovation_laws_standardized():
    for name in ("normal", "uniform", "rademacher", "laplace"):
        mu = innovation_moments(name, 2)
        assert mu[0] == pytest.approx(0.0, abs=1e-15) and mu[1] == pytest.approx(1.0)
    x = generate(ProcessSpec.iid("laplace", seed=1), 200_000)
    assert abs(x.var() - 1.0) < 4 * math.sqrt(5 / 200_000)


def test_population_moments_linear_analytic():
    mu, how = population_moments(ProcessSpec.ar1(0.5), 4)
    assert how == "analytic"
    np.testing.assert_allclose(mu, [0.0, 4 / 3, 0.0, 3 * (4 / 3) ** 2], atol=1e-7)


def test_population_moments_prepass_for_volterra():
    s = builtin_specs()["volterra"]
    mu, how = population_moments(s, 2)
    assert how == "prepass"
    # E X^2 = sum of squared off-diagonal weights
    assert mu[1] == pytest.approx(0.36 + 0.09 + 0.25, rel=0.02)


def test_pathological_law():
    k, loglog, p = pathological_atoms(30)
    assert p.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(loglog, np.exp(k))
    x = generate(ProcessSpec.pathological(), 20000)
    # only k = 1 survives float64: |X| = exp(-e^e / 2)
    nz = np.abs(x[x != 0])
    np.testing.assert_allclose(nz, math.exp(-0.5 * math.exp(math.e)))
    assert abs(np.mean(x != 0) - 0.5) < 4 * 0.5 / math.sqrt(20000)
    mu, _ = population_moments(ProcessSpec.pathological(), 4)
    assert mu[1] == pytest.approx(0.5 * math.exp(-math.exp(math.e)), rel=1e-12)


@pytest.mark.parametrize("phi, expect", [
    (lambda x: x, [1.0]),
    (lambda x: x**2 - 1.0, [0.0, 1.0]),
    (lambda x: x**3, [3.0, 0.0, 1.0]),
])
def test_hermite_expand_polynomials(phi, expect):
    he = hermite_expand(phi, 6)
    np.testing.assert_allclose(he.coeffs[: len(expect)], expect, atol=1e-12)
    np.testing.assert_allclose(he.coeffs[len(expect):], 0.0, atol=1e-12)


def test_hermite_expand_energy_partial_sums():
    he = hermite_expand(np.sign, 15)
    assert np.all(np.diff(he.energy_partial) >= 0)
    assert he.energy_partial[-1] < 1.0 + 1e-12


def test_hermite_expand_non_square_integrable():
    with pytest.raises(NonSquareIntegrable):
        hermite_expand(lambda x: np.exp(x * x), 4)
