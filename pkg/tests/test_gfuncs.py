import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockstat.errors import DegenerateMoments, DomainViolation
from blockstat.gfuncs import (
    EtaSpec,
    eta,
    eta_gradient,
    g_order,
    gradient_check,
    linear_g,
    lipschitz_probe,
    log_second_moment_g,
    make_g,
    preset_g,
    register_g,
    smoothstep5,
)

NORMAL_V0 = {
    "log_variance": [0.0, 1.0],
    "skewness": [0.0, 1.0, 0.0],
    "excess_kurtosis": [0.0, 1.0, 0.0, 3.0],
}


@pytest.mark.parametrize("name", sorted(NORMAL_V0))
def test_presets_vanish_at_v0(name):
    g = preset_g(name, NORMAL_V0[name])
    assert g(g.v0) == pytest.approx(0.0, abs=1e-15)
    assert g_order(name) == len(NORMAL_V0[name])


def test_preset_raw_values():
    # a block with values {-1, 1, 2}: mean 2/3
    x = np.array([-1.0, 1.0, 2.0])
    raw = np.array([np.mean(x**k) for k in range(1, 5)])
    c = x - x.mean()
    var = np.mean(c**2)
    g = preset_g("log_variance", [0.0, 1.0])
    assert g(raw[:2]) == pytest.approx(np.log(var), rel=1e-14)
    g = preset_g("skewness", [0.0, 1.0, 0.0])
    assert g(raw[:3]) == pytest.approx(np.mean(c**3) / var**1.5, rel=1e-13)
    g = preset_g("excess_kurtosis", [0.0, 1.0, 0.0, 3.0])
    assert g(raw) == pytest.approx(np.mean(c**4) / var**2 - 3.0, rel=1e-13)


def test_log_variance_gradient_at_standard_normal():
    g = preset_g("log_variance", [0.0, 1.0])
    np.testing.assert_allclose(g.composite_weights(), [0.0, 1.0])


def test_degenerate_v0_rejected():
    with pytest.raises(DegenerateMoments):
        preset_g("log_variance", [1.0, 1.0])
    with pytest.raises(ValueError):
        preset_g("skewness", [0.0, 1.0])
    with pytest.raises(KeyError):
        preset_g("nope", [0.0, 1.0])


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(NORMAL_V0)),
       st.lists(st.floats(-0.3, 0.3), min_size=4, max_size=4))
def test_gradients_match_finite_differences(name, jitter):
    v0 = np.asarray(NORMAL_V0[name], dtype=float)
    g = preset_g(name, v0)
    point = v0 + 0.2 * np.asarray(jitter[: g.m]) * np.r_[1.0, 0.5, 1.0, 1.0][: g.m]
    assert gradient_check(g, point) < 1e-6


def test_gradient_check_refuses_outside_domain():
    g = preset_g("log_variance", [0.0, 1.0])
    with pytest.raises(DomainViolation):
        gradient_check(g, [1.0, 1.0])


def test_smoothstep_endpoints():
    assert smoothstep5(0.0) == 0.0 and smoothstep5(1.0) == 1.0
    assert smoothstep5(-3.0) == 0.0 and smoothstep5(7.0) == 1.0
    assert smoothstep5(0.5) == pytest.approx(0.5)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(0.0, 2 * np.pi))
def test_eta_plateau_and_support(r, angle):
    spec = EtaSpec(np.array([0.5, 2.0]), 0.25)
    x = spec.v0 + r * 0.25 * np.array([np.cos(angle), np.sin(angle)])
    val = eta(x, spec)
    assert 0.0 <= val <= 1.0
    if r <= 1.0:
        assert val == 1.0
    if r >= 2.0:
        assert val == 0.0


def test_eta_gradient_matches_finite_differences():
    spec = EtaSpec(np.array([0.0, 1.0]), 0.3, np.array([2.0, 1.0]))
    x = np.array([0.55, 1.2])
    step = 1e-7
    fd = [(eta(x + step * e, spec) - eta(x - step * e, spec)) / (2 * step) for e in np.eye(2)]
    np.testing.assert_allclose(eta_gradient(x, spec), fd, rtol=1e-6, atol=1e-9)


def test_truncated_equals_g_near_v0_and_zero_far():
    g = preset_g("log_variance", [0.0, 1.0])
    near = g.v0 + np.array([0.5 * g.a, 0.0])
    far = g.v0 + np.array([0.0, 2.5 * g.a])
    assert g.truncated(near) == pytest.approx(g(near))
    assert g.truncated(far) == 0.0


def test_default_radius_keeps_support_in_domain():
    for v0 in ([0.0, 1.0], [0.4, 1.0], [-2.0, 4.5]):
        g = preset_g("log_variance", v0)
        rng = np.random.default_rng(0)
        d = rng.standard_normal((20000, 2))
        d *= 2.0 * g.a / np.linalg.norm(d, axis=1, keepdims=True)
        assert np.all(g.in_domain(g.v0 + d))


def test_lipschitz_probe_is_finite():
    g = preset_g("skewness", [0.0, 1.0, 0.0])
    assert np.isfinite(lipschitz_probe(g, 20000))


def test_linear_g():
    g = linear_g([2.0, -1.0], [1.0, 3.0])
    assert g([1.0, 3.0]) == 0.0
    assert g([2.0, 3.0]) == 2.0
    np.testing.assert_array_equal(g.gradient(np.zeros((5, 2)))[3], [2.0, -1.0])


def test_log_second_moment_eta_scale():
    g = log_second_moment_g([0.0, 1.0], eta_scale=(100.0, 1.0))
    assert g.truncated([10.0, 1.0]) == 0.0
    assert g.truncated([0.5, 1.0]) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        log_second_moment_g([0.0, 1.0], eta_scale=(1.0, 2.0))


def test_register_custom_g():
    register_g("mean_shift", 1, lambda v0, a=None, estimated_v0=False: linear_g([1.0], v0))
    g = make_g("mean_shift", [0.5])
    assert g_order("mean_shift") == 1
    assert g([1.5]) == 1.0
    with pytest.raises(KeyError):
        make_g("not_registered", [0.0])
