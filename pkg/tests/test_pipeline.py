import math

import numpy as np
import pytest

from blockstat.errors import BlockTooLong, CenteringTooNoisy, DomainViolation
from blockstat.gfuncs import preset_g
from blockstat.pipeline import constancy_test, null_moments, sample_moments
from blockstat.processes import ProcessSpec, generate


def test_report_fields_with_known_null():
    x = generate(ProcessSpec.iid(seed=1), 16000)
    rep = constancy_test(x, 400, v0=[0.0, 1.0], sigma_sq=2.0)
    gam2 = 2.0 * (1 / 3 + (2 * math.sqrt(3) - 4) / math.pi)
    assert rep.gamma_sq == pytest.approx(gam2, rel=1e-10)
    assert rep.centering == pytest.approx(2 * math.sqrt(2) / math.sqrt(math.pi), rel=1e-10)
    assert rep.block_count == 40 and rep.block_length == 400
    assert rep.diagnostics["v0_estimated"] is False
    z = math.sqrt(40) * (rep.U_n - rep.centering) / (2 * math.sqrt(gam2))
    assert rep.standardized == pytest.approx(z, rel=1e-12)


def test_estimated_v0_is_flagged():
    x = generate(ProcessSpec.iid(seed=2), 8010)
    rep = constancy_test(x, 400)
    assert rep.diagnostics["v0_estimated"] is True
    assert rep.diagnostics["dropped"] == 10
    assert rep.diagnostics["sigma_sq_mode"] == "bartlett"
    np.testing.assert_allclose(rep.diagnostics["v0"], sample_moments(x, 2), rtol=1e-15)


def test_ratio_warning_flag():
    x = generate(ProcessSpec.iid(seed=3), 2500)
    rep = constancy_test(x, 50, sigma_sq=2.0, v0=[0, 1])
    assert rep.diagnostics["ratio_warning"] is True


def test_spec_supplies_sigma():
    s = ProcessSpec.ar1(0.5, seed=4)
    x = generate(s, 16000)
    rep = constancy_test(x, 400, spec=s, v0=null_moments(s, "log_variance"))
    assert rep.sigma_sq == pytest.approx(10 / 3, rel=1e-8)
    assert rep.diagnostics["sigma_sq_mode"] == "hermite"


def test_noisy_centering_refused():
    s = ProcessSpec.iid(seed=5)
    x = generate(s, 16000)
    with pytest.raises(CenteringTooNoisy):
        constancy_test(x, 400, spec=s, v0=[0, 1], centering="zn-expectation", replications=200)


def test_mc_centering_accepted_with_enough_replications():
    s = ProcessSpec.iid(seed=6)
    x = generate(s, 16000)
    rep = constancy_test(x, 400, spec=s, v0=[0, 1], centering="zn-expectation",
                         replications=20000, seed=1)
    assert rep.centering_method == "zn-expectation"
    assert rep.diagnostics["centering_noise"] <= 0.1


def test_errors_propagate():
    with pytest.raises(BlockTooLong):
        constancy_test(np.ones(10), 20)
    with pytest.raises(DomainViolation):
        constancy_test(np.r_[np.random.default_rng(0).standard_normal(20), np.ones(10)], 10,
                       v0=[0, 1], sigma_sq=2.0)


def test_gspec_passthrough():
    x = generate(ProcessSpec.iid(seed=7), 4000)
    g = preset_g("skewness", [0.0, 1.0, 0.0])
    rep = constancy_test(x, 200, g=g, sigma_sq=6.0)
    assert rep.config["g"] == "skewness"
