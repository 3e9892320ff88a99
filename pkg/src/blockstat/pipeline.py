"""End-to-end constancy test: series -> blocks -> local statistics -> standardized U-statistic."""
from __future__ import annotations

import numpy as np

from .asymptotics import (
    LimitLaw,
    centering as make_centering,
    gamma_squared,
    long_run_variance,
    sigma_squared,
)
from .blocks import as_series, compensated_sum, local_moments, local_statistics, partition
from .errors import CenteringTooNoisy
from .gfuncs import GSpec, g_order, make_g
from .processes import ProcessSpec, population_moments
from .ustat import TestReport, get_kernel, standardized_statistic

RATIO_WARNING = 0.2
NOISE_LIMIT = 0.1


def sample_moments(x, m: int) -> np.ndarray:
    """Raw sample moments ``mean(x^k)``, ``k = 1..m``, with compensated sums."""
    x = as_series(x)
    return np.array([compensated_sum(x**k) / x.size for k in range(1, m + 1)])


def constancy_test(series, block_length: int, g: str | GSpec = "log_variance",
                   kernel: str = "gini", centering: str = "gaussian", v0=None,
                   sigma_sq: float | None = None, spec: ProcessSpec | None = None,
                   lags: int | None = None, replications: int | None = None,
                   seed: int | None = None) -> TestReport:
    """Test the null that the block statistics share one law.

    Parameters
    ----------
    series : array_like
        One-dimensional observations.
    block_length : int
        Length ``l`` of the non-overlapping blocks; a trailing partial block is dropped.
    g : str or GSpec
        Registered moment function name, or a ready ``GSpec`` (then ``v0`` is ignored).
    kernel : str
        Name of a registered kernel.
    centering : {"gaussian", "zn-expectation", "truncated-expectation"}
        The two Monte Carlo methods need ``spec``, a process describing the null.
    v0 : array_like, optional
        Population moment vector. Estimated from the whole series when absent;
        the report then carries ``diagnostics["v0_estimated"] = True``.
    sigma_sq : float, optional
        Long-run variance of the composite series. Taken from ``spec`` when
        given, else estimated with Bartlett weights.

    Returns
    -------
    TestReport
    """
    x = as_series(series)
    if x.ndim != 1:
        raise ValueError("constancy_test takes one series")
    h = get_kernel(kernel)
    scheme = partition(x, block_length)
    if isinstance(g, GSpec):
        gspec = g
    else:
        m = g_order(g)
        estimated = v0 is None
        v = sample_moments(x, m) if estimated else np.asarray(v0, dtype=np.float64)
        gspec = make_g(g, v, estimated_v0=estimated)
    moments = local_moments(x, scheme, gspec.m)
    w = local_statistics(moments, gspec)
    b, l = scheme.block_count, scheme.block_length

    if sigma_sq is not None:
        s2, s2_se, s2_mode = float(sigma_sq), 0.0, "given"
    elif spec is not None:
        res = sigma_squared(spec, gspec, seed=seed)
        s2, s2_se, s2_mode = res.estimate, res.stderr, res.mode
    else:
        wts = gspec.composite_weights()
        d = sum(wts[k] * (x ** (k + 1) - gspec.v0[k]) for k in range(gspec.m))
        s2, s2_se, s2_mode = long_run_variance(d, lags), 0.0, "bartlett"
    gam2 = gamma_squared(h, np.sqrt(s2))

    c = make_centering(centering, h, sigma=np.sqrt(s2), spec=spec, g=gspec, block_length=l,
                       block_count=b, replications=replications, seed=seed)
    noise = c.stderr * np.sqrt(b) / (2.0 * np.sqrt(gam2))
    if noise > NOISE_LIMIT:
        raise CenteringTooNoisy(
            f"centering standard error {c.stderr:.3g} moves the statistic by {noise:.3g} "
            f"(limit {NOISE_LIMIT}); raise the replication count")

    sd = np.sqrt(s2)
    cut = float(3.0 * sd)
    tail = float(np.mean(np.where(np.abs(w) > cut, w * w, 0.0)))
    diagnostics = {
        "dropped": scheme.dropped,
        "ratio_b_over_l": b / l,
        "ratio_warning": b / l > RATIO_WARNING,
        "v0_estimated": bool(gspec.estimated_v0),
        "v0": gspec.v0.tolist(),
        "sigma_sq_mode": s2_mode,
        "sigma_sq_se": s2_se,
        "ui_tail_mass": tail,
        "ui_tail_cut": cut,
        "centering_noise": float(noise),
    }
    law = LimitLaw(s2, gam2, c.method, c.value, c.stderr, sigma_sq_se=s2_se, sigma_sq_mode=s2_mode)
    config = {
        "block_length": l, "g": gspec.name, "kernel": h.name, "centering": centering,
        "v0": None if v0 is None else np.asarray(v0, dtype=float).tolist(),
        "sigma_sq": sigma_sq, "lags": lags, "replications": replications, "seed": seed,
        "spec": None if spec is None else spec.to_dict(), "limit_law": law.to_dict(),
    }
    return standardized_statistic(
        w, h, c.value, gam2, c.method, block_length=l, centering_se=c.stderr,
        sigma_sq=s2, diagnostics=diagnostics, config=config)


def null_moments(spec: ProcessSpec, g: str) -> np.ndarray:
    """Population moment vector ``v0`` of ``spec`` for a registered g."""
    return population_moments(spec, g_order(g))[0]
