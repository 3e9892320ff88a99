"""Limit quantities of the block U-statistic: sigma^2, gamma^2 and the centerings."""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .blocks import BlockScheme, local_moments, local_statistics
from .errors import DegenerateKernel, MethodUnavailable
from .gfuncs import GSpec
from .processes import (
    GAUSSIAN_FUNCTIONS,
    ProcessSpec,
    generate,
    generate_batch,
    hermite_expand,
    population_moments,
)
from .ustat import KernelSpec, Normal, gamma_n_squared, hoeffding, u_statistic

CENTERING_METHODS = ("gaussian", "zn-expectation", "truncated-expectation")
DEFAULT_KAPPA = 0.5

# replication ids reserved for the Monte Carlo centerings, disjoint from the
# ids a harness run uses for the statistic itself
CENTERING_REPLICATION_BASE = 1 << 32

_POLY_DEGREE = {"identity": 1, "square_minus_one": 2, "cube": 3}


@dataclass
class LimitLaw:
    sigma_sq: float
    gamma_sq: float
    centering_method: str
    centering_value: float
    centering_se: float = 0.0
    kappa: float | None = None
    sigma_sq_se: float = 0.0
    sigma_sq_mode: str = "given"

    def __post_init__(self):
        if self.sigma_sq < 0 or self.gamma_sq < 0:
            raise ValueError("sigma_sq and gamma_sq must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SigmaSquared:
    estimate: float
    stderr: float
    mode: str
    lags: int | None = None
    negative: bool = False


def _composite(x, w, mu):
    """``D_t = sum_k w_k (X_t^k - mu_k)``."""
    out = np.zeros(np.shape(x))
    xk = np.ones(np.shape(x))
    for k in range(len(w)):
        xk = xk * x
        if w[k] != 0.0:
            out += w[k] * (xk - mu[k])
    return out


def _gaussian_polynomial(spec: ProcessSpec):
    """``(P, degree, rho)`` with ``X_t = P(Z_t)``, ``Z`` unit Gaussian with autocorrelations ``rho``."""
    a = np.asarray(spec.coeffs, dtype=np.float64)
    s = float(np.sqrt(a @ a))
    if spec.variant in ("iid", "linear"):
        if spec.innovation != "normal":
            return None
        P, deg = (lambda z: s * z), 1
    elif spec.variant == "gaussian_hermite":
        if spec.hermite is not None:
            from numpy.polynomial import hermite_e

            c = np.r_[0.0, spec.hermite]
            P, deg = (lambda z: hermite_e.hermeval(z, c)), len(spec.hermite)
        elif spec.phi in _POLY_DEGREE:
            P, deg = GAUSSIAN_FUNCTIONS[spec.phi], _POLY_DEGREE[spec.phi]
        else:
            return None
    else:
        return None
    an = a / s
    w = an.size
    rho = np.array([an[: w - t] @ an[t:] for t in range(w)])
    return P, deg, rho


def sigma_squared(spec: ProcessSpec, g: GSpec, lags: int | None = None, replications: int = 100,
                  n: int = 20_000, seed: int | None = None, mode: str = "auto") -> SigmaSquared:
    """Long-run variance of the composite series ``D_t = grad g(v0) . (X_t^k - E X^k)_k``.

    Modes
    -----
    ``hermite``
        Gaussian polynomial processes ``X_t = P(Z_t)``: the composite is a
        polynomial ``psi(Z_t)`` and
        ``sigma^2 = sum_t sum_q q! c_q(psi)^2 rho_t^q``, summed exactly.
    ``iid``
        No cross-lags; ``Var D_1`` from population moments of order up to ``2m``.
    ``mc``
        Autocovariances up to lag ``L`` averaged over independent replicates.
        ``L`` defaults to ``width - 1``, beyond which the simulated process
        has no dependence. A negative estimate is flagged, not clamped.
    """
    w = g.composite_weights()
    m = w.size
    if mode == "auto":
        if spec.variant in ("iid", "pathological"):
            mode = "iid"
        elif _gaussian_polynomial(spec) is not None:
            mode = "hermite"
        else:
            mode = "mc"
    if mode == "iid":
        if spec.variant not in ("iid", "pathological"):
            raise MethodUnavailable("iid mode needs an independent process")
        mu = population_moments(spec, 2 * m)[0]
        mu0 = np.r_[1.0, mu]
        var = sum(w[j] * w[k] * (mu0[j + k + 2] - mu0[j + 1] * mu0[k + 1])
                  for j in range(m) for k in range(m))
        return SigmaSquared(float(var), 0.0, "iid", 0, bool(var < 0))
    if mode == "hermite":
        gp = _gaussian_polynomial(spec)
        if gp is None:
            raise MethodUnavailable(f"{spec.variant} is not a Gaussian polynomial process")
        P, deg, rho = gp
        mu = population_moments(spec, m)[0]
        psi = lambda z: _composite(P(z), w, mu)  # noqa: E731
        Q = deg * m
        c = hermite_expand(psi, Q, nodes=max(128, 2 * Q + 2)).coeffs
        q = np.arange(1, Q + 1)
        fact = np.array([math.factorial(int(i)) for i in q], dtype=np.float64)
        per_lag = np.array([np.sum(fact * c * c * r**q) for r in rho])
        s2 = per_lag[0] + 2.0 * per_lag[1:].sum()
        return SigmaSquared(float(s2), 0.0, "hermite", rho.size - 1, bool(s2 < 0))
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    L = spec.width - 1 if lags is None else int(lags)
    mu = population_moments(spec, m)[0]
    seed = spec.seed if seed is None else seed
    est = np.empty(replications)
    for r in range(replications):
        d = _composite(generate(spec, n, seed, CENTERING_REPLICATION_BASE + r), w, mu)
        acov = [d @ d / n] + [d[:-t] @ d[t:] / n for t in range(1, L + 1)]
        est[r] = acov[0] + 2.0 * sum(acov[1:])
    s2 = float(est.mean())
    if s2 < 0:
        warnings.warn("negative long-run variance estimate: lag window too wide for the run length")
    return SigmaSquared(s2, float(est.std(ddof=1) / np.sqrt(replications)), "mc", L, bool(s2 < 0))


def long_run_variance(x, lags: int | None = None, mean: float | None = None) -> float:
    """Bartlett-weighted long-run variance of a series; lag window ``ceil(n^(1/3))`` by default."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 2:
        raise ValueError("need at least two observations")
    L = math.ceil(n ** (1.0 / 3.0)) if lags is None else int(lags)
    L = min(L, n - 1)
    d = x - (x.mean() if mean is None else mean)
    s = d @ d / n
    for t in range(1, L + 1):
        s += 2.0 * (1.0 - t / (L + 1.0)) * (d[:-t] @ d[t:]) / n
    return float(s)


@functools.lru_cache(maxsize=64)
def _unit_constants(h: KernelSpec) -> tuple[float, float]:
    parts = hoeffding(h, Normal(1.0))
    return parts.theta, gamma_n_squared(h, Normal(1.0), parts)


def _homogeneous(h: KernelSpec) -> bool:
    return h.is_difference and h.homogeneity is not None


def gamma_squared(h: KernelSpec, sigma: float) -> float:
    """``Cov(h(sN, sN'), h(sN', sN''))`` for independent standard normals.

    Computed as the variance of the first Hoeffding projection under
    ``N(0, sigma^2)``. For difference kernels homogeneous of degree ``d``
    the unit-scale value is computed once and multiplied by ``sigma^(2d)``.
    Raises ``DegenerateKernel`` at or below tolerance.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if _homogeneous(h):
        return _unit_constants(h)[1] * float(sigma) ** (2.0 * h.homogeneity)
    return gamma_n_squared(h, Normal(float(sigma)))


@dataclass
class Centering:
    value: float
    stderr: float
    method: str
    replications: int = 0


def gaussian_centering(h: KernelSpec, sigma: float) -> Centering:
    """``E h(sN, sN')``; only for kernels of the form ``psi(x - y)``."""
    if not h.is_difference:
        raise MethodUnavailable(f"gaussian centering needs a difference kernel, {h.name!r} is not")
    if _homogeneous(h):
        try:
            theta = _unit_constants(h)[0] * float(sigma) ** h.homogeneity
        except DegenerateKernel:
            theta = hoeffding(h, Normal(1.0)).theta * float(sigma) ** h.homogeneity
    else:
        theta = hoeffding(h, Normal(float(sigma))).theta
    return Centering(theta, 0.0, "gaussian")


def zn_centering(spec: ProcessSpec, g: GSpec, h: KernelSpec, block_length: int,
                 replications: int = 2000, seed: int | None = None) -> Centering:
    """``E h(Z_n, Z_n')`` with ``Z_n = l^(-1/2) sum_t D_t`` over a block, by simulation."""
    w = g.composite_weights()
    mu = population_moments(spec, w.size)[0]
    seed = spec.seed if seed is None else seed
    ids = CENTERING_REPLICATION_BASE + np.arange(2 * replications)
    x = generate_batch(spec, block_length, ids, seed)
    z = _composite(x, w, mu).sum(axis=1) / np.sqrt(block_length)
    v = h(z[0::2], z[1::2])
    return Centering(float(v.mean()), float(v.std(ddof=1) / np.sqrt(replications)),
                     "zn-expectation", replications)


def truncated_centering(spec: ProcessSpec, g: GSpec, h: KernelSpec, block_length: int,
                        block_count: int, replications: int = 200,
                        seed: int | None = None) -> Centering:
    """Mean of the truncated U-statistic over simulated null series.

    Each replicate's ``U^eta`` is an unbiased estimate of
    ``E h(W^eta_1, W^eta_2)``; the replicates are independent.
    """
    seed = spec.seed if seed is None else seed
    scheme = BlockScheme(block_length, block_count, block_length * block_count)
    vals = np.empty(replications)
    for r in range(replications):
        x = generate(spec, scheme.n, seed, CENTERING_REPLICATION_BASE + r)
        wt = local_statistics(local_moments(x, scheme, g.m), g, truncated=True)
        vals[r] = u_statistic(wt, h)
    return Centering(float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(replications)),
                     "truncated-expectation", replications)


def centering(method: str, h: KernelSpec, sigma: float | None = None,
              spec: ProcessSpec | None = None, g: GSpec | None = None,
              block_length: int | None = None, block_count: int | None = None,
              replications: int | None = None, seed: int | None = None) -> Centering:
    """Dispatch to one of ``gaussian``, ``zn-expectation`` or ``truncated-expectation``."""
    if method == "gaussian":
        if sigma is None:
            raise MethodUnavailable("gaussian centering needs sigma")
        return gaussian_centering(h, sigma)
    if method not in CENTERING_METHODS:
        raise ValueError(f"centering method must be one of {CENTERING_METHODS}")
    if spec is None or g is None or block_length is None:
        raise MethodUnavailable(f"{method} centering needs a null-process spec, g and block length")
    if method == "zn-expectation":
        return zn_centering(spec, g, h, block_length, replications or 2000, seed)
    if block_count is None:
        raise MethodUnavailable("truncated-expectation centering needs the block count")
    return truncated_centering(spec, g, h, block_length, block_count, replications or 200, seed)
