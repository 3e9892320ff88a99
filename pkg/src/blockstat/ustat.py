"""U-statistics of degree two, their Hoeffding decomposition and standardisation."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import hermite_e
from scipy import integrate, stats

from .errors import DegenerateKernel, TooFewBlocks

#: estimates of gamma^2 at or below this are treated as zero
DEGENERACY_TOL = 1e-12
GH_ORDER = 64


@dataclass(frozen=True)
class KernelSpec:
    """Symmetric kernel ``h(x, y)``.

    ``psi`` is set for difference kernels, ``h(x, y) = psi(x - y)`` with
    ``psi`` even; ``homogeneity`` is the degree ``d`` with
    ``h(c x, c y) = c^d h(x, y)`` for ``c > 0`` when known.
    """

    name: str
    h: Callable
    lipschitz_constant: float
    growth_constant: float
    shift_invariant: bool = False
    psi: Callable | None = None
    homogeneity: float | None = None

    def __call__(self, x, y):
        return self.h(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))

    @property
    def is_difference(self) -> bool:
        return self.psi is not None


def _gini(x, y):
    return np.abs(x - y)


def _half_sq(d):
    return 0.5 * d * d


KERNELS = {
    "gini": KernelSpec("gini", _gini, 1.0, 1.0, True, np.abs, 1.0),
    "sum": KernelSpec("sum", lambda x, y: x + y, 1.0, 1.0),
    "product": KernelSpec("product", lambda x, y: x * y, np.inf, np.inf),
    "half_squared_difference": KernelSpec(
        "half_squared_difference", lambda x, y: _half_sq(x - y), np.inf, np.inf,
        True, _half_sq, 2.0),
}


def get_kernel(name: str) -> KernelSpec:
    try:
        return KERNELS[name]
    except KeyError:
        raise KeyError(f"unknown kernel {name!r}; choose from {sorted(KERNELS)}") from None


def check_kernel(h: KernelSpec, n: int = 2000, seed: int = 0, scale: float = 10.0) -> dict:
    """Sampled checks of symmetry, linear growth and (if claimed) shift invariance."""
    rng = np.random.default_rng(seed)
    x, y, c = (scale * rng.standard_normal(n) for _ in range(3))
    hxy = h(x, y)
    out = {
        "symmetric": bool(np.allclose(hxy, h(y, x), rtol=1e-12, atol=1e-12)),
        "linear_growth": bool(np.all(np.abs(hxy) <= h.growth_constant * (1 + np.abs(x) + np.abs(y)))),
    }
    if h.shift_invariant:
        out["shift_invariant"] = bool(np.allclose(h(x + c, y + c), hxy, rtol=1e-9, atol=1e-9))
    return out


# --- distributions of the block statistics ---------------------------------

@dataclass(frozen=True)
class Normal:
    sigma: float = 1.0
    mean: float = 0.0

    def ppf(self, u):
        return self.mean + self.sigma * stats.norm.ppf(u)


@dataclass(frozen=True)
class Discrete:
    """Finite-support law; ``probs`` is normalised on construction."""

    values: np.ndarray
    probs: np.ndarray
    mode: str = "exact-discrete"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        p = np.asarray(self.probs, dtype=np.float64).ravel()
        if v.shape != p.shape or v.size == 0:
            raise ValueError("values and probs must be nonempty and of equal length")
        if np.any(p < 0) or not p.sum() > 0:
            raise ValueError("probabilities must be nonnegative with positive total")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p / p.sum())

    def ppf(self, u):
        order = np.argsort(self.values, kind="stable")
        cdf = np.cumsum(self.probs[order])
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)
        return self.values[order][idx]


def Empirical(sample) -> Discrete:
    """Empirical law of a sample: equal weight on every observation."""
    s = np.asarray(sample, dtype=np.float64).ravel()
    return Discrete(s, np.full(s.size, 1.0 / s.size), mode="empirical")


def bernoulli(p: float = 0.5) -> Discrete:
    return Discrete(np.array([0.0, 1.0]), np.array([1.0 - p, p]))


def _gh():
    z, w = hermite_e.hermegauss(GH_ORDER)
    return z, w / np.sqrt(2.0 * np.pi)


def _split_normal_expectation(f, cut=0.0):
    """``E f(Y)``, ``Y ~ N(0,1)``, integrating separately on each side of ``cut``."""
    dens = lambda y: f(y) * np.exp(-0.5 * y * y) / np.sqrt(2.0 * np.pi)  # noqa: E731
    opts = dict(epsabs=1e-14, epsrel=1e-13, limit=200)
    lo = integrate.quad(dens, -np.inf, cut, **opts)[0]
    hi = integrate.quad(dens, cut, np.inf, **opts)[0]
    return lo + hi


@dataclass(frozen=True)
class HoeffdingParts:
    """``h(x, y) = theta + h1(x) + h1(y) + h2(x, y)``."""

    theta: float
    h1: Callable
    h2: Callable
    estimation_mode: str
    kernel: KernelSpec = field(repr=False)

    def reconstruct(self, x, y):
        return self.theta + self.h1(x) + self.h1(y) + self.h2(x, y)


def hoeffding(h: KernelSpec, distribution) -> HoeffdingParts:
    """Hoeffding decomposition of ``h`` under the law of the block statistics.

    Expectations are exact sums for ``Discrete`` (and ``Empirical``) laws and
    Gauss-Hermite or split adaptive quadrature for ``Normal``.
    """
    if isinstance(distribution, Discrete):
        v, p = distribution.values, distribution.probs
        theta = float(p @ h(v[:, None], v[None, :]) @ p)

        def h1(x):
            x = np.asarray(x, dtype=np.float64)
            return h(x[..., None], v) @ p - theta

        mode = distribution.mode
    elif isinstance(distribution, Normal):
        mu, sig = distribution.mean, distribution.sigma
        if h.is_difference:
            theta = _split_normal_expectation(lambda z: h.psi(np.sqrt(2.0) * sig * z))

            def _h1_point(x):
                return _split_normal_expectation(
                    lambda z: h.psi(x - mu - sig * z), (x - mu) / sig) - theta
        else:
            z, w = _gh()
            grid = mu + sig * z
            theta = float(w @ h(grid[:, None], grid[None, :]) @ w)

            def _h1_point(x):
                return float(h(x, grid) @ w) - theta

        def h1(x):
            x = np.asarray(x, dtype=np.float64)
            return np.vectorize(_h1_point, otypes=[float])(x)

        mode = "gaussian-quadrature"
    else:
        raise TypeError(f"unsupported distribution {type(distribution).__name__}")

    def h2(x, y):
        return h(x, y) - h1(x) - h1(y) - theta

    return HoeffdingParts(theta, h1, h2, mode, h)


def _projection_variance(parts: HoeffdingParts, distribution) -> float:
    if isinstance(distribution, Discrete):
        f = parts.h1(distribution.values)
        p = distribution.probs
        return float(p @ (f * f) - (p @ f) ** 2)
    z, w = _gh()
    f = parts.h1(distribution.mean + distribution.sigma * z)
    return float(w @ (f * f) - (w @ f) ** 2)


def gamma_n_squared(h: KernelSpec, distribution, parts: HoeffdingParts | None = None) -> float:
    """``Cov(h(W1, W2), h(W2, W3))`` for independent ``W_i``, computed as ``Var h1(W)``.

    Raises
    ------
    DegenerateKernel
        If the value is at or below ``DEGENERACY_TOL``.
    """
    parts = parts or hoeffding(h, distribution)
    g2 = _projection_variance(parts, distribution)
    if not g2 > DEGENERACY_TOL:
        raise DegenerateKernel(
            f"kernel {h.name!r} is degenerate under this law (gamma_n^2 = {g2:.3g})")
    return g2


def kernel_covariance_mc(h: KernelSpec, draws: np.ndarray) -> tuple[float, float]:
    """Monte Carlo ``Cov(h(W1, W2), h(W2, W3))`` from an ``(n, 3)`` array of independent draws.

    Returns the estimate and its delta-method standard error.
    """
    w1, w2, w3 = draws[:, 0], draws[:, 1], draws[:, 2]
    a = h(w1, w2)
    b = h(w2, w3)
    mu = 0.5 * (a.mean() + b.mean())
    est = np.mean(a * b) - mu * mu
    # influence function of E[ab] - (E[a]/2 + E[b]/2)^2
    infl = a * b - mu * (a + b)
    return float(est), float(infl.std(ddof=1) / np.sqrt(len(a)))


# --- the statistic ----------------------------------------------------------

def _check_blocks(w):
    if w.shape[-1] < 2:
        raise TooFewBlocks(f"need at least 2 block statistics, got {w.shape[-1]}")


def gini_mean_difference(w, axis: int = -1) -> np.ndarray:
    """``U_n`` for ``h(x, y) = |x - y|`` in ``O(b log b)`` via order statistics."""
    w = np.sort(np.moveaxis(np.asarray(w, dtype=np.float64), axis, -1), axis=-1)
    _check_blocks(w)
    b = w.shape[-1]
    coef = 2.0 * np.arange(1, b + 1) - b - 1.0
    return 2.0 * (w @ coef) / (b * (b - 1.0))


def _double_sum(w, h, chunk=256):
    b = w.size
    parts = []
    for start in range(0, b, chunk):
        rows = w[start:start + chunk]
        block = h(rows[:, None], w[None, :])
        block[np.arange(rows.size), np.arange(start, start + rows.size)] = 0.0
        parts.append(block.sum(axis=1))
    total = np.concatenate(parts)
    return float(np.sum(total)) / (b * (b - 1.0))


def u_statistic(w, h: KernelSpec, method: str = "auto"):
    """``(1 / (b (b-1))) sum_{j != k} h(W_j, W_k)``.

    ``w`` may be 1-d or a 2-d batch (one statistic per row). ``method`` is
    ``"exact"`` for the double sum, ``"sorted"`` for the Gini fast path, or
    ``"auto"`` (sorted whenever ``h`` is the Gini kernel).
    """
    w = np.asarray(w, dtype=np.float64)
    _check_blocks(w)
    if method == "auto":
        method = "sorted" if h.name == "gini" else "exact"
    if method == "sorted":
        if h.name != "gini":
            raise ValueError("the sorted fast path only applies to the gini kernel")
        out = gini_mean_difference(w)
        return float(out) if w.ndim == 1 else out
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    if w.ndim == 1:
        return _double_sum(w, h)
    return np.array([_double_sum(row, h) for row in w.reshape(-1, w.shape[-1])]).reshape(w.shape[:-1])


@dataclass
class TestReport:
    U_n: float
    centering: float
    centering_method: str
    gamma_sq: float
    standardized: float
    p_value: float
    block_count: int
    block_length: int | None = None
    centering_se: float = 0.0
    sigma_sq: float | None = None
    diagnostics: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_jsonable, **kw)


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def normal_two_sided_p(z):
    return 2.0 * stats.norm.sf(np.abs(z))


def standardized_statistic(w, h: KernelSpec, centering: float, gamma_sq: float,
                           centering_method: str = "given", **extra) -> TestReport:
    """``sqrt(b) (U_n - centering) / (2 sqrt(gamma_sq))`` with its two-sided normal p-value."""
    if not gamma_sq > DEGENERACY_TOL:
        raise DegenerateKernel(f"gamma^2 = {gamma_sq!r} is not positive")
    w = np.asarray(w, dtype=np.float64)
    b = w.shape[-1]
    u = u_statistic(w, h)
    z = np.sqrt(b) * (u - centering) / (2.0 * np.sqrt(gamma_sq))
    return TestReport(
        U_n=float(u), centering=float(centering), centering_method=centering_method,
        gamma_sq=float(gamma_sq), standardized=float(z), p_value=float(normal_two_sided_p(z)),
        block_count=int(b), **extra,
    )
