"""Seeded Bernoulli-shift generators and coupled copies.

Every process is ``X_t = f(eps_{t-j}, j in [lag_lo, lag_hi])`` for i.i.d.
innovations ``eps``. Innovations come from a counter-based stream, so the
value of ``eps_u`` depends only on ``(seed, replication, u)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial import hermite_e
from scipy import integrate, special, stats

from . import rng
from .errors import InvalidCoefficients, NonSquareIntegrable

VARIANTS = ("iid", "linear", "hoelder_linear", "gaussian_hermite", "volterra", "pathological")
INNOVATIONS = ("normal", "uniform", "rademacher", "laplace", "t", "uniform01")

# spawn ids of the independent streams hanging off one seed
_MAIN, _PRIME, _DELTA, _DELTA_PRIME, _PREPASS = 0, 1, 2, 3, 4
PREPASS_SIZE = 1_000_000


# --- innovation laws, all centred with unit variance ------------------------

def innovation_ppf(name: str, u, df: float | None = None):
    if name == "normal":
        return special.ndtri(u)
    if name == "uniform":
        return np.sqrt(3.0) * (2.0 * u - 1.0)
    if name == "rademacher":
        return np.where(u < 0.5, -1.0, 1.0)
    if name == "laplace":
        c = u - 0.5
        return -np.sign(c) * np.log1p(-2.0 * np.abs(c)) / np.sqrt(2.0)
    if name == "t":
        if df is None or df <= 2:
            raise InvalidCoefficients("t innovations need df > 2 for unit variance")
        return stats.t.ppf(u, df) * np.sqrt((df - 2.0) / df)
    if name == "uniform01":
        return np.asarray(u, dtype=np.float64)
    raise InvalidCoefficients(f"unknown innovation law {name!r}")


def innovation_moments(name: str, kmax: int, df: float | None = None) -> np.ndarray:
    """Raw moments ``E eps^k``, ``k = 1..kmax``."""
    out = np.zeros(kmax)
    for k in range(2, kmax + 1, 2):
        if name == "normal":
            out[k - 1] = special.factorial2(k - 1)
        elif name == "uniform":
            out[k - 1] = 3.0 ** (k / 2) / (k + 1)
        elif name == "rademacher":
            out[k - 1] = 1.0
        elif name == "laplace":
            out[k - 1] = math.factorial(k) * 2.0 ** (-k / 2)
        elif name == "t":
            out[k - 1] = stats.t.moment(k, df) * ((df - 2.0) / df) ** (k / 2) if k < df else np.inf
        else:
            raise InvalidCoefficients(f"no moments for innovation law {name!r}")
    return out


# --- pointwise maps ----------------------------------------------------------

def _abs_pow(x, g):
    return np.sign(x) * np.abs(x) ** g


HOELDER_FUNCTIONS: dict[str, Callable] = {
    "abs_pow": _abs_pow,
    "abs": lambda x, g=1.0: np.abs(x),
    "clip": lambda x, g=1.0: np.clip(x, -1.0, 1.0),
    "sin": lambda x, g=1.0: np.sin(x),
}

GAUSSIAN_FUNCTIONS: dict[str, Callable] = {
    "identity": lambda y: y,
    "square_minus_one": lambda y: y * y - 1.0,
    "cube": lambda y: y**3,
    "abs_centered": lambda y: np.abs(y) - np.sqrt(2.0 / np.pi),
    "sign": np.sign,
}


def pathological_atoms(cap: int = 30) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Atoms of ``X^2 = exp(-exp(exp(k)))`` with ``P(k) = 2^-k``, tail folded into ``k = cap``.

    Returns ``(k, log(-log X^2), P(k))``; the middle column is ``exp(k)``,
    since ``log X^2`` itself overflows float64 from ``k = 7`` on.
    """
    k = np.arange(1, cap + 1)
    loglog = np.exp(k.astype(np.float64))
    p = 2.0 ** -k.astype(np.float64)
    p[-1] *= 2.0
    return k, loglog, p


def _pathological(u, cap):
    neg = u < 0.5
    v = 2.0 * u - np.where(neg, 0.0, 1.0)
    v = np.where(v <= 0.0, 2.0**-54, v)
    k = np.minimum(np.floor(-np.log2(v)) + 1.0, cap)
    # k >= 2 underflows to 0.0 in float64
    x = np.exp(-0.5 * np.exp(np.minimum(np.exp(k), 700.0)))
    return np.where(neg, -x, x)


# --- spec ----------------------------------------------------------------------

@dataclass(frozen=True)
class ProcessSpec:
    """Description of a Bernoulli-shift process.

    ``coeffs[i]`` is the filter weight ``a_j`` at lag ``j = lag_start + i``.
    For ``volterra``, ``volterra[i][k]`` is ``a_{j, j'}`` with
    ``j = lag_start + i``, ``j' = lag_start + k``. ``decay`` describes the
    untruncated coefficient sequence the window came from:
    ``("geometric", rate, scale)`` meaning ``|a_j| = scale * rate^|j|`` or
    ``("power", exponent, scale)`` meaning ``|a_j| = scale * |j|^-exponent``.
    """

    variant: str
    coeffs: tuple = (1.0,)
    lag_start: int = 0
    innovation: str = "normal"
    innovation_df: float | None = None
    phi: str | None = None
    hoelder_exponent: float | None = None
    hermite: tuple | None = None
    volterra: tuple | None = None
    cap: int = 30
    seed: int = 0
    decay: tuple | None = None
    tail_bound: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidCoefficients(f"unknown variant {self.variant!r}")
        a = np.asarray(self.coeffs, dtype=np.float64)
        if a.ndim != 1 or a.size == 0 or not np.all(np.isfinite(a)):
            raise InvalidCoefficients("coeffs must be a nonempty finite 1-d sequence")
        if self.innovation not in INNOVATIONS:
            raise InvalidCoefficients(f"unknown innovation law {self.innovation!r}")
        if self.variant == "hoelder_linear":
            if self.phi not in HOELDER_FUNCTIONS:
                raise InvalidCoefficients(f"unknown Hoelder function {self.phi!r}")
            if not (self.hoelder_exponent and 0 < self.hoelder_exponent <= 1):
                raise InvalidCoefficients("Hoelder exponent must lie in (0, 1]")
        if self.variant == "gaussian_hermite":
            if self.innovation != "normal":
                raise InvalidCoefficients("gaussian_hermite needs normal innovations")
            if not np.isclose(np.sum(a * a), 1.0, rtol=1e-12):
                raise InvalidCoefficients("gaussian_hermite coeffs must satisfy sum a_j^2 = 1")
            if (self.phi is None) == (self.hermite is None):
                raise InvalidCoefficients("give exactly one of phi or hermite coefficients")
            if self.phi is not None and self.phi not in GAUSSIAN_FUNCTIONS:
                raise InvalidCoefficients(f"unknown Gaussian functional {self.phi!r}")
        if self.variant == "volterra":
            v = np.asarray(self.volterra, dtype=np.float64)
            if v.ndim != 2 or v.shape[0] != v.shape[1]:
                raise InvalidCoefficients("volterra coefficients must be a square matrix")
            if np.any(np.diag(v) != 0.0):
                raise InvalidCoefficients("volterra coefficients need a_{j,j} = 0")

    # constructors ----------------------------------------------------------

    @classmethod
    def iid(cls, innovation="normal", seed=0, **kw):
        return cls("iid", innovation=innovation, seed=seed, **kw)

    @classmethod
    def linear(cls, coeffs, lag_start=0, innovation="normal", seed=0, **kw):
        return cls("linear", tuple(float(c) for c in coeffs), int(lag_start), innovation,
                   seed=seed, **kw)

    @classmethod
    def geometric(cls, rate, two_sided=False, innovation="normal", seed=0, tol=1e-8,
                  variant="linear", **kw):
        """``a_j = rate^|j|`` (causal by default), truncated where the tail drops below ``tol``."""
        r = abs(float(rate))
        if not r < 1:
            raise InvalidCoefficients("geometric rate must satisfy |rate| < 1")
        J = 0
        if r > 0:
            sides = 2.0 if two_sided else 1.0
            while sides * r ** (J + 1) / (1.0 - r) >= tol:
                J += 1
        lags = np.arange(-J if two_sided else 0, J + 1)
        a = np.power(float(rate), np.abs(lags))
        tail = (2.0 if two_sided else 1.0) * r ** (J + 1) / (1.0 - r) if r > 0 else 0.0
        return cls(variant, tuple(a.tolist()), int(lags[0]), innovation, seed=seed,
                   decay=("geometric", r, 1.0), tail_bound=tail, **kw)

    @classmethod
    def ar1(cls, phi, innovation="normal", seed=0, tol=1e-8):
        return cls.geometric(phi, False, innovation, seed, tol)

    @classmethod
    def power_law(cls, exponent, window=256, innovation="normal", seed=0):
        """Causal ``a_j = j^-exponent`` for ``j = 1..window``."""
        p = float(exponent)
        if p <= 1:
            raise InvalidCoefficients("power-law exponent must exceed 1 for summability")
        j = np.arange(1, window + 1, dtype=np.float64)
        return cls("linear", tuple((j**-p).tolist()), 1, innovation, seed=seed,
                   decay=("power", p, 1.0), tail_bound=window ** (1 - p) / (p - 1))

    @classmethod
    def hoelder_linear(cls, phi, exponent, coeffs, lag_start=0, innovation="normal", seed=0, **kw):
        return cls("hoelder_linear", tuple(float(c) for c in coeffs), int(lag_start), innovation,
                   phi=phi, hoelder_exponent=float(exponent), seed=seed, **kw)

    @classmethod
    def gaussian_hermite(cls, coeffs, lag_start=0, phi=None, hermite=None, seed=0, **kw):
        a = np.asarray(coeffs, dtype=np.float64)
        a = a / np.sqrt(np.sum(a * a))
        return cls("gaussian_hermite", tuple(a.tolist()), int(lag_start), "normal", phi=phi,
                   hermite=None if hermite is None else tuple(float(c) for c in hermite),
                   seed=seed, **kw)

    @classmethod
    def volterra_process(cls, matrix, lag_start=0, innovation="normal", seed=0):
        v = np.asarray(matrix, dtype=np.float64)
        return cls("volterra", tuple([1.0] * v.shape[0]), int(lag_start), innovation,
                   volterra=tuple(tuple(r) for r in v.tolist()), seed=seed)

    @classmethod
    def pathological(cls, cap=30, seed=0):
        return cls("pathological", innovation="uniform01", cap=int(cap), seed=seed)

    # geometry ----------------------------------------------------------------

    @property
    def lags(self) -> np.ndarray:
        return self.lag_start + np.arange(len(self.coeffs))

    @property
    def width(self) -> int:
        return len(self.coeffs)

    @property
    def lag_hi(self) -> int:
        return self.lag_start + self.width - 1

    def with_seed(self, seed: int) -> "ProcessSpec":
        return replace(self, seed=int(seed))

    def dependence_window(self) -> range:
        """Indices ``i`` of innovations that ``X_0`` depends on."""
        return range(-self.lag_hi, -self.lag_start + 1)

    def coefficient(self, j: int) -> float:
        k = j - self.lag_start
        return self.coeffs[k] if 0 <= k < self.width else 0.0

    @property
    def is_gaussian_polynomial(self) -> bool:
        """Whether ``X_t`` is a polynomial of a Gaussian linear process."""
        if self.variant in ("iid", "linear"):
            return self.innovation == "normal"
        return self.variant == "gaussian_hermite" and self.hermite is not None

    # serialisation -------------------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ProcessSpec":
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidCoefficients(f"unknown ProcessSpec fields: {sorted(unknown)}")
        for key in ("coeffs", "hermite", "decay"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        if d.get("volterra") is not None:
            d["volterra"] = tuple(tuple(r) for r in d["volterra"])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ProcessSpec":
        return cls.from_dict(json.loads(text))


# --- generation --------------------------------------------------------------

def _eps(spec: ProcessSpec, uni):
    return innovation_ppf(spec.innovation, uni, spec.innovation_df)


def _filter(coeffs, e, n):
    """``sum_i coeffs[i] * e[..., w-1-i : w-1-i+n]``: a causal filter in 'valid' mode."""
    w = len(coeffs)
    out = np.zeros(e.shape[:-1] + (n,))
    for i, c in enumerate(coeffs):
        if c != 0.0:
            out += c * e[..., w - 1 - i: w - 1 - i + n]
    return out


def _hermite_poly(y, coeffs):
    return hermite_e.hermeval(y, np.r_[0.0, coeffs])


def apply_shift(spec: ProcessSpec, e: np.ndarray) -> np.ndarray:
    """Evaluate the process on a window of innovations.

    ``e[..., k]`` holds ``eps_{u0 + k}`` where ``u0 = t0 - lag_hi`` and ``t0``
    is the first output time; the output has ``e.shape[-1] - width + 1``
    values along the last axis.
    """
    n = e.shape[-1] - spec.width + 1
    if spec.variant == "pathological":
        return _pathological(e, spec.cap)
    if spec.variant == "volterra":
        v = np.asarray(spec.volterra)
        w = spec.width
        out = np.zeros(e.shape[:-1] + (n,))
        for i, k in zip(*np.nonzero(v)):
            out += v[i, k] * e[..., w - 1 - i: w - 1 - i + n] * e[..., w - 1 - k: w - 1 - k + n]
        return out
    y = _filter(spec.coeffs, e, n)
    if spec.variant in ("iid", "linear"):
        return y
    if spec.variant == "hoelder_linear":
        return HOELDER_FUNCTIONS[spec.phi](y, spec.hoelder_exponent)
    if spec.phi is not None:
        return GAUSSIAN_FUNCTIONS[spec.phi](y)
    return _hermite_poly(y, spec.hermite)


def innovations(spec: ProcessSpec, first: int, count: int, seed: int, replication: int,
                stream: int = _MAIN) -> np.ndarray:
    uni = rng.indexed_uniforms(seed, (replication, stream), first, count)
    return _eps(spec, uni)


def generate(spec: ProcessSpec, n: int, seed: int | None = None, replication: int = 0,
             start: int = 1) -> np.ndarray:
    """``X_start, ..., X_{start+n-1}``; identical arguments give identical output."""
    if n < 1:
        raise ValueError("n must be >= 1")
    seed = spec.seed if seed is None else seed
    first = start - spec.lag_hi
    e = innovations(spec, first, n + spec.width - 1, seed, replication)
    return apply_shift(spec, e)


def generate_batch(spec: ProcessSpec, n: int, replications, seed: int | None = None,
                   start: int = 1) -> np.ndarray:
    """One row per replication id; row ``r`` equals ``generate(spec, n, seed, r)``."""
    return np.stack([generate(spec, n, seed, int(r), start) for r in replications])


def generate_coupled(spec: ProcessSpec, n: int, i: int, seed: int | None = None,
                     replication: int = 0, start: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """``(X, X*)`` where ``X*`` uses an independent copy of ``eps_i`` and the same other innovations."""
    seed = spec.seed if seed is None else seed
    first = start - spec.lag_hi
    e = innovations(spec, first, n + spec.width - 1, seed, replication)
    x = apply_shift(spec, e)
    k = i - first
    if not 0 <= k < e.shape[-1]:
        return x, x.copy()
    e_star = e.copy()
    e_star[k] = innovations(spec, i, 1, seed, replication, _PRIME)[0]
    return x, apply_shift(spec, e_star)


def coupled_origin(spec: ProcessSpec, i: int, replications: int, seed: int | None = None,
                   first_replication: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Many independent draws of ``(X_0, X_0^{*,i})``.

    Replication ``r`` reads its innovation window from a fixed slot of a
    dedicated stream, so estimates for different ``i`` share random numbers.
    """
    seed = spec.seed if seed is None else seed
    w = spec.width
    R = int(replications)
    pos = rng.INDEX_OFFSET + first_replication * w
    uni = rng.uniforms(rng.stream_key(seed, _DELTA), pos, R * w).reshape(R, w)
    e = _eps(spec, uni)
    x0 = apply_shift(spec, e)[:, 0]
    k = i + spec.lag_hi  # column of eps_i when u0 = -lag_hi
    if not 0 <= k < w:
        return x0, x0.copy()
    prime = rng.uniforms(rng.stream_key(seed, _DELTA_PRIME), rng.INDEX_OFFSET + first_replication, R)
    e[:, k] = _eps(spec, prime)
    return x0, apply_shift(spec, e)[:, 0]


# --- population moments ------------------------------------------------------

def _cumulants_from_moments(mu):
    """Cumulants ``kappa_1..kappa_K`` from raw moments ``mu_1..mu_K``."""
    K = len(mu)
    m = np.r_[1.0, mu]
    kap = np.zeros(K + 1)
    for n in range(1, K + 1):
        kap[n] = m[n] - sum(math.comb(n - 1, k - 1) * kap[k] * m[n - k] for k in range(1, n))
    return kap[1:]


def _moments_from_cumulants(kap):
    K = len(kap)
    k = np.r_[0.0, kap]
    m = np.zeros(K + 1)
    m[0] = 1.0
    for n in range(1, K + 1):
        m[n] = sum(math.comb(n - 1, j - 1) * k[j] * m[n - j] for j in range(1, n + 1))
    return m[1:]


def gaussian_expectation(f, cut=None) -> float:
    """``E f(Z)`` for standard normal ``Z``; split at ``cut`` when the integrand has a kink there."""
    dens = lambda z: f(z) * np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)  # noqa: E731
    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
    if cut is None:
        z, w = hermite_e.hermegauss(64)
        return float(f(z) @ w / np.sqrt(2.0 * np.pi))
    return integrate.quad(dens, -np.inf, cut, **opts)[0] + integrate.quad(dens, cut, np.inf, **opts)[0]


def population_moments(spec: ProcessSpec, kmax: int) -> tuple[np.ndarray, str]:
    """``(E X_1^k)_{k=1..kmax}`` and how it was obtained (``"analytic"`` or ``"prepass"``)."""
    if spec.variant == "pathological":
        _, loglog, p = pathological_atoms(spec.cap)
        logx2 = -np.exp(np.minimum(loglog, 700.0))
        out = np.zeros(kmax)
        for k in range(2, kmax + 1, 2):
            out[k - 1] = p @ np.exp(0.5 * k * logx2)
        return out, "analytic"
    a = np.asarray(spec.coeffs)
    if spec.variant in ("iid", "linear"):
        kap_e = _cumulants_from_moments(innovation_moments(spec.innovation, kmax, spec.innovation_df))
        kap = np.array([np.sum(a ** (r + 1)) * kap_e[r] for r in range(kmax)])
        return _moments_from_cumulants(kap), "analytic"
    if spec.variant == "gaussian_hermite":
        f = (GAUSSIAN_FUNCTIONS[spec.phi] if spec.phi is not None
             else (lambda y: _hermite_poly(y, spec.hermite)))
        cut = 0.0 if spec.phi in ("abs_centered", "sign") else None
        return np.array([gaussian_expectation(lambda z, k=k: f(z) ** k, cut)
                         for k in range(1, kmax + 1)]), "analytic"
    if spec.variant == "hoelder_linear" and spec.innovation == "normal":
        s = np.sqrt(np.sum(a * a))
        f = HOELDER_FUNCTIONS[spec.phi]
        return np.array([gaussian_expectation(
            lambda z, k=k: f(s * z, spec.hoelder_exponent) ** k, 0.0)
            for k in range(1, kmax + 1)]), "analytic"
    e = innovations(spec, 0, PREPASS_SIZE + spec.width - 1, spec.seed, 0, _PREPASS)
    x = apply_shift(spec, e)
    return np.array([np.mean(x**k) for k in range(1, kmax + 1)]), "prepass"


# --- Hermite expansion ---------------------------------------------------------

@dataclass(frozen=True)
class HermiteExpansion:
    """``phi(Y) = sum_q c_q He_q(Y)`` for standard normal ``Y``; ``coeffs[q-1] = c_q``."""

    mean: float
    coeffs: np.ndarray
    energy_partial: np.ndarray = field(repr=False)
    summability_partial: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.coeffs)


def hermite_values(x, Q: int) -> np.ndarray:
    """``He_0..He_Q`` at ``x`` by ``He_{q+1} = x He_q - q He_{q-1}``; shape ``(Q+1,) + x.shape``."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((Q + 1,) + x.shape)
    out[0] = 1.0
    if Q >= 1:
        out[1] = x
    for q in range(1, Q):
        out[q + 1] = x * out[q] - q * out[q - 1]
    return out


def hermite_expand(phi: Callable, Q: int, nodes: int = 128) -> HermiteExpansion:
    """Hermite coefficients ``c_q = E[phi(Y) He_q(Y)] / q!`` by Gauss-Hermite quadrature.

    Raises
    ------
    NonSquareIntegrable
        If ``E phi(Y)^2`` cannot be shown finite by adaptive quadrature.
    """
    import warnings

    with warnings.catch_warnings(), np.errstate(over="ignore", invalid="ignore"):
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            energy = gaussian_expectation(lambda z: np.asarray(phi(z), dtype=float) ** 2, 0.0)
        except (integrate.IntegrationWarning, OverflowError, FloatingPointError) as exc:
            raise NonSquareIntegrable(f"E phi(Y)^2 did not converge: {exc}") from None
    if not np.isfinite(energy):
        raise NonSquareIntegrable("E phi(Y)^2 is not finite")
    z, w = hermite_e.hermegauss(max(nodes, 2 * Q + 2))
    w = w / np.sqrt(2.0 * np.pi)
    fz = np.asarray(phi(z), dtype=np.float64)
    H = hermite_values(z, Q)
    q = np.arange(Q + 1)
    fact = special.factorial(q)
    c = (H @ (w * fz)) / fact
    c[np.abs(c) < 1e-13 * max(1.0, np.sqrt(energy))] = 0.0
    energy_partial = np.cumsum(fact[1:] * c[1:] ** 2)
    summ = np.cumsum(np.sqrt(q[1:] * fact[1:]) * np.abs(c[1:]))
    return HermiteExpansion(float(c[0]), c[1:], energy_partial, summ)


def builtin_specs(seed: int = 0) -> dict[str, ProcessSpec]:
    """Reference processes covering every variant with short-range dependence."""
    geo = ProcessSpec.geometric(0.5).coeffs
    return {
        "iid": ProcessSpec.iid(seed=seed),
        "linear_0.3": ProcessSpec.ar1(0.3, seed=seed),
        "linear_0.5": ProcessSpec.ar1(0.5, seed=seed),
        "linear_0.9": ProcessSpec.ar1(0.9, seed=seed),
        "hoelder": ProcessSpec.hoelder_linear("abs_pow", 0.5, geo, seed=seed,
                                              decay=("geometric", 0.5, 1.0)),
        "hermite": ProcessSpec.gaussian_hermite(geo, hermite=(0.0, 1.0), seed=seed,
                                                decay=("geometric", 0.5, 1.0)),
        "volterra": ProcessSpec.volterra_process(
            [[0.0, 0.6, 0.3], [0.0, 0.0, 0.5], [0.0, 0.0, 0.0]], seed=seed),
    }
