"""Moment functions g with analytic gradients, and the smooth truncation eta."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateMoments, DomainViolation


def smoothstep5(s):
    """Quintic smoothstep ``6s^5 - 15s^4 + 10s^3`` on [0, 1], clamped outside."""
    s = np.clip(s, 0.0, 1.0)
    return s * s * s * (s * (6.0 * s - 15.0) + 10.0)


@dataclass(frozen=True)
class EtaSpec:
    """Bump around ``v0``: 1 within radius ``a``, 0 beyond ``2a``.

    Distances are measured after dividing coordinate ``k`` by ``scale[k]``
    (all ones by default, i.e. a round ball).
    """

    v0: np.ndarray
    a: float
    scale: np.ndarray | None = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("truncation radius a must be positive")
        if self.scale is not None and not np.all(np.asarray(self.scale) > 0):
            raise ValueError("eta scales must be positive")

    @property
    def scales(self) -> np.ndarray:
        return np.ones(np.size(self.v0)) if self.scale is None else np.asarray(self.scale, float)


def eta(x, spec: EtaSpec):
    x = np.asarray(x, dtype=np.float64)
    r = np.linalg.norm((x - spec.v0) / spec.scales, axis=-1)
    return smoothstep5((2.0 * spec.a - r) / spec.a)


def eta_gradient(x, spec: EtaSpec):
    x = np.asarray(x, dtype=np.float64)
    sc = spec.scales
    d = (x - spec.v0) / sc
    r = np.linalg.norm(d, axis=-1)
    s = np.clip((2.0 * spec.a - r) / spec.a, 0.0, 1.0)
    ds = 30.0 * s * s * (1.0 - s) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(r[..., None] > 0, d / r[..., None], 0.0)
    return (-ds / spec.a)[..., None] * unit / sc


@dataclass(frozen=True)
class GSpec:
    """A moment function ``g: R^m -> R`` centred so that ``g(v0) = 0``.

    ``raw`` and ``raw_gradient`` act on arrays whose last axis has length m.
    ``offset`` is the raw value subtracted at ``v0``.
    """

    name: str
    m: int
    raw: Callable
    raw_gradient: Callable
    v0: np.ndarray
    a: float
    domain: Callable = field(default=lambda x: np.ones(np.shape(x)[:-1], dtype=bool))
    offset: float = 0.0
    centered: bool = True
    estimated_v0: bool = False
    eta_scale: tuple | None = None

    def __call__(self, x):
        return self.raw(np.asarray(x, dtype=np.float64)) - self.offset

    def gradient(self, x):
        return self.raw_gradient(np.asarray(x, dtype=np.float64))

    def in_domain(self, x):
        return self.domain(np.asarray(x, dtype=np.float64))

    @property
    def eta_spec(self) -> EtaSpec:
        return EtaSpec(self.v0, self.a, None if self.eta_scale is None else np.asarray(self.eta_scale))

    def eta(self, x):
        return eta(x, self.eta_spec)

    def truncated(self, x):
        """``(g * eta)(x)``; ``g`` is evaluated only where ``eta > 0``."""
        x = np.asarray(x, dtype=np.float64)
        w = self.eta(x)
        out = np.zeros(w.shape)
        live = w > 0
        if np.any(live):
            out[live] = self(x[live]) * w[live]
        return out

    def truncated_gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        w = self.eta(x)
        out = np.zeros(x.shape)
        live = w > 0
        if np.any(live):
            xl = x[live]
            out[live] = (self.gradient(xl) * w[live][..., None]
                         + self(xl)[..., None] * eta_gradient(xl, self.eta_spec))
        return out

    def composite_weights(self) -> np.ndarray:
        """``grad g(v0)``, the weights of the linearised moment process."""
        return np.asarray(self.gradient(self.v0), dtype=np.float64)


def _variance(x):
    return x[..., 1] - x[..., 0] ** 2


def _positive_variance(x):
    return _variance(x) > 0


def _log_variance(x):
    return np.log(_variance(x))


def _log_variance_grad(x):
    d = _variance(x)
    return np.stack([-2.0 * x[..., 0] / d, 1.0 / d], axis=-1)


def _skewness(x):
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    return (x3 - 3.0 * x1 * x2 + 2.0 * x1**3) / _variance(x) ** 1.5


def _skewness_grad(x):
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    d = _variance(x)
    num = x3 - 3.0 * x1 * x2 + 2.0 * x1**3
    dn = [-3.0 * x2 + 6.0 * x1**2, -3.0 * x1, np.ones_like(x1)]
    dd = [-2.0 * x1, np.ones_like(x1), np.zeros_like(x1)]
    return np.stack(
        [dn[i] / d**1.5 - 1.5 * num * dd[i] / d**2.5 for i in range(3)], axis=-1
    )


def _kurtosis(x):
    x1, x2, x3, x4 = (x[..., i] for i in range(4))
    num = x4 - 4.0 * x1 * x3 + 6.0 * x1**2 * x2 - 3.0 * x1**4
    return num / _variance(x) ** 2 - 3.0


def _kurtosis_grad(x):
    x1, x2, x3, x4 = (x[..., i] for i in range(4))
    d = _variance(x)
    num = x4 - 4.0 * x1 * x3 + 6.0 * x1**2 * x2 - 3.0 * x1**4
    dn = [
        -4.0 * x3 + 12.0 * x1 * x2 - 12.0 * x1**3,
        6.0 * x1**2,
        -4.0 * x1,
        np.ones_like(x1),
    ]
    dd = [-2.0 * x1, np.ones_like(x1), np.zeros_like(x1), np.zeros_like(x1)]
    return np.stack([dn[i] / d**2 - 2.0 * num * dd[i] / d**3 for i in range(4)], axis=-1)


def _log_second_moment(x):
    return np.log(x[..., 1])


def _log_second_moment_grad(x):
    return np.stack([np.zeros_like(x[..., 0]), 1.0 / x[..., 1]], axis=-1)


def variance_safe_radius(v0) -> float:
    """Default truncation radius for presets whose pole is ``x2 = x1^2``.

    Takes the smaller of ``D0 / (2 sqrt(m))`` and half the radius ``r`` with
    ``r^2 + (1 + 2|v1|) r = D0 / 2``; the latter keeps the empirical variance
    above ``D0 / 2`` on the whole ball of radius ``2a``.
    """
    v0 = np.asarray(v0, dtype=np.float64)
    d0 = v0[1] - v0[0] ** 2
    c = 1.0 + 2.0 * abs(v0[0])
    r = (-c + np.sqrt(c * c + 2.0 * d0)) / 2.0
    return float(min(d0 / (2.0 * np.sqrt(v0.size)), r / 2.0))


_PRESETS = {
    "log_variance": (2, _log_variance, _log_variance_grad, _positive_variance),
    "skewness": (3, _skewness, _skewness_grad, _positive_variance),
    "excess_kurtosis": (4, _kurtosis, _kurtosis_grad, _positive_variance),
}


def preset_g(name: str, v0, a: float | None = None, estimated_v0: bool = False) -> GSpec:
    """One of the built-in moment functions, centred at ``v0``.

    ``log_variance`` (m=2), ``skewness`` (m=3) and ``excess_kurtosis`` (m=4)
    are all functions of the raw block moments; the constructor subtracts
    the raw value at ``v0`` so that ``g(v0) == 0``.
    """
    try:
        m, f, df, dom = _PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown g preset {name!r}; choose from {sorted(_PRESETS)}") from None
    v0 = np.asarray(v0, dtype=np.float64)
    if v0.shape != (m,):
        raise ValueError(f"{name} needs a moment vector of length {m}, got shape {v0.shape}")
    if not v0[1] - v0[0] ** 2 > 0:
        raise DegenerateMoments(f"v0 has nonpositive variance: {v0[1] - v0[0] ** 2!r}")
    if a is None:
        a = variance_safe_radius(v0)
    return GSpec(name, m, f, df, v0, float(a), dom, float(f(v0)), True, estimated_v0)


def log_second_moment_g(v0, a: float | None = None, eta_scale=None) -> GSpec:
    """``log(x2)`` centred at ``v0``; the moment function of the integrability counterexample.

    ``a`` defaults to ``v0[1] / 4`` so that the support of eta stays inside
    ``x2 > 0`` along the second axis. ``eta_scale`` stretches the bump along
    the first axis, which ``g`` ignores.
    """
    v0 = np.asarray(v0, dtype=np.float64)
    if not v0[1] > 0:
        raise DegenerateMoments("v0 has nonpositive second moment")
    if a is None:
        a = v0[1] / 4.0
    dom = lambda x: x[..., 1] > 0  # noqa: E731
    if eta_scale is not None and not np.asarray(eta_scale)[1] == 1.0:
        raise ValueError("eta_scale must leave the x2 axis unscaled")
    return GSpec("log_second_moment", 2, _log_second_moment, _log_second_moment_grad,
                 v0, float(a), dom, float(np.log(v0[1])),
                 eta_scale=None if eta_scale is None else tuple(float(c) for c in eta_scale))


def linear_g(weights, v0, a: float = 1.0) -> GSpec:
    """``g(x) = w . (x - v0)``; defined everywhere."""
    w = np.asarray(weights, dtype=np.float64)
    v0 = np.asarray(v0, dtype=np.float64)
    if w.shape != v0.shape:
        raise ValueError("weights and v0 must have the same length")
    return GSpec(
        "linear", w.size,
        lambda x: x @ w,
        lambda x: np.broadcast_to(w, np.shape(x)).copy(),
        v0, float(a), offset=float(w @ v0),
    )


_REGISTRY: dict[str, tuple[int, Callable[..., GSpec]]] = {
    name: (spec[0], lambda v0, a=None, estimated_v0=False, _n=name: preset_g(_n, v0, a, estimated_v0))
    for name, spec in _PRESETS.items()
}


def register_g(name: str, m: int, factory: Callable[..., GSpec]) -> None:
    """Make a user-defined g of moment order ``m`` available by name.

    ``factory(v0, a=None, estimated_v0=False)`` must return a ``GSpec``.
    Registered names are accepted by ``make_g`` and by the CLI ``--g`` flag.
    """
    _REGISTRY[name] = (int(m), factory)


def make_g(name: str, v0, a: float | None = None, estimated_v0: bool = False) -> GSpec:
    try:
        _, factory = _REGISTRY[name]
    except KeyError:
        raise KeyError(f"no g registered under {name!r}; known: {sorted(_REGISTRY)}") from None
    return factory(v0, a=a, estimated_v0=estimated_v0)


def g_order(name: str) -> int:
    """Moment order of a registered g."""
    try:
        return _REGISTRY[name][0]
    except KeyError:
        raise KeyError(f"no g registered under {name!r}; known: {sorted(_REGISTRY)}") from None


def gradient_check(g: GSpec, point, step: float = 1e-6) -> float:
    """Largest componentwise gap between ``g.gradient`` and central differences.

    Each gap is scaled by ``max(|analytic|, 1)``.
    """
    x = np.asarray(point, dtype=np.float64)
    if step <= 0:
        raise ValueError("step must be positive")
    probe = x + step * np.vstack([np.eye(x.size), -np.eye(x.size)])
    if not np.all(g.in_domain(probe)) or not g.in_domain(x):
        raise DomainViolation(f"finite-difference stencil leaves the domain of {g.name} at {x.tolist()}")
    analytic = g.gradient(x)
    fd = np.empty(x.size)
    for k in range(x.size):
        e = np.zeros(x.size)
        e[k] = step
        fd[k] = (g(x + e) - g(x - e)) / (2.0 * step)
    return float(np.max(np.abs(fd - analytic) / np.maximum(np.abs(analytic), 1.0)))


def lipschitz_probe(g: GSpec, n_pairs: int = 100_000, seed: int = 0) -> float:
    """Largest sampled difference quotient of ``g * eta`` over pairs within radius ``3a``."""
    rng = np.random.default_rng(seed)

    def ball(n):
        d = rng.standard_normal((n, g.m))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = 3.0 * g.a * rng.random(n) ** (1.0 / g.m)
        return g.v0 + d * r[:, None]

    x, y = ball(n_pairs), ball(n_pairs)
    num = np.abs(g.truncated(x) - g.truncated(y))
    den = np.linalg.norm(x - y, axis=1)
    return float(np.max(num / den))
