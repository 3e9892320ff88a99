"""Physical dependence coefficients and summability diagnostics."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .processes import ProcessSpec, coupled_origin, generate_batch, population_moments


@dataclass
class DependenceProfile:
    """``delta_{i,p}((X_t^k))`` over a window of innovation indices ``i``."""

    k: int
    p: float
    indices: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    mode: str
    replications: int = 0

    def total(self) -> float:
        return float(np.sum(self.values))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["i", "delta", "stderr"])
            for i, d, s in zip(self.indices, self.values, self.stderr):
                w.writerow([int(i), f"{d:.17g}", f"{s:.17g}"])


def _normal_abs_moment(p: float) -> float:
    """``E|Z|^p`` for standard normal ``Z``."""
    return 2.0 ** (p / 2) * special.gamma((p + 1) / 2) / np.sqrt(np.pi)


def delta_analytic(spec: ProcessSpec, k: int, i: int, p: float = 2.0) -> float | None:
    """Closed form of ``delta_{i,p}`` where one exists, else ``None``.

    For linear processes and ``k = 1``, ``X_0 - X_0^{*,i} = a_{-i} (eps_i - eps'_i)``,
    so the coefficient is ``|a_{-i}| * ||eps - eps'||_p``: ``sqrt(2)`` times
    ``|a_{-i}|`` for ``p = 2`` (unit-variance innovations), and
    ``sqrt(2) (E|Z|^p)^{1/p} |a_{-i}|`` for Gaussian innovations.
    """
    if spec.variant not in ("iid", "linear") or k != 1:
        return None
    a = abs(spec.coefficient(-i))
    if p == 2:
        return float(np.sqrt(2.0) * a)
    if spec.innovation == "normal":
        return float(np.sqrt(2.0) * _normal_abs_moment(p) ** (1.0 / p) * a)
    return None


def delta(spec: ProcessSpec, k: int, i: int, p: float = 2.0, replications: int = 10_000,
          seed: int | None = None) -> tuple[float, float]:
    """Coupling Monte Carlo estimate of ``||X_0^k - (X_0^{*,i})^k||_p`` and its standard error."""
    if replications < 100:
        raise ValueError("use at least 100 replications")
    x0, xs = coupled_origin(spec, i, replications, seed)
    d = np.abs(x0**k - xs**k) ** p
    mp = d.mean()
    if mp == 0.0:
        return 0.0, 0.0
    est = mp ** (1.0 / p)
    se_mp = d.std(ddof=1) / np.sqrt(replications)
    return float(est), float(se_mp / (p * mp ** ((p - 1.0) / p)))


def profile(spec: ProcessSpec, k: int = 1, p: float = 2.0, replications: int = 10_000,
            seed: int | None = None, mode: str = "coupling-MC", window=None) -> DependenceProfile:
    """``delta_i`` for every ``i`` in ``window`` (default: the indices ``X_0`` depends on)."""
    idx = np.asarray(list(window if window is not None else spec.dependence_window()), dtype=int)
    vals = np.zeros(idx.size)
    errs = np.zeros(idx.size)
    for n, i in enumerate(idx):
        if mode == "analytic":
            v = delta_analytic(spec, k, int(i), p)
            if v is None:
                raise ValueError(f"no closed form for {spec.variant} with k={k}, p={p}")
            vals[n] = v
        elif mode == "coupling-MC":
            vals[n], errs[n] = delta(spec, k, int(i), p, replications, seed)
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return DependenceProfile(k, p, idx, vals, errs, mode, 0 if mode == "analytic" else replications)


# --- summability ---------------------------------------------------------------

WEIGHTS = {
    "i2": lambda i, kappa: np.abs(i) ** 2.0,
    "kappa": lambda i, kappa: np.abs(i) ** (0.5 + 0.5 / kappa),
    "i5/2": lambda i, kappa: np.abs(i) ** 2.5,
}


def _weight_exponent(weight, kappa):
    return {"i2": 2.0, "kappa": 0.5 + 0.5 / kappa, "i5/2": 2.5}[weight]


@dataclass
class SummabilityReport:
    weight: str
    partial_sum: float
    tail_bound: float | None
    verdict: str
    notes: list = field(default_factory=list)


def check_summability(profiles, weight: str = "i2", spec: ProcessSpec | None = None,
                      kappa: float = 0.5) -> SummabilityReport:
    """Weighted partial sum ``sum_i sum_k w(i) delta_i((X_t^k))`` over the profiled window.

    The verdict is ``tail-bound-certified`` when ``spec`` bounds the part of
    the series outside the window, ``satisfied-up-to-window`` when only the
    partial sums are available and they have settled, and ``inconclusive``
    otherwise (including power-law coefficients whose weighted tail
    compares to the harmonic series or worse).
    """
    if weight not in WEIGHTS:
        raise ValueError(f"weight must be one of {sorted(WEIGHTS)}")
    if isinstance(profiles, DependenceProfile):
        profiles = [profiles]
    wfun = WEIGHTS[weight]
    terms = sum(wfun(pr.indices, kappa) * pr.values for pr in profiles)
    idx = profiles[0].indices
    total = float(np.sum(terms))
    notes = []
    imax = int(np.max(np.abs(idx))) if idx.size else 0

    if spec is not None:
        if spec.decay is None:
            covered = set(spec.dependence_window()) <= set(int(i) for i in idx)
            if covered:
                return SummabilityReport(weight, total, 0.0, "tail-bound-certified",
                                         ["finite dependence window"])
            notes.append("profile does not cover the dependence window")
        else:
            kind, rate, _ = spec.decay
            if spec.variant == "hoelder_linear" and kind == "geometric":
                rate = rate ** spec.hoelder_exponent
            # envelope constant fitted on the profiled window
            nz = np.abs(idx) > 0
            if kind == "geometric":
                env = np.max(sum(pr.values for pr in profiles)[nz] / rate ** np.abs(idx[nz]))
                j = np.arange(imax + 1, imax + 20_000, dtype=np.float64)
                tail = float(np.sum(j ** _weight_exponent(weight, kappa) * env * rate**j))
                sides = 2 if np.min(idx) < 0 and np.max(idx) > 0 else 1
                return SummabilityReport(weight, total, sides * tail, "tail-bound-certified",
                                         [f"geometric envelope rate {rate:.4g}"])
            if kind == "power":
                expo = rate
                net = expo - _weight_exponent(weight, kappa)
                if net <= 1.0:
                    notes.append(
                        f"weighted terms decay like |i|^-{net:g}: no faster than the harmonic "
                        "series, so the weighted sum diverges")
                    return SummabilityReport(weight, total, None, "inconclusive", notes)
                env = np.max(sum(pr.values for pr in profiles)[nz] * np.abs(idx[nz]) ** expo)
                tail = float(env * imax ** (1.0 - net) / (net - 1.0))
                return SummabilityReport(weight, total, tail, "tail-bound-certified",
                                         [f"power envelope exponent {expo:g}"])

    n = len(terms)
    outer = np.abs(idx) >= 0.75 * imax if imax else np.ones(n, bool)
    if total == 0.0 or np.sum(terms[outer]) <= 0.01 * total:
        return SummabilityReport(weight, total, None, "satisfied-up-to-window", notes)
    notes.append("outer quarter of the window still carries more than 1% of the sum")
    return SummabilityReport(weight, total, None, "inconclusive", notes)


# --- partial-sum bound -----------------------------------------------------------

@dataclass
class PartialSumCheck:
    """``||sum_{t<=N} (X_t^k - E X^k)||_2`` against ``sqrt(N) sum_i delta_i((X_t^k))``."""

    k: int
    N: int
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 3.0 * np.hypot(self.lhs_se, self.rhs_se)


def partial_sum_bound_check(spec: ProcessSpec, k: int, N: int, replications: int = 200,
                            delta_replications: int = 20_000, seed: int | None = None,
                            profile_: DependenceProfile | None = None) -> PartialSumCheck:
    """Monte Carlo check of the partial-sum moment bound for ``X_t^k``."""
    mu = population_moments(spec, k)[0][k - 1]
    x = generate_batch(spec, N, range(replications), seed)
    s = np.sum(x**k - mu, axis=1)
    s2 = s * s
    lhs = float(np.sqrt(s2.mean()))
    lhs_se = float(s2.std(ddof=1) / np.sqrt(replications) / (2.0 * lhs)) if lhs > 0 else 0.0
    if profile_ is None:
        profile_ = profile(spec, k, 2.0, delta_replications, seed)
    root = np.sqrt(N)
    return PartialSumCheck(k, N, lhs, lhs_se, float(root * profile_.total()),
                           float(root * np.sum(profile_.stderr)))
