"""Monte Carlo validation of the block U-statistic limit theorems."""
from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special, stats

from . import rng
from .asymptotics import centering as make_centering, gamma_squared, sigma_squared
from .blocks import BlockScheme, local_moments, local_statistics
from .errors import DomainViolation
from .gfuncs import GSpec, g_order, log_second_moment_g, make_g
from .pipeline import RATIO_WARNING, constancy_test
from .processes import ProcessSpec, generate, pathological_atoms, population_moments
from .ustat import KernelSpec, gamma_n_squared, get_kernel, hoeffding, u_statistic

LEVELS = (0.01, 0.05, 0.10)
# spawn id of the array draws in validate_theorem1, apart from the process streams
_ARRAY_STREAM = 7


def _kernel(h):
    return get_kernel(h) if isinstance(h, str) else h


def _map_chunks(fn, ids, workers=None, chunk=64):
    """Apply ``fn`` to consecutive chunks of ``ids``; results come back in id order."""
    ids = np.asarray(ids)
    chunks = [ids[i:i + chunk] for i in range(0, ids.size, chunk)]
    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, chunks))
    else:
        parts = [fn(c) for c in chunks]
    return np.concatenate(parts) if parts else np.empty(0)


def anderson_darling(z, cdf=stats.norm.cdf) -> float:
    """Anderson-Darling statistic of ``z`` against a fully specified continuous law."""
    z = np.sort(np.asarray(z, dtype=np.float64))
    n = z.size
    u = np.clip(cdf(z), 1e-300, 1.0 - 1e-16)
    i = np.arange(1, n + 1)
    return float(-n - np.sum((2 * i - 1) * (np.log(u) + np.log1p(-u[::-1]))) / n)


@dataclass
class McReport:
    """Replicated standardized statistics and their distance to the limit law.

    ``scale`` is the standard deviation of the reference normal: 2 for the
    ``gamma_n`` standardization, 1 after dividing by ``2 gamma``.
    """

    kind: str
    statistics: np.ndarray = field(repr=False)
    scale: float
    ks_distance: float
    ks_pvalue: float
    ad_statistic: float
    rejection_rates: dict
    mean: float
    variance: float
    seed: int
    config: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def replications(self) -> int:
        return int(self.statistics.size)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["statistics"] = self.statistics.tolist()
        d["replications"] = self.replications
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_plain, **kw)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["replication", "statistic"])
            for r, s in enumerate(self.statistics):
                w.writerow([r, f"{s:.17g}"])


def _plain(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def summarize(kind, statistics, scale, seed, config=None, diagnostics=None) -> McReport:
    """Aggregate replicated statistics; every aggregate is invariant to their order."""
    s = np.asarray(statistics, dtype=np.float64)
    ok = s[np.isfinite(s)]
    if ok.size < 2:
        raise ValueError("fewer than two finite statistics")
    z = np.sort(ok) / scale
    ks = stats.kstest(z, "norm")
    mean = math.fsum(z * scale) / ok.size
    var = math.fsum((z * scale - mean) ** 2) / (ok.size - 1)
    crit = {a: special.ndtri(1.0 - a / 2.0) for a in LEVELS}
    rates = {str(a): float(np.mean(np.abs(z) > c)) for a, c in crit.items()}
    diag = dict(diagnostics or {})
    if ok.size < 200:
        diag["few_replications"] = True
    diag["non_finite"] = int(s.size - ok.size)
    return McReport(kind, s, float(scale), float(ks.statistic), float(ks.pvalue),
                    anderson_darling(z), rates, float(mean), float(var), int(seed),
                    dict(config or {}), diag)


# --- row-wise i.i.d. arrays ----------------------------------------------------

def array_draws(distribution, block_count: int, replication: int, seed: int) -> np.ndarray:
    key = rng.stream_key(seed, int(replication), _ARRAY_STREAM)
    return distribution.ppf(rng.uniforms(key, 0, block_count))


def validate_theorem1(distribution, h, block_count: int, replications: int = 2000,
                      seed: int = 0, workers: int | None = None) -> McReport:
    """Replicate ``sqrt(b) (U - theta) / gamma_n`` for i.i.d. rows drawn from ``distribution``.

    The reference law is ``N(0, 4)``. ``DegenerateKernel`` is raised before
    any simulation when ``gamma_n^2`` vanishes.
    """
    h = _kernel(h)
    parts = hoeffding(h, distribution)
    g2 = gamma_n_squared(h, distribution, parts)
    root_b = np.sqrt(block_count)

    def run(ids):
        w = np.stack([array_draws(distribution, block_count, r, seed) for r in ids])
        return root_b * (np.atleast_1d(u_statistic(w, h)) - parts.theta) / np.sqrt(g2)

    s = _map_chunks(run, np.arange(replications), workers)
    config = {"distribution": repr(distribution), "kernel": h.name, "block_count": block_count,
              "replications": replications}
    return summarize("theorem1", s, 2.0, seed, config,
                     {"theta": parts.theta, "gamma_n_sq": g2, "mode": parts.estimation_mode})


# --- weakly dependent processes --------------------------------------------------

def _spec_summability(spec: ProcessSpec) -> str:
    if spec.decay is not None and spec.decay[0] == "power" and spec.decay[1] - 2.0 <= 1.0:
        return "inconclusive"
    return "tail-bound-certified"


def validate_theorem2(spec: ProcessSpec, g, h, block_length: int, block_count: int,
                      replications: int = 1000, centering: str = "gaussian",
                      sigma_sq: float | None = None, seed: int | None = None,
                      centering_replications: int | None = None, truncated: bool = False,
                      workers: int | None = None) -> McReport:
    """Replicate ``sqrt(b) (U - c) / (2 gamma)`` on simulated series; reference ``N(0, 1)``.

    ``g`` is a registered name (centred at the population moments of
    ``spec``) or a ``GSpec``. Replications whose block moments leave the
    domain of ``g`` are recorded as NaN and counted in the diagnostics.
    """
    h = _kernel(h)
    seed = spec.seed if seed is None else seed
    if isinstance(g, str):
        g = make_g(g, population_moments(spec, g_order(g))[0])
    diag = {"ratio_b_over_l": block_count / block_length,
            "summability": _spec_summability(spec)}
    if block_count / block_length > RATIO_WARNING:
        warnings.warn(f"b/l = {block_count / block_length:.3g} exceeds {RATIO_WARNING}")
        diag["ratio_warning"] = True
    if diag["summability"] == "inconclusive":
        warnings.warn("weighted dependence sum is not certified for this process")
    if sigma_sq is None:
        res = sigma_squared(spec, g, seed=seed)
        sigma_sq = res.estimate
        diag.update(sigma_sq_mode=res.mode, sigma_sq_se=res.stderr)
    gam2 = gamma_squared(h, np.sqrt(sigma_sq))
    c = make_centering(centering, h, sigma=np.sqrt(sigma_sq), spec=spec, g=g,
                       block_length=block_length, block_count=block_count,
                       replications=centering_replications, seed=seed)
    scheme = BlockScheme(block_length, block_count, block_length * block_count)
    root_b = np.sqrt(block_count)
    denom = 2.0 * np.sqrt(gam2)

    def run(ids):
        out = np.empty(len(ids))
        for n, r in enumerate(ids):
            x = generate(spec, scheme.n, seed, int(r))
            try:
                w = local_statistics(local_moments(x, scheme, g.m), g, truncated=truncated)
            except DomainViolation:
                out[n] = np.nan
                continue
            out[n] = root_b * (u_statistic(w, h) - c.value) / denom
        return out

    s = _map_chunks(run, np.arange(replications), workers)
    diag.update(domain_violations=int(np.sum(np.isnan(s))), gamma_sq=gam2,
                centering=c.value, centering_se=c.stderr, sigma_sq=sigma_sq)
    if spec.variant == "pathological":
        bound = untruncated_lower_bound(block_length, spec.cap)
        diag["nonconvergent_centering"] = bound["diverging"]
        diag["log10_lower_bound"] = bound["log10_partial"][-1]
    config = {"spec": spec.to_dict(), "g": g.name, "kernel": h.name,
              "block_length": block_length, "block_count": block_count,
              "replications": replications, "centering": centering, "truncated": truncated}
    return summarize("theorem2", s, 1.0, seed, config, diag)


# --- size of the constancy test ----------------------------------------------------

def null_pvalues(spec: ProcessSpec, n: int, block_length: int, replications: int = 1000,
                 seed: int | None = None, workers: int | None = None, **test_kwargs) -> np.ndarray:
    """p-values of ``constancy_test`` on independent series simulated from ``spec``."""
    seed = spec.seed if seed is None else seed

    def run(ids):
        return np.array([constancy_test(generate(spec, n, seed, int(r)), block_length,
                                        **test_kwargs).p_value for r in ids])

    return _map_chunks(run, np.arange(replications), workers)


def empirical_size(pvalues, alpha):
    """Fraction of p-values below ``alpha``; a level of 1 or more always rejects.

    ``alpha`` may be a scalar or a sequence (then a dict keyed by level).
    """
    p = np.asarray(pvalues, dtype=np.float64)

    def rate(a):
        if not 0.0 <= a:
            raise ValueError("alpha must be nonnegative")
        return 1.0 if a >= 1.0 else float(np.mean(p < a))

    if np.ndim(alpha) == 0:
        return rate(float(alpha))
    return {float(a): rate(float(a)) for a in alpha}


# --- integrability counterexample --------------------------------------------------

def untruncated_lower_bound(block_length: int, cap: int = 30, v2: float | None = None) -> dict:
    """Partial sums of ``sum_k P(all l squares equal atom k) * sqrt(l) |log atom_k - log v2|``.

    Each term bounds from below the contribution to ``E|W_{n,1}|`` of the
    event that the whole block sits on one atom. Values are kept as
    base-10 logarithms. ``diverging`` is true when the terms increase from
    some ``k`` on, which is what makes the series infinite once the cap is
    lifted.
    """
    k, loglog, p = pathological_atoms(cap)
    p = 2.0 ** -k.astype(float)  # the uncapped law
    if v2 is None:
        v2 = float(population_moments(ProcessSpec.pathological(cap), 2)[0][1])
    lv2 = math.log(v2)
    # |log x2 - log v2| with log x2 = -exp(exp(k)); exp(exp(k)) overflows from k = 7
    mag = np.array([abs(-math.exp(e) - lv2) if e < 700 else None for e in loglog], dtype=object)
    logmag = np.array([math.log(m) if m is not None else e for m, e in zip(mag, loglog)], dtype=float)
    log_terms = block_length * np.log(p) + 0.5 * math.log(block_length) + logmag
    partial = np.logaddexp.accumulate(log_terms) / math.log(10.0)
    inc = np.diff(log_terms)
    turn = int(np.argmax(inc > 0)) + 1 if np.any(inc > 0) else None
    diverging = turn is not None and bool(np.all(inc[turn - 1:] > 0))
    return {"block_length": block_length, "k": k.tolist(),
            "log10_terms": (log_terms / math.log(10.0)).tolist(),
            "log10_partial": partial.tolist(), "turning_k": turn, "diverging": diverging}


def counterexample_demo(block_lengths=(100, 1000, 10_000), replications: int = 2000,
                        seed: int = 0, cap: int = 30) -> dict:
    """Untruncated versus eta-truncated ``|W_{n,1}|`` for the doubly exponential law.

    Per block length: the exact lower bound for the untruncated mean, the
    Monte Carlo running means of ``|W|`` and ``|W^eta|`` with standard errors,
    and whether the truncated running mean has settled (second half within
    three standard errors of the whole run).
    """
    spec = ProcessSpec.pathological(cap, seed)
    v0 = population_moments(spec, 2)[0]
    x_max = math.exp(-0.5 * math.exp(math.e))
    a = v0[1] / 4.0
    g = log_second_moment_g(v0, a, eta_scale=(4.0 * x_max / a, 1.0))
    out = {}
    for l in block_lengths:
        scheme = BlockScheme(l, 1, l)
        raw = np.empty(replications)
        trunc = np.empty(replications)
        for r in range(replications):
            mom = local_moments(generate(spec, l, seed, r), scheme, 2)
            trunc[r] = abs(local_statistics(mom, g, truncated=True)[0])
            try:
                raw[r] = abs(local_statistics(mom, g)[0])
            except DomainViolation:
                raw[r] = np.inf
        run_t = np.cumsum(trunc) / np.arange(1, replications + 1)
        half = replications // 2
        se_t = trunc.std(ddof=1) / math.sqrt(replications)
        se_half = trunc[half:].std(ddof=1) / math.sqrt(replications - half)
        settled = abs(trunc[half:].mean() - run_t[-1]) <= 3.0 * math.hypot(se_t, se_half)
        out[l] = {
            "untruncated_bound": untruncated_lower_bound(l, cap, float(v0[1])),
            "mc_untruncated_mean": float(raw.mean()),
            "mc_untruncated_se": float(raw.std(ddof=1) / math.sqrt(replications)),
            "mc_truncated_mean": float(run_t[-1]),
            "mc_truncated_se": float(se_t),
            "truncated_running_mean": run_t[:: max(1, replications // 20)].tolist(),
            "truncated_settled": bool(settled),
            "truncated_sup_bound": float(math.sqrt(l) * math.log(2.0)),
        }
    return out
