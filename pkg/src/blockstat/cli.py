"""Command-line entry point.

Exit status: 0 on success, 1 on I/O or configuration errors, 2 when the
kernel is degenerate, 3 when g is evaluated outside its domain.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from . import dependence, harness, io
from .errors import BlockStatError, DegenerateKernel, DomainViolation
from .gfuncs import g_order
from .pipeline import constancy_test
from .processes import generate
from .ustat import KERNELS, Discrete, Normal, bernoulli

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_DOMAIN = 0, 1, 2, 3
COMMANDS = ("test", "simulate", "validate", "delta", "report")


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    spec: str | None = None
    block_length: int | None = None
    block_count: int | None = None
    g: str = "log_variance"
    kernel: str = "gini"
    centering: str = "gaussian"
    seed: int = 0
    replications: int | None = None
    out: str | None = None
    threads: int | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"command: unknown {self.command!r}")
        if self.command in ("test", "report") and not self.input:
            raise ValueError(f"{self.command}: --in is required")
        if self.command in ("simulate", "delta") and not self.spec:
            raise ValueError(f"{self.command}: --spec is required")
        if self.kernel not in KERNELS:
            raise ValueError(f"--kernel: unknown kernel {self.kernel!r}")
        g_order(self.g)


def _threads(value):
    if value is not None:
        return value
    env = os.environ.get("BLOCKSTAT_THREADS")
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise ValueError(f"BLOCKSTAT_THREADS: not an integer: {env!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None,
                        help="worker cap; falls back to BLOCKSTAT_THREADS")
    common.add_argument("--out", default=None, help="output path (stdout if omitted)")

    p = argparse.ArgumentParser(prog="blockstat", description="Block-moment U-statistic tests.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", parents=[common], help="test a CSV series for constant block laws")
    t.add_argument("--in", dest="input", required=True)
    t.add_argument("--l", "--block-length", dest="block_length", type=int, required=True)
    t.add_argument("--g", default="log_variance")
    t.add_argument("--kernel", default="gini")
    t.add_argument("--centering", default="gaussian")
    t.add_argument("--v0", type=float, nargs="+", default=None)
    t.add_argument("--sigma-sq", type=float, default=None)
    t.add_argument("--spec", default=None, help="null process JSON for Monte Carlo centerings")
    t.add_argument("--replications", type=int, default=None)

    s = sub.add_parser("simulate", parents=[common], help="write a simulated series as CSV")
    s.add_argument("--spec", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--replication", type=int, default=0)

    v = sub.add_parser("validate", parents=[common], help="run a Monte Carlo validation suite")
    v.add_argument("--suite", choices=("theorem1", "theorem2", "size", "counterexample"),
                   required=True)
    v.add_argument("--spec", default=None)
    v.add_argument("--dist", default="normal", help="normal, bernoulli or a JSON file of {values, probs}")
    v.add_argument("--g", default="log_variance")
    v.add_argument("--kernel", default="gini")
    v.add_argument("--centering", default="gaussian")
    v.add_argument("--l", "--block-length", dest="block_length", type=int, default=400)
    v.add_argument("--b", "--block-count", dest="block_count", type=int, default=40)
    v.add_argument("--sigma-sq", type=float, default=None)
    v.add_argument("--replications", type=int, default=1000)
    v.add_argument("--alpha", type=float, nargs="+", default=[0.01, 0.05, 0.10])
    v.add_argument("--dump", default=None, help="per-replication statistics CSV")

    d = sub.add_parser("delta", parents=[common], help="physical dependence profile as CSV")
    d.add_argument("--spec", required=True)
    d.add_argument("--k", type=int, default=1)
    d.add_argument("--p", type=float, default=2.0)
    d.add_argument("--replications", type=int, default=10_000)
    d.add_argument("--window", type=int, default=None, help="profile |i| <= window")
    d.add_argument("--mode", choices=("coupling-MC", "analytic"), default="coupling-MC")

    r = sub.add_parser("report", parents=[common], help="summarise a JSON report")
    r.add_argument("--in", dest="input", required=True)
    return p


def _distribution(name: str):
    if name == "normal":
        return Normal()
    if name == "bernoulli":
        return bernoulli(0.5)
    with open(name) as fh:
        d = json.load(fh)
    return Discrete(d["values"], d["probs"])


def _cmd_test(a) -> str:
    x = io.read_series(a.input)
    spec = io.read_spec(a.spec) if a.spec else None
    rep = constancy_test(x, a.block_length, a.g, a.kernel, a.centering, v0=a.v0,
                         sigma_sq=a.sigma_sq, spec=spec, replications=a.replications,
                         seed=a.seed if spec is not None else None)
    d = rep.to_dict()
    d["config"]["input"] = a.input
    return io.dumps(d)


def _cmd_simulate(a) -> str:
    spec = io.read_spec(a.spec)
    if a.n < 1:
        raise ValueError("--n must be positive")
    return io.format_series(generate(spec, a.n, a.seed, a.replication))


def _cmd_validate(a, workers) -> str:
    spec = io.read_spec(a.spec) if a.spec else None
    if a.suite == "theorem1":
        rep = harness.validate_theorem1(_distribution(a.dist), a.kernel, a.block_count,
                                        a.replications, a.seed, workers)
    elif a.suite in ("theorem2", "size"):
        if spec is None:
            raise ValueError(f"validate --suite {a.suite}: --spec is required")
        if a.suite == "size":
            p = harness.null_pvalues(spec, a.block_length * a.block_count, a.block_length,
                                     a.replications, a.seed, workers, g=a.g, kernel=a.kernel)
            return io.dumps({"suite": "size", "replications": a.replications, "seed": a.seed,
                             "rates": {str(k): v for k, v in
                                       harness.empirical_size(p, a.alpha).items()},
                             "spec": spec.to_dict(), "block_length": a.block_length,
                             "block_count": a.block_count, "g": a.g, "kernel": a.kernel})
        rep = harness.validate_theorem2(spec, a.g, a.kernel, a.block_length, a.block_count,
                                        a.replications, a.centering, a.sigma_sq, a.seed,
                                        workers=workers)
    else:
        res = harness.counterexample_demo(replications=a.replications, seed=a.seed)
        return io.dumps({"suite": "counterexample", "seed": a.seed,
                         "replications": a.replications,
                         "block_lengths": {str(k): v for k, v in res.items()}})
    if a.dump:
        rep.to_csv(a.dump)
    return io.dumps(rep.to_dict())


def _cmd_delta(a) -> str:
    spec = io.read_spec(a.spec)
    window = None if a.window is None else range(-a.window, a.window + 1)
    prof = dependence.profile(spec, a.k, a.p, a.replications, a.seed, a.mode, window)
    lines = ["i,delta,stderr"] + [f"{int(i)},{d:.17g},{s:.17g}"
                                  for i, d, s in zip(prof.indices, prof.values, prof.stderr)]
    return "\n".join(lines) + "\n"


def _cmd_report(a) -> str:
    with open(a.input) as fh:
        d = json.load(fh)
    keys = ("U_n", "centering", "centering_method", "gamma_sq", "sigma_sq", "standardized",
            "p_value", "block_count", "block_length", "ks_distance", "ks_pvalue",
            "ad_statistic", "mean", "variance", "rejection_rates", "replications", "rates")
    rows = [f"{k}: {d[k]}" for k in keys if k in d]
    for k, v in sorted(d.get("diagnostics", {}).items()):
        rows.append(f"diagnostics.{k}: {v}")
    if not rows:
        raise ValueError(f"{a.input}: not a TestReport or McReport")
    return "\n".join(rows) + "\n"


def run(argv=None) -> int:
    try:
        a = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        workers = _threads(a.threads)
        RunConfig(a.command, getattr(a, "input", None), getattr(a, "spec", None),
                  getattr(a, "block_length", None), getattr(a, "block_count", None),
                  getattr(a, "g", "log_variance"), getattr(a, "kernel", "gini"),
                  getattr(a, "centering", "gaussian"), a.seed, getattr(a, "replications", None),
                  a.out, workers).validate()
        if a.command == "test":
            text = _cmd_test(a)
        elif a.command == "simulate":
            text = _cmd_simulate(a)
        elif a.command == "validate":
            text = _cmd_validate(a, workers)
        elif a.command == "delta":
            text = _cmd_delta(a)
        else:
            text = _cmd_report(a)
        _emit(text, a.out)
    except DegenerateKernel as exc:
        print(f"error: degenerate kernel: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except DomainViolation as exc:
        print(f"error: domain violation at block {exc.block_index}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (BlockStatError, OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
