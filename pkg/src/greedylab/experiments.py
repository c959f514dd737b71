"""Experiment drivers behind the ``greedylab`` subcommands."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import analysis
from .dictionaries import RidgeDictionary
from .errors import ParameterError
from .greedy import ALGORITHMS, OGA, PGA_SHRINK, packing_sum, run
from .hilbert import SampleSet, rng_streams
from .report import COUNTEREXAMPLE_COLUMNS, LOWER_BOUND_COLUMNS, RUN_COLUMNS, RunReport

SUBCOMMANDS = ("ridge2d", "lower-bound", "counterexample", "noise")
EPSILON_SWEEP = (0.2, 0.1, 0.05, 0.02)
FAST_NUM_SAMPLES = 2000


def ridge_target(x, y):
    """Smooth test function on the unit square."""
    return np.sin(np.pi * (x + y)) ** 2 * np.sin(np.pi * (x - y ** 2))


@dataclass
class ExperimentConfig:
    subcommand: str = "ridge2d"
    seed: int = 0
    num_samples: int = 5000
    iterations: int = 100
    algorithm: str = OGA
    shrinkage: float = 1.0
    alpha: float = 0.25
    epsilon: float | None = None
    delta: float | None = None
    noise_scale: float = 0.05
    skip_prefix: int = analysis.SKIP_PREFIX
    max_exponent: int = 6
    output: str | None = None
    format: str = "csv"
    threads: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.subcommand not in SUBCOMMANDS:
            raise ParameterError(f"unknown subcommand {self.subcommand!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise ParameterError("seed must be an unsigned 64-bit integer")
        if self.num_samples < 1:
            raise ParameterError("num-samples must be positive")
        if self.iterations < 1:
            raise ParameterError("iterations must be positive")
        if self.algorithm not in ALGORITHMS:
            raise ParameterError(f"algorithm must be one of {', '.join(ALGORITHMS)}")
        if not 0.0 < self.shrinkage <= 1.0:
            raise ParameterError("shrinkage must lie in (0, 1]")
        if not self.alpha > 0:
            raise ParameterError("alpha must be positive")
        if self.noise_scale < 0:
            raise ParameterError("noise-scale must be non-negative")
        if self.skip_prefix < 0:
            raise ParameterError("skip-prefix must be non-negative")
        if not 0 <= self.max_exponent <= 20:
            raise ParameterError("max-exponent must lie in 0..20")
        if self.format not in ("csv", "svg", "both"):
            raise ParameterError("format must be csv, svg or both")
        if self.format != "csv" and self.output is None:
            raise ParameterError("svg output needs --output")
        if self.threads < 1:
            raise ParameterError("threads must be positive")
        return self


def ridge_setup(config: ExperimentConfig):
    sample_rng, noise_rng = rng_streams(config.seed)
    samples = SampleSet.uniform(config.num_samples, config.seed, rng=sample_rng)
    dictionary = RidgeDictionary(samples, threads=config.threads)
    return dictionary, samples.evaluate(ridge_target), noise_rng


def _run_rows(state):
    packing = packing_sum(state) if state.algorithm == OGA else None
    rows = []
    for i, h in enumerate(state.history):
        pc = float(packing[i]) if packing is not None else math.nan
        rows.append((h.k, h.residual_norm, h.correlation, pc))
    return rows


def _fit_or_warn(report, values, skip_prefix, indices=None):
    try:
        report.rate = analysis.fit_rate(values, skip_prefix, indices=indices)
    except ParameterError as exc:
        report.warnings.append(f"no rate fit: {exc}")


def cmd_ridge2d(config: ExperimentConfig) -> RunReport:
    """Greedy approximation of the smooth target by Heaviside ridge atoms."""
    t0 = time.perf_counter()
    dictionary, f, _ = ridge_setup(config)
    shrink = config.shrinkage if config.algorithm == PGA_SHRINK else 1.0
    state = run(config.algorithm, dictionary, f, config.iterations, shrinkage=shrink)
    report = RunReport("ridge2d", RUN_COLUMNS, _run_rows(state))
    report.summary = {"algorithm": config.algorithm, "seed": config.seed,
                      "num_samples": config.num_samples, "status": state.status,
                      "iterations": state.k}
    if state.k:
        report.summary["final_error"] = state.history[-1].residual_norm
    _fit_or_warn(report, state.residual_norms(), config.skip_prefix)
    report.duration = time.perf_counter() - t0
    return report


def cmd_noise(config: ExperimentConfig) -> RunReport:
    """OGA on the ridge target plus Gaussian noise of a prescribed norm."""
    t0 = time.perf_counter()
    dictionary, h, noise_rng = ridge_setup(config)
    nr = analysis.noise_robustness_check(h, dictionary, config.noise_scale, config.iterations,
                                         noise_rng, skip_prefix=config.skip_prefix)
    state = nr.state
    report = RunReport("noise", RUN_COLUMNS, _run_rows(state), checks=dict(nr.checks))
    k = np.arange(1, state.k + 1)
    report.series = {"excess": (k, nr.excess)}
    report.summary = {"seed": config.seed, "num_samples": config.num_samples,
                      "noise_scale": config.noise_scale, "status": state.status,
                      "iterations": state.k}
    if state.k:
        report.summary.update(final_error=float(nr.errors[-1]), initial_excess=float(nr.excess[0]),
                              final_excess=float(nr.excess[-1]))
    if nr.decay is not None:
        report.summary["excess_decay_order"] = nr.decay.order
    else:
        report.warnings.append("too few positive excess values for a decay fit")
    _fit_or_warn(report, state.residual_norms(), config.skip_prefix)
    report.duration = time.perf_counter() - t0
    return report


def cmd_lower_bound(config: ExperimentConfig) -> RunReport:
    """Sharpness check on the sequence dictionary for n = 1, 2, 4, ..."""
    t0 = time.perf_counter()
    ns = [2 ** j for j in range(config.max_exponent + 1)]
    reports = [analysis.verify_lower_bound(config.alpha, n) for n in ns]
    rows = [(r.n, r.residual_norm, r.bound, r.ratio) for r in reports]
    report = RunReport("lower-bound", LOWER_BOUND_COLUMNS, rows)
    for r in reports:
        report.checks[f"n={r.n}"] = r.passed
        if not r.passed:
            bad = [k for k, v in r.checks.items() if not v]
            report.warnings.append(f"n={r.n}: failed {', '.join(bad)}")
    _fit_or_warn(report, [r.residual_norm for r in reports], config.skip_prefix, indices=ns)
    if report.rate is not None:
        expected = -(0.5 + config.alpha)
        report.checks["slope"] = abs(report.rate.slope - expected) <= 0.02
        report.summary["expected_slope"] = expected
    report.summary["alpha"] = config.alpha
    report.duration = time.perf_counter() - t0
    return report


def cmd_counterexample(config: ExperimentConfig) -> RunReport:
    """Variation norm of the third OGA iterate on the five-atom construction."""
    t0 = time.perf_counter()
    eps_list = [config.epsilon] if config.epsilon is not None else list(EPSILON_SWEEP)
    reports = []
    for eps in eps_list:
        delta = config.delta if config.delta is not None else eps / 4.0
        reports.append(analysis.verify_counterexample(eps, delta))
    rows = [(r.epsilon, r.variation_norm, r.bound) for r in reports]
    report = RunReport("counterexample", COUNTEREXAMPLE_COLUMNS, rows)
    for r in reports:
        report.checks[f"epsilon={r.epsilon:g}"] = r.passed
        report.summary[f"selected(epsilon={r.epsilon:g})"] = ",".join(r.selected)
        report.warnings.extend(f"epsilon={r.epsilon:g}: {m}" for m in r.mismatches())
    if len(reports) > 1:
        by_eps = sorted(reports, key=lambda r: -r.epsilon)
        norms = [r.variation_norm for r in by_eps]
        report.checks["monotone"] = all(b > a for a, b in zip(norms, norms[1:]))
    report.duration = time.perf_counter() - t0
    return report


COMMANDS = {
    "ridge2d": cmd_ridge2d,
    "lower-bound": cmd_lower_bound,
    "counterexample": cmd_counterexample,
    "noise": cmd_noise,
}


def run_experiment(config: ExperimentConfig) -> RunReport:
    return COMMANDS[config.validate().subcommand](config)
