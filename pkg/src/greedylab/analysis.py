"""Rate fitting, variation norms, and checks of the lower-bound constructions."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .dictionaries import (FiniteDictionary, SequenceDictionary, build_counterexample_dictionary,
                           sequence_target)
from .errors import DomainError, ParameterError
from .greedy import OGA, run

SKIP_PREFIX = 10


@dataclass
class RateEstimate:
    """Least-squares line ``log(error) = slope * log(n) + intercept``."""

    slope: float
    intercept: float
    r_squared: float
    skip_prefix: int
    n_points: int

    @property
    def order(self) -> float:
        return -self.slope


def fit_loglog(x, y) -> tuple[float, float, float]:
    """OLS of ``log y`` on ``log x``; returns slope, intercept, R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("log-log fit needs positive abscissae and values")
    lx, ly = np.log(x), np.log(y)
    mx, my = lx.mean(), ly.mean()
    dx, dy = lx - mx, ly - my
    sxx = float(np.sum(dx * dx))
    if sxx == 0.0:
        raise ParameterError("need at least two distinct abscissae")
    slope = float(np.sum(dx * dy)) / sxx
    intercept = my - slope * mx
    ss_res = float(np.sum((ly - slope * lx - intercept) ** 2))
    ss_tot = float(np.sum(dy * dy))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return slope, float(intercept), min(max(r2, 0.0), 1.0)


def fit_rate(errors, skip_prefix: int = SKIP_PREFIX, indices=None) -> RateEstimate:
    """Fit the convergence order of an error sequence.

    ``indices`` are the (1-based) iteration counts of ``errors`` and default
    to ``1..len(errors)``.  Points with index ``<= skip_prefix`` are dropped
    because the order is a property of the tail.
    """
    errors = np.asarray(errors, dtype=float)
    if np.any(~(errors > 0)):
        raise DomainError("errors must be strictly positive")
    n = np.arange(1, errors.size + 1) if indices is None else np.asarray(indices, dtype=float)
    if n.shape != errors.shape:
        raise ParameterError("indices and errors differ in length")
    keep = n > skip_prefix
    if keep.sum() < 3:
        raise ParameterError(f"need at least 3 points after skipping the first {skip_prefix}")
    slope, intercept, r2 = fit_loglog(n[keep], errors[keep])
    return RateEstimate(slope, intercept, r2, skip_prefix, int(keep.sum()))


# ---------------------------------------------------------------------------
# variation norm over a finite dictionary


@dataclass
class VariationNormResult:
    value: float
    coefficients: np.ndarray
    feasible: bool


def min_l1_representation(columns, f, tol: float = 1e-9,
                          max_bases: int = 2_000_000) -> VariationNormResult:
    """Minimum ``sum |a_i|`` subject to ``columns @ a = f``.

    Some optimal solution is supported on linearly independent columns, so it
    suffices to solve on every column basis of the span and keep the smallest
    l1 mass.  The winner is re-solved on its exact support so the reported
    value does not depend on which basis it was found through.
    """
    G = np.asarray(columns, dtype=float)
    f = np.asarray(f, dtype=float)
    dim, n = G.shape
    if f.shape != (dim,):
        raise ParameterError("target length does not match the atoms")
    if np.linalg.norm(f) <= tol:
        return VariationNormResult(0.0, np.zeros(n), True)
    rank = np.linalg.matrix_rank(G) if n else 0
    if rank == 0:
        return VariationNormResult(math.inf, np.zeros(n), False)
    a, *_ = np.linalg.lstsq(G, f, rcond=None)
    if np.linalg.norm(G @ a - f) > tol:
        return VariationNormResult(math.inf, np.zeros(n), False)
    if math.comb(n, rank) > max_bases:
        raise ParameterError(f"{math.comb(n, rank)} column bases exceed the enumeration budget")

    best, best_support = math.inf, None
    for comb in itertools.combinations(range(n), rank):
        cols = G[:, comb]
        if np.linalg.matrix_rank(cols) < rank:
            continue
        a, *_ = np.linalg.lstsq(cols, f, rcond=None)
        if np.linalg.norm(cols @ a - f) > tol:
            continue
        val = float(np.abs(a).sum())
        if val < best:
            best = val
            best_support = [c for c, ai in zip(comb, a) if abs(ai) > 1e-12]

    coef = np.zeros(n)
    a, *_ = np.linalg.lstsq(G[:, best_support], f, rcond=None)
    coef[best_support] = a
    return VariationNormResult(float(np.abs(a).sum()), coef, True)


def variation_norm_finite(f, dictionary: FiniteDictionary, **kw) -> VariationNormResult:
    """Gauge of the symmetric convex hull of a finite dictionary at ``f``."""
    return min_l1_representation(dictionary.atoms.T, f, **kw)


# ---------------------------------------------------------------------------
# five-atom construction on which OGA iterates have large variation norm


def counterexample_closed_form(epsilon: float) -> np.ndarray:
    """Coefficients of ``f_3`` over ``x1, x2, x3`` as quoted with the construction."""
    s = math.sqrt(1.0 - epsilon ** 2)
    return np.array([0.25, 0.25 + s / epsilon, 0.5 - s / 4.0 - (1.0 - epsilon ** 2) / epsilon])


def counterexample_norm_bound(epsilon: float) -> float:
    return math.sqrt(1.0 - epsilon ** 2) / epsilon


@dataclass
class CounterexampleReport:
    epsilon: float
    delta: float
    selected: list
    residual: np.ndarray
    iterate: np.ndarray
    variation_norm: float
    witness: np.ndarray
    closed_form: np.ndarray
    bound: float
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def mismatches(self) -> list[str]:
        msgs = []
        c = self.checks
        if not c.get("selection", True):
            msgs.append(f"selected {self.selected}, expected ['x3', 'x2', 'x1']")
        if not c.get("residual", True):
            msgs.append(f"r_3 = {np.array2string(self.residual, precision=6)}, "
                        f"expected {self.delta:g} e5")
        if not c.get("a4_a5_zero", True):
            msgs.append(f"f_3 has e4/e5 components {self.iterate[3]:.3e}, {self.iterate[4]:.3e}")
        if not c.get("closed_form", True):
            msgs.append(f"witness {np.array2string(self.witness[:3], precision=6)} differs from "
                        f"closed form {np.array2string(self.closed_form, precision=6)}")
        if not c.get("norm_bound", True):
            msgs.append(f"variation norm {self.variation_norm:.6g} < bound {self.bound:.6g}")
        return msgs


def verify_counterexample(epsilon: float, delta: float, tol: float = 1e-10) -> CounterexampleReport:
    """Run three OGA steps on the five-atom construction and check its claims."""
    dictionary, f = build_counterexample_dictionary(epsilon, delta)
    state = run(OGA, dictionary, f, 3, stop_tolerance=0.0)
    selected = [dictionary.labels[h.atom.index] for h in state.history]
    r3, f3 = state.residual, state.iterate
    e5 = np.zeros(5)
    e5[4] = delta
    vn = variation_norm_finite(f3, dictionary)
    closed = counterexample_closed_form(epsilon)
    bound = counterexample_norm_bound(epsilon)
    checks = {
        "selection": selected == ["x3", "x2", "x1"],
        "residual": bool(np.max(np.abs(r3 - e5)) <= tol),
        "a4_a5_zero": bool(abs(f3[3]) <= tol and abs(f3[4]) <= tol),
        "closed_form": bool(vn.feasible
                            and np.allclose(vn.coefficients[:3], closed, rtol=1e-8, atol=1e-8)
                            and np.all(np.abs(vn.coefficients[3:]) <= tol)),
        "norm_bound": bool(vn.value >= bound),
    }
    return CounterexampleReport(epsilon, delta, selected, r3, f3, vn.value, vn.coefficients,
                                closed, bound, checks)


# ---------------------------------------------------------------------------
# sequence dictionary lower bound


def lower_bound_value(alpha: float, n: int) -> float:
    return 2.0 ** -(1.0 + alpha) * n ** (-0.5 - alpha)


@dataclass
class LowerBoundReport:
    alpha: float
    n: int
    residual: np.ndarray
    expected: np.ndarray
    residual_norm: float
    closed_form_norm: float
    bound: float
    selected: list
    target_variation_norm: float
    checks: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.residual_norm / self.bound

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def verify_lower_bound(alpha: float, n: int, tol: float = 1e-12) -> LowerBoundReport:
    """``n`` OGA steps on ``f_N = (1/N) sum_{k<=N} k^-alpha e_k`` with ``N = 2n``."""
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    if n < 1:
        raise ParameterError("n must be at least 1")
    big_n = 2 * n
    dictionary = SequenceDictionary(alpha, big_n)
    f = sequence_target(alpha, big_n)
    state = run(OGA, dictionary, f, n, stop_tolerance=0.0)
    k = np.arange(1, big_n + 1, dtype=float)
    expected = np.where(k > n, k ** -alpha / big_n, 0.0)
    closed = math.sqrt(math.fsum((k[n:] ** (-2.0 * alpha)).tolist()) / (4.0 * n * n))
    rn = dictionary.space.norm(state.residual)
    bound = lower_bound_value(alpha, n)
    selected = [h.atom.index for h in state.history]
    target_norm = min_l1_representation(np.diag(dictionary.scale), f).value
    checks = {
        "completed": len(selected) == n,
        "selection": selected == list(range(1, n + 1)),
        "residual": bool(np.max(np.abs(state.residual - expected)) <= tol),
        "norm_closed_form": abs(rn - closed) <= tol,
        "bound": rn >= bound,
        "target_norm_one": abs(target_norm - 1.0) <= 1e-12,
    }
    return LowerBoundReport(alpha, n, state.residual, expected, rn, closed, bound, selected,
                            target_norm, checks)


# ---------------------------------------------------------------------------
# noise robustness


@dataclass
class NoiseReport:
    noise_scale: float
    errors: np.ndarray
    excess: np.ndarray
    decay: RateEstimate | None
    state: object = None
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def scaled_noise(rng: np.random.Generator, space, noise_scale: float) -> np.ndarray:
    """Gaussian vector rescaled to have norm exactly ``noise_scale``."""
    z = rng.standard_normal(space.dim)
    nz = space.norm(z)
    return z * (noise_scale / nz) if nz > 0 else z * 0.0


def noise_robustness_check(h, dictionary, noise_scale: float, n_iterations: int,
                           rng: np.random.Generator, skip_prefix: int = SKIP_PREFIX,
                           callback=None) -> NoiseReport:
    """OGA on ``f = h + noise`` with ``||f - h|| = noise_scale``.

    ``excess[n-1] = ||f_n - f||^2 - ||f - h||^2``.  The check asserts the
    excess eventually drops below its first value and fits the decay order
    of its positive tail.
    """
    if noise_scale < 0:
        raise ParameterError("noise_scale must be non-negative")
    h = np.asarray(h, dtype=float)
    f = h + scaled_noise(rng, dictionary.space, noise_scale)
    state = run(OGA, dictionary, f, n_iterations, callback=callback)
    errors = state.residual_norms()
    noise_sq = dictionary.space.norm(f - h) ** 2
    excess = errors ** 2 - noise_sq
    decay = None
    pos = np.flatnonzero(excess > 0)
    if pos.size:
        idx = pos + 1
        keep = idx > skip_prefix
        if keep.sum() >= 3:
            try:
                decay = fit_rate(excess[pos][keep], skip_prefix, indices=idx[keep])
            except ParameterError:
                decay = None
    checks = {"excess_decreases": bool(excess.size >= 1 and (excess.size == 1 or
                                                              excess[-1] < excess[0]))}
    return NoiseReport(noise_scale, errors, excess, decay, state, checks)
