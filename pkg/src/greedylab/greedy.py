"""Greedy iteration schemes over an arbitrary dictionary.

The driver only needs a dictionary exposing ``space``, ``argmax`` and
``atom`` (see :mod:`greedylab.dictionaries`).  Four schemes are supported:

``oga``
    orthogonal greedy / orthogonal matching pursuit: pick the atom most
    correlated with the residual, then project the target onto the span of
    every atom picked so far;
``pga``
    pure greedy / matching pursuit, ``f_k = f_{k-1} + <g_k, r_{k-1}> g_k``;
``pga-shrink``
    the same step scaled by a shrinkage factor ``s`` in (0, 1];
``rga``
    relaxed greedy, ``f_k = alpha f_{k-1} + beta g_k`` with ``(alpha, beta)``
    the exact least-squares pair for the chosen atom.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .dictionaries import DictionaryElement
from .errors import ParameterError
from .hilbert import OrthoBasis, project_and_residual

log = logging.getLogger(__name__)

OGA = "oga"
PGA = "pga"
PGA_SHRINK = "pga-shrink"
RGA = "rga"
ALGORITHMS = (OGA, PGA, PGA_SHRINK, RGA)

RUNNING = "running"
COMPLETED = "completed"
CONVERGED = "converged"
STALLED = "stalled"

STOP_TOLERANCE = 1e-13


@dataclass
class StepRecord:
    k: int
    atom: DictionaryElement
    correlation: float
    residual_norm: float
    orth_component_norm: float = math.nan
    alpha: float = math.nan
    beta: float = math.nan


@dataclass
class GreedyState:
    algorithm: str
    dictionary: object
    target: np.ndarray
    shrinkage: float = 1.0
    iterate: np.ndarray = None
    residual: np.ndarray = None
    basis: OrthoBasis | None = None
    atoms: list = field(default_factory=list)
    history: list = field(default_factory=list)
    status: str = RUNNING

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ParameterError(f"unknown algorithm {self.algorithm!r}")
        if not 0.0 < self.shrinkage <= 1.0:
            raise ParameterError("shrinkage must lie in (0, 1]")
        space = self.dictionary.space
        self.target = np.asarray(self.target, dtype=float)
        space._check(self.target)
        if self.iterate is None:
            self.iterate = space.zeros()
        if self.residual is None:
            self.residual = self.target - self.iterate
        if self.algorithm == OGA and self.basis is None:
            self.basis = OrthoBasis(space)

    @property
    def space(self):
        return self.dictionary.space

    @property
    def k(self) -> int:
        return len(self.history)

    @property
    def done(self) -> bool:
        return self.status != RUNNING

    def residual_norms(self) -> np.ndarray:
        return np.array([h.residual_norm for h in self.history])


def _select(state: GreedyState, stop_tolerance: float):
    """Argmax atom for the current residual, or None once converged."""
    element, value = state.dictionary.argmax(state.residual)
    if not value > stop_tolerance:
        state.status = CONVERGED
        return None, value
    return element, value


def oga_step(state: GreedyState, stop_tolerance: float = STOP_TOLERANCE) -> GreedyState:
    if state.algorithm != OGA:
        raise ParameterError("oga_step needs an OGA state")
    element, value = _select(state, stop_tolerance)
    if element is None:
        return state
    g = state.dictionary.atom(element)
    ext = state.basis.extend(g)
    if not ext.accepted:
        log.info("atom %s numerically dependent (component %.3e); stopping", element,
                 ext.component_norm)
        state.status = STALLED
        return state
    state.atoms.append(element)
    state.iterate, state.residual = project_and_residual(state.basis, state.target)
    state.history.append(StepRecord(state.k + 1, element, value, state.space.norm(state.residual),
                                    orth_component_norm=ext.component_norm))
    return state


def pga_step(state: GreedyState, stop_tolerance: float = STOP_TOLERANCE) -> GreedyState:
    if state.algorithm not in (PGA, PGA_SHRINK):
        raise ParameterError("pga_step needs a PGA state")
    element, value = _select(state, stop_tolerance)
    if element is None:
        return state
    g = state.dictionary.atom(element)
    step = state.shrinkage * state.space.inner(g, state.residual)
    state.iterate = state.iterate + step * g
    state.residual = state.target - state.iterate
    state.atoms.append(element)
    state.history.append(StepRecord(state.k + 1, element, value, state.space.norm(state.residual),
                                    beta=step))
    return state


def _relaxed_pair(space, f, prev, g):
    """Least-squares ``(alpha, beta)`` for ``f ~ alpha prev + beta g``."""
    a11 = space.inner(prev, prev)
    a12 = space.inner(prev, g)
    a22 = space.inner(g, g)
    b1 = space.inner(f, prev)
    b2 = space.inner(f, g)
    det = a11 * a22 - a12 * a12
    if det <= 1e-12 * a11 * a22 or a11 == 0.0:
        # prev is zero or parallel to g: the plane collapses onto span(g)
        return 0.0, (b2 / a22 if a22 > 0 else 0.0)
    return (b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det


def rga_step(state: GreedyState, stop_tolerance: float = STOP_TOLERANCE,
             exact: bool = False) -> GreedyState:
    """One relaxed greedy step.

    By default the atom is the argmax-correlation atom and only ``(alpha,
    beta)`` are optimized.  ``exact=True`` (finite dictionaries only) instead
    solves the 2x2 problem for every atom and keeps the best one.
    """
    if state.algorithm != RGA:
        raise ParameterError("rga_step needs an RGA state")
    element, value = _select(state, stop_tolerance)
    if element is None:
        return state
    space, f, prev = state.space, state.target, state.iterate
    if exact:
        atoms = getattr(state.dictionary, "atoms", None)
        if atoms is None:
            raise ParameterError("exact RGA needs a finite dictionary")
        best = None
        for i, g in enumerate(atoms):
            al, be = _relaxed_pair(space, f, prev, g)
            res = space.norm(f - al * prev - be * g)
            if best is None or res < best[0]:
                best = (res, i, al, be)
        _, i, alpha, beta = best
        element = DictionaryElement(element.kind, i)
        value = abs(space.inner(atoms[i], state.residual))
    g = state.dictionary.atom(element)
    if not exact:
        alpha, beta = _relaxed_pair(space, f, prev, g)
    state.iterate = alpha * prev + beta * g
    state.residual = f - state.iterate
    state.atoms.append(element)
    state.history.append(StepRecord(state.k + 1, element, value, space.norm(state.residual),
                                    alpha=alpha, beta=beta))
    return state


_STEPS = {OGA: oga_step, PGA: pga_step, PGA_SHRINK: pga_step, RGA: rga_step}


def run(algorithm: str, dictionary, f, n_iterations: int,
        stop_tolerance: float = STOP_TOLERANCE, shrinkage: float = 1.0,
        callback=None) -> GreedyState:
    """Iterate until ``n_iterations`` steps, convergence, or a stall.

    ``callback(state)`` is invoked after every completed step.
    """
    if n_iterations < 1:
        raise ParameterError("n_iterations must be at least 1")
    if algorithm == PGA and shrinkage != 1.0:
        raise ParameterError("plain PGA uses shrinkage 1; choose pga-shrink")
    state = GreedyState(algorithm, dictionary, f, shrinkage=shrinkage)
    step = _STEPS[algorithm]
    while state.k < n_iterations:
        step(state, stop_tolerance)
        if state.done:
            break
        if callback is not None:
            callback(state)
    else:
        state.status = COMPLETED
    return state


def packing_sum(state: GreedyState) -> np.ndarray:
    """Cumulative sums of ``||(I - P_{k-1}) g_k||^-2`` over the OGA history."""
    if state.algorithm != OGA:
        raise ParameterError("packing sums are defined for OGA runs")
    norms = np.array([h.orth_component_norm for h in state.history])
    return np.cumsum(norms ** -2.0)
