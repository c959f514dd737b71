import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedylab.dictionaries import (FiniteDictionary, RidgeDictionary, SequenceDictionary,
                                    build_counterexample_dictionary, sequence_target)
from greedylab.errors import ParameterError
from greedylab.greedy import (CONVERGED, GreedyState, STALLED, oga_step, packing_sum, pga_step,
                              rga_step, run)
from greedylab.hilbert import EuclideanSpace, SampleSet


def random_problem(seed, dim=None, n_atoms=None):
    rng = np.random.default_rng(seed)
    dim = dim or int(rng.integers(2, 21))
    n_atoms = n_atoms or int(rng.integers(1, 41))
    atoms = rng.standard_normal((n_atoms, dim))
    atoms /= np.linalg.norm(atoms, axis=1, keepdims=True)
    return FiniteDictionary(atoms), rng.standard_normal(dim)


def assert_oga_invariants(state):
    space, f = state.space, state.target
    prev = space.norm(f)
    for k, h in enumerate(state.history):
        assert h.residual_norm <= prev + 1e-12
        prev = h.residual_norm
    q = state.basis.q
    assert np.abs(space.inner_rows(q, state.residual)).max(initial=0) <= 1e-10
    assert np.abs(state.iterate + state.residual - f).max() <= 1e-12


# --- OGA ------------------------------------------------------------------

def test_oga_single_atom_is_exact():
    g = np.array([0.6, 0.8])
    state = run("oga", FiniteDictionary([g]), g, 1)
    assert state.history[0].residual_norm <= 1e-12


def test_oga_on_sequence_dictionary():
    alpha, n_terms = 0.25, 8
    d = SequenceDictionary(alpha, n_terms)
    state = run("oga", d, sequence_target(alpha, n_terms), 4)
    assert [a.index for a in state.atoms] == [1, 2, 3, 4]
    expected = np.zeros(n_terms)
    expected[4:] = np.arange(5, 9) ** -alpha / 8
    assert np.abs(state.residual - expected).max() <= 1e-12


def test_oga_on_the_five_atom_construction():
    # The computed selection is x3, x1, x4.  After x3 the residual is
    # (eps/4)(e1 + e2) + delta e5, and x1 correlates with it at
    # (eps/4)(sqrt(1 - eps^2) - eps), which beats x2 at eps^2/4.
    eps, delta = 0.05, 0.01
    d, f = build_counterexample_dictionary(eps, delta)
    state = run("oga", d, f, 3)
    assert [d.labels[a.index] for a in state.atoms] == ["x3", "x1", "x4"]
    assert state.history[1].correlation == pytest.approx(eps / 4 * (math.sqrt(1 - eps ** 2) - eps),
                                                         rel=1e-12)
    assert_oga_invariants(state)


@pytest.mark.parametrize("seed", range(20))
def test_oga_invariants_random(seed):
    d, f = random_problem(seed)
    state = run("oga", d, f, 40)
    assert_oga_invariants(state)


@pytest.mark.parametrize("seed", range(20))
def test_oga_per_step_inequality(seed):
    d, f = random_problem(seed)
    space = d.space
    seen = []

    def check(state):
        h = state.history[-1]
        prev = seen[-1] if seen else space.norm(f)
        bound = prev ** 2 - h.correlation ** 2 / h.orth_component_norm ** 2
        assert h.residual_norm ** 2 <= bound + 1e-10
        seen.append(h.residual_norm)

    run("oga", d, f, 40, callback=check)


def test_oga_converges_when_target_is_spanned():
    d, _ = random_problem(1, dim=5, n_atoms=10)
    f = d.atoms[:3].T @ np.array([1.0, -2.0, 0.5])
    state = run("oga", d, f, 20)
    assert state.status == CONVERGED
    assert state.space.norm(state.residual) <= 1e-10


def test_oga_stalls_on_dependent_atom():
    d = FiniteDictionary([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    state = GreedyState("oga", d, np.array([1.0, 0.0, 1.0]))
    oga_step(state)
    assert state.k == 1
    oga_step(state)  # residual e3 is orthogonal to both atoms
    assert state.status == CONVERGED

    state = GreedyState("oga", d, np.array([1.0, 0.0, 0.0]))
    state.basis.extend(np.array([1.0, 0.0, 0.0]))  # the argmax atom is already spanned
    oga_step(state)
    assert state.status == STALLED and state.k == 0


def test_run_zero_target_converges_immediately():
    d, _ = random_problem(0, dim=4, n_atoms=3)
    state = run("oga", d, np.zeros(4), 10)
    assert state.status == CONVERGED and state.k == 0


def test_run_rejects_bad_arguments():
    d, f = random_problem(0, dim=4, n_atoms=3)
    with pytest.raises(ParameterError):
        run("oga", d, f, 0)
    with pytest.raises(ParameterError):
        run("omp", d, f, 3)
    with pytest.raises(ParameterError):
        run("pga", d, f, 3, shrinkage=0.5)
    with pytest.raises(ParameterError):
        run("pga-shrink", d, f, 3, shrinkage=1.5)
    with pytest.raises(ParameterError):
        pga_step(GreedyState("oga", d, f))


def test_run_on_lower_bound_configuration():
    alpha, n = 0.25, 32
    state = run("oga", SequenceDictionary(alpha, 2 * n), sequence_target(alpha, 2 * n), n)
    k = np.arange(n + 1, 2 * n + 1)
    want = math.sqrt(math.fsum(k ** (-2 * alpha))) / (2 * n)
    assert state.history[-1].residual_norm == pytest.approx(want, abs=1e-12)


# --- PGA ------------------------------------------------------------------

def test_pga_orthonormal_example():
    d = FiniteDictionary(np.eye(2))
    state = GreedyState("pga", d, np.array([1.0, 0.5]))
    pga_step(state)
    assert state.atoms[0].index == 0 and np.array_equal(state.residual, [0, 0.5])
    pga_step(state)
    assert state.atoms[1].index == 1 and np.array_equal(state.residual, [0, 0])


@pytest.mark.parametrize("s", [1.0, 0.5, 0.2])
@pytest.mark.parametrize("seed", range(5))
def test_pga_residual_identity(seed, s):
    d, f = random_problem(seed)
    alg = "pga" if s == 1.0 else "pga-shrink"
    state = GreedyState(alg, d, f, shrinkage=s)
    prev = d.space.norm(f)
    for _ in range(15):
        pga_step(state)
        h = state.history[-1]
        want = prev ** 2 - (2 * s - s * s) * h.correlation ** 2
        assert h.residual_norm ** 2 == pytest.approx(want, abs=1e-12)
        prev = h.residual_norm


@pytest.mark.parametrize("seed", range(5))
def test_pga_equals_oga_on_orthonormal_dictionary(seed):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((12, 12)))
    d = FiniteDictionary(q.T[:8])
    f = rng.standard_normal(12)
    oga = run("oga", d, f, 8).residual_norms()
    pga = run("pga", d, f, 8).residual_norms()
    assert np.array_equal(oga, pga) or np.abs(oga - pga).max() <= 1e-15


# --- RGA ------------------------------------------------------------------

def test_rga_first_step_is_one_dimensional_least_squares():
    d, f = random_problem(3)
    state = GreedyState("rga", d, f)
    rga_step(state)
    h = state.history[0]
    g = d.atom(h.atom)
    assert h.alpha == 0.0
    assert h.beta == pytest.approx(d.space.inner(f, g), rel=1e-14)


def test_rga_exact_when_target_in_plane():
    space = EuclideanSpace(3)
    d = FiniteDictionary(np.eye(3))
    f = np.array([0.0, 2.0, 1.0])
    state = GreedyState("rga", d, f)
    rga_step(state)
    rga_step(state)
    assert space.norm(state.residual) <= 1e-10


@pytest.mark.parametrize("seed", range(10))
def test_rga_not_worse_than_pga_with_same_atom(seed):
    d, f = random_problem(seed)
    rga = GreedyState("rga", d, f)
    for _ in range(10):
        prev, prev_res = rga.iterate.copy(), rga.residual.copy()
        rga_step(rga)
        g = d.atom(rga.atoms[-1])
        pga_iterate = prev + d.space.inner(g, prev_res) * g
        assert rga.history[-1].residual_norm <= d.space.norm(f - pga_iterate) + 1e-12


def test_rga_exact_scan_first_step_not_worse():
    for seed in range(5):
        d, f = random_problem(seed)
        a = GreedyState("rga", d, f)
        b = GreedyState("rga", d, f)
        rga_step(a)
        rga_step(b, exact=True)
        assert b.history[0].residual_norm <= a.history[0].residual_norm + 1e-12


# --- packing sums ---------------------------------------------------------

def test_packing_sum_unit_first_step_and_orthonormal():
    d = FiniteDictionary(np.eye(6))
    f = np.arange(1.0, 7.0)
    state = run("oga", d, f, 6)
    ps = packing_sum(state)
    assert ps[0] == 1.0
    assert np.array_equal(ps, np.arange(1.0, 7.0))


def test_packing_sum_only_for_oga():
    d, f = random_problem(0)
    with pytest.raises(ParameterError):
        packing_sum(run("pga", d, f, 3))


# --- determinism ----------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["oga", "pga", "rga"]))
def test_runs_are_deterministic(seed, algorithm):
    d, f = random_problem(seed)
    a = run(algorithm, d, f, 10).residual_norms()
    b = run(algorithm, d, f, 10).residual_norms()
    assert np.array_equal(a, b)


def test_ridge_oga_small_run():
    x = SampleSet.uniform(200, seed=5)
    d = RidgeDictionary(x)
    f = np.sin(3 * x.points[:, 0]) * x.points[:, 1]
    state = run("oga", d, f, 30)
    assert state.k == 30
    norms = state.residual_norms()
    assert np.all(norms > 0) and np.all(np.diff(norms) <= 1e-12)
    assert_oga_invariants(state)
