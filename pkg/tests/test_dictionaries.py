import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedylab.dictionaries import (DictionaryElement, FiniteDictionary, RidgeDictionary,
                                    SequenceDictionary, build_counterexample_dictionary,
                                    finite_argmax, halfplane_capture, ridge2d_argmax, sequence_argmax,
                                    sequence_target, split_value)
from greedylab.errors import DimensionError, ParameterError
from greedylab.hilbert import SampleSet, SparseVector

from oracles import brute_force_ridge, exact_split_value, linearly_separable


# --- ridge2d --------------------------------------------------------------

def test_ridge_three_point_example():
    x = SampleSet([[0.1, 0.1], [0.2, 0.2], [0.9, 0.9]])
    elem, val = ridge2d_argmax(np.array([1.0, 1.0, -1.0]), x)
    assert elem.captured == (0, 1)
    assert val == 2 / 3
    assert tuple(halfplane_capture(x.points, elem.direction, elem.offset)) == (0, 1)


def test_ridge_zero_and_constant_residual():
    x = SampleSet.uniform(4, seed=0)
    _, val = ridge2d_argmax(np.zeros(4), x)
    assert val == 0.0
    elem, val = ridge2d_argmax(np.ones(4), x)
    assert val == 1.0 and elem.captured == (0, 1, 2, 3)


def test_ridge_single_point():
    x = SampleSet([[0.5, 0.5]])
    elem, val = ridge2d_argmax(np.array([-2.0]), x)
    assert val == 2.0 and elem.captured == (0,)


def test_ridge_rejects_wrong_length():
    x = SampleSet.uniform(5, seed=0)
    with pytest.raises(DimensionError):
        ridge2d_argmax(np.ones(4), x)


def _check_against_oracle(points, r):
    x = SampleSet(points)
    elem, val = ridge2d_argmax(r, x)
    want, _ = brute_force_ridge(x.points, r)
    assert val == want
    # the returned element is genuinely a halfplane with that value
    cap = halfplane_capture(x.points, elem.direction, elem.offset)
    assert tuple(cap) == elem.captured
    assert exact_split_value(r, cap) == val


@pytest.mark.parametrize("seed", range(25))
def test_ridge_matches_brute_force_random(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 30))
    _check_against_oracle(rng.random((n, 2)), rng.standard_normal(n))


@pytest.mark.parametrize("seed", range(10))
def test_ridge_matches_brute_force_on_lattice(seed):
    # lattice points produce many collinear triples and equal angles
    rng = np.random.default_rng(100 + seed)
    grid = np.array([(i / 4, j / 4) for i in range(5) for j in range(5)])
    pts = grid[rng.choice(len(grid), size=int(rng.integers(3, 20)), replace=False)]
    r = rng.integers(-3, 4, size=len(pts)).astype(float)
    _check_against_oracle(pts, r)


def test_ridge_collinear_points():
    pts = np.column_stack([np.linspace(0, 1, 7), np.linspace(0, 1, 7)])
    r = np.array([1.0, -2.0, 3.0, 3.0, -1.0, 2.0, -5.0])
    _check_against_oracle(pts, r)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 25))
def test_ridge_capture_is_separable_and_consistent(seed, n):
    rng = np.random.default_rng(seed)
    x = SampleSet(rng.random((n, 2)))
    r = rng.standard_normal(n)
    d = RidgeDictionary(x)
    elem, val = d.argmax(r)
    assert linearly_separable(x.points, elem.captured)
    g = d.atom(elem)
    assert d.space.norm(g) <= 1 + 1e-9
    assert val == pytest.approx(abs(d.space.inner(g, r)), abs=1e-15)
    assert split_value(r, elem.captured) == val


def test_ridge_threads_give_identical_result():
    x = SampleSet.uniform(600, seed=3)
    r = np.random.default_rng(3).standard_normal(600)
    one = RidgeDictionary(x, threads=1, block_size=64).argmax(r)
    four = RidgeDictionary(x, threads=4, block_size=64).argmax(r)
    assert one == four


def test_ridge_block_size_does_not_change_result():
    x = SampleSet.uniform(300, seed=4)
    r = np.random.default_rng(4).standard_normal(300)
    a = RidgeDictionary(x, block_size=7).argmax(r)
    b = RidgeDictionary(x, block_size=1000).argmax(r)
    assert a == b


def test_ridge_needs_planar_points():
    with pytest.raises(DimensionError):
        RidgeDictionary(SampleSet.uniform(5, seed=0, dim=3))


# --- sequence dictionary --------------------------------------------------

def test_sequence_examples():
    elem, val = sequence_argmax(SparseVector.from_dict({1: 0.5, 2: 0.5}), 0.25)
    assert elem.index == 1 and val == 0.5

    elem, val = sequence_argmax(sequence_target(0.25, 8), 0.25)
    assert elem.index == 1 and val == pytest.approx(1 / 8, rel=1e-15)

    elem, val = sequence_argmax(SparseVector.from_dict({3: 1.0}), 0.5)
    assert elem.index == 3 and val == 3 ** -0.5


def test_sequence_empty_residual():
    elem, val = sequence_argmax(SparseVector.from_dict({}), 0.5)
    assert elem.index == 1 and val == 0.0


def test_sequence_atoms_have_norm_at_most_one():
    d = SequenceDictionary(0.3, 50)
    for k in range(1, 51):
        g = d.atom(DictionaryElement("sequence", k))
        assert d.space.norm(g) == pytest.approx(k ** -0.3, rel=1e-15)
        assert d.space.norm(g) <= 1 + 1e-9


def test_sequence_rejects_bad_alpha():
    with pytest.raises(ParameterError):
        SequenceDictionary(0.0, 4)


# --- finite dictionaries --------------------------------------------------

def test_finite_examples():
    d = FiniteDictionary([[0.6, 0.8]])
    elem, _ = finite_argmax(np.array([1.0, 2.0]), d)
    assert elem.index == 0

    d = FiniteDictionary(np.eye(3)[:2])
    elem, val = finite_argmax(np.array([0.0, 0.0, 1.0]), d)
    assert elem.index == 0 and val == 0.0


def test_finite_requires_unit_norm():
    with pytest.raises(ParameterError):
        FiniteDictionary([[1.0, 1.0]])


def test_finite_argmax_uses_absolute_value():
    d = FiniteDictionary(np.eye(3))
    elem, val = d.argmax(np.array([0.5, -2.0, 1.0]))
    assert elem.index == 1 and val == 2.0


# --- the five-atom construction -------------------------------------------

@pytest.mark.parametrize("eps,delta", [(0.05, 0.01), (0.2, 0.05), (0.1, 0.025), (0.4, 0.1)])
def test_counterexample_construction(eps, delta):
    d, f = build_counterexample_dictionary(eps, delta)
    assert d.labels == ["x1", "x2", "x3", "x4", "x5"]
    assert np.allclose([d.space.norm(a) for a in d.atoms], 1.0, atol=1e-15)
    corr = d.correlations(f)
    assert corr[2] == 0.5
    assert corr[3] == pytest.approx(eps ** 2 / 8 + 0.25 + delta ** 2, abs=1e-15)
    assert corr[4] == pytest.approx(corr[3], abs=1e-15)
    assert np.allclose(f, 0.5 * (d.atoms[3] + d.atoms[4]), atol=1e-15)
    elem, val = finite_argmax(f, d)
    assert d.labels[elem.index] == "x3" and val == 0.5


@pytest.mark.parametrize("eps,delta", [(0.05, 0.05 / math.sqrt(8)), (0.05, 0.02), (0.5, 0.1),
                                       (0.0, 0.01), (0.1, 0.0)])
def test_counterexample_rejects_bad_parameters(eps, delta):
    with pytest.raises(ParameterError):
        build_counterexample_dictionary(eps, delta)
