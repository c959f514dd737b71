"""Ambient Hilbert spaces and incremental orthonormalization.

Two concrete spaces are used by the experiments:

* the empirical L2 space over a fixed set of sample points, with
  ``<u, v> = (1/N) sum_i u(x_i) v(x_i)``, and
* Euclidean / l2 sequence space with the plain dot product.

Dense vectors are 1-d float arrays.  Sequence-space vectors with finite
support can also be held as a :class:`SparseVector`; they embed exactly into a
dense array once an index bound is fixed.

All reductions go through :func:`_dot`, which uses numpy's pairwise summation
rather than BLAS so results do not depend on the BLAS thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NumericError, ResidualTooLargeError

DROP_TOLERANCE = 1e-10


def rng_streams(seed: int, n_streams: int = 2) -> list[np.random.Generator]:
    """Independent PCG64 generators spawned from one 64-bit seed.

    Stream 0 draws sample points, stream 1 draws noise, so adding noise never
    perturbs the sample set.
    """
    seq = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF)
    return [np.random.Generator(np.random.PCG64(s)) for s in seq.spawn(n_streams)]


@dataclass(frozen=True)
class SampleSet:
    """N distinct points in [0, 1]^d carrying the empirical inner product."""

    points: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise DimensionError("points must be a non-empty (N, d) array")
        if not np.all(np.isfinite(pts)):
            raise NumericError("sample points must be finite")
        if pts.min() < 0.0 or pts.max() > 1.0:
            raise ValueError("sample points must lie in [0, 1]^d")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("sample points must be pairwise distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, n: int, seed: int, dim: int = 2,
                rng: np.random.Generator | None = None) -> "SampleSet":
        """Draw ``n`` i.i.d. uniform points; bitwise duplicates are redrawn."""
        if n < 1:
            raise ValueError("need at least one sample point")
        if rng is None:
            rng = rng_streams(seed)[0]
        pts = rng.random((n, dim))
        while True:
            _, first = np.unique(pts, axis=0, return_index=True)
            dup = np.setdiff1d(np.arange(n), first)
            if dup.size == 0:
                break
            pts[dup] = rng.random((dup.size, dim))
        return cls(pts, seed)

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def evaluate(self, func) -> np.ndarray:
        """Values of ``func(x, y, ...)`` at the sample points."""
        return np.asarray(func(*self.points.T), dtype=float)


def _dot(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.add.reduce(u * v))


def _combine(coef: np.ndarray, rows: np.ndarray) -> np.ndarray:
    return np.add.reduce(coef[:, None] * rows, axis=0)


def _check_finite(v):
    if not np.all(np.isfinite(v)):
        raise NumericError("vector contains non-finite values")


class InnerProductSpace:
    """Dense real vectors of fixed length with ``<u, v> = weight * u.v``."""

    def __init__(self, dim: int, weight: float = 1.0):
        self.dim = int(dim)
        self.weight = float(weight)

    def _check(self, u):
        if u.shape != (self.dim,):
            raise DimensionError(f"expected a vector of length {self.dim}, got shape {u.shape}")

    def inner(self, u, v) -> float:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        self._check(u)
        self._check(v)
        return self.weight * _dot(u, v)

    def norm(self, u) -> float:
        return math.sqrt(max(self.inner(u, u), 0.0))

    def inner_rows(self, rows: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Inner products of every row of ``rows`` with ``v``."""
        if rows.shape[0] == 0:
            return np.zeros(0)
        return self.weight * np.add.reduce(rows * v, axis=1)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.dim)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class EuclideanSpace(InnerProductSpace):
    """R^n, or l2 truncated to indices 1..n (coordinate k-1 holds e_k)."""

    def __init__(self, dim: int):
        super().__init__(dim, 1.0)


class EmpiricalSpace(InnerProductSpace):
    """Functions on a :class:`SampleSet` with the empirical L2 product."""

    def __init__(self, samples: SampleSet):
        super().__init__(samples.count, 1.0 / samples.count)
        self.samples = samples


def empirical_inner_product(u, v, samples: SampleSet) -> float:
    """``(1/N) sum_i u_i v_i`` over the sample points."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    n = samples.count
    if u.shape != (n,) or v.shape != (n,):
        raise DimensionError(
            f"vectors of shape {u.shape} and {v.shape} do not match {n} sample points")
    return _dot(u, v) / n


@dataclass(frozen=True)
class SparseVector:
    """Finitely supported element of l2, stored as sorted index -> value.

    Indices are 1-based, matching the canonical basis e_1, e_2, ...
    """

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        val = np.asarray(self.values, dtype=float).ravel()
        if idx.shape != val.shape:
            raise DimensionError("indices and values differ in length")
        if idx.size and idx.min() < 1:
            raise ValueError("sequence indices must be positive")
        order = np.argsort(idx, kind="stable")
        idx, val = idx[order], val[order]
        if np.any(np.diff(idx) == 0):
            raise ValueError("duplicate sequence index")
        keep = val != 0.0
        idx, val = idx[keep], val[keep]
        idx.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def from_dict(cls, mapping: dict) -> "SparseVector":
        items = sorted(mapping.items())
        return cls([k for k, _ in items], [v for _, v in items])

    @classmethod
    def from_dense(cls, dense) -> "SparseVector":
        dense = np.asarray(dense, dtype=float)
        nz = np.flatnonzero(dense)
        return cls(nz + 1, dense[nz])

    def to_dict(self) -> dict:
        return {int(k): float(v) for k, v in zip(self.indices, self.values)}

    @property
    def support_bound(self) -> int:
        return int(self.indices[-1]) if self.indices.size else 0

    def to_dense(self, length: int | None = None) -> np.ndarray:
        if length is None:
            length = self.support_bound
        if self.support_bound > length:
            raise DimensionError(f"support reaches index {self.support_bound} > {length}")
        out = np.zeros(length)
        out[self.indices - 1] = self.values
        return out


def sequence_inner_product(u: SparseVector, v: SparseVector) -> float:
    """l2 inner product of two finitely supported sequences."""
    common, iu, iv = np.intersect1d(u.indices, v.indices, assume_unique=True,
                                    return_indices=True)
    if common.size == 0:
        return 0.0
    return _dot(u.values[iu], v.values[iv])


@dataclass
class ExtendResult:
    accepted: bool
    component_norm: float


@dataclass
class ExpansionCoefficients:
    """Coefficients of a vector in terms of the originally selected atoms."""

    coefficients: np.ndarray
    l1: float
    residual_norm: float


@dataclass
class OrthoBasis:
    """Orthonormal basis of span(g_1, ..., g_k) built by Gram-Schmidt.

    ``r[:, j]`` holds the expansion of atom ``g_j`` over ``q_0..q_j``, so
    ``atoms.T == q.T @ r`` and the diagonal of ``r`` stores
    ``||(I - P_{j-1}) g_j||``.
    """

    space: InnerProductSpace
    drop_tolerance: float = DROP_TOLERANCE
    q: np.ndarray = field(init=False)
    r: np.ndarray = field(init=False)
    atoms: np.ndarray = field(init=False)

    def __post_init__(self):
        self.q = np.zeros((0, self.space.dim))
        self.atoms = np.zeros((0, self.space.dim))
        self.r = np.zeros((0, 0))

    def __len__(self):
        return self.q.shape[0]

    def extend(self, g) -> ExtendResult:
        """Classical Gram-Schmidt with one reorthogonalization pass."""
        g = np.asarray(g, dtype=float)
        self.space._check(g)
        _check_finite(g)
        c1 = self.space.inner_rows(self.q, g)
        v = g - _combine(c1, self.q) if len(self) else g.copy()
        c2 = self.space.inner_rows(self.q, v)
        if len(self):
            v = v - _combine(c2, self.q)
        coef = c1 + c2
        nrm = self.space.norm(v)
        if not nrm > self.drop_tolerance:
            return ExtendResult(False, nrm)
        k = len(self)
        r = np.zeros((k + 1, k + 1))
        r[:k, :k] = self.r
        r[:k, k] = coef
        r[k, k] = nrm
        self.r = r
        self.q = np.vstack([self.q, v / nrm])
        self.atoms = np.vstack([self.atoms, g])
        return ExtendResult(True, nrm)

    def gram_error(self) -> float:
        """max |<q_i, q_j> - delta_ij| over the retained vectors."""
        if not len(self):
            return 0.0
        k = len(self)
        gram = np.array([self.space.inner_rows(self.q, self.q[i]) for i in range(k)])
        return float(np.abs(gram - np.eye(k)).max())


def orthonormal_extend(basis: OrthoBasis, g) -> ExtendResult:
    """Append the normalized component of ``g`` orthogonal to ``basis``.

    The atom is rejected (basis unchanged) when that component's norm does not
    exceed ``basis.drop_tolerance``.
    """
    return basis.extend(g)


def project_and_residual(basis: OrthoBasis, f) -> tuple[np.ndarray, np.ndarray]:
    f = np.asarray(f, dtype=float)
    basis.space._check(f)
    if not len(basis):
        return basis.space.zeros(), f.copy()
    coef = basis.space.inner_rows(basis.q, f)
    proj = _combine(coef, basis.q)
    return proj, f - proj


def coefficients_wrt_atoms(basis: OrthoBasis, f, tol: float = 1e-8) -> ExpansionCoefficients:
    """Solve ``sum_k a_k g_k = f`` for ``f`` in the span of the basis atoms.

    Uses back-substitution on the upper-triangular Gram-Schmidt record.
    Raises :class:`ResidualTooLargeError` when ``f`` is farther than ``tol``
    from the span.
    """
    proj, res = project_and_residual(basis, f)
    rn = basis.space.norm(res)
    if rn > tol:
        raise ResidualTooLargeError(f"vector lies {rn:.3e} from the span of the atoms", rn)
    k = len(basis)
    if k == 0:
        return ExpansionCoefficients(np.zeros(0), 0.0, rn)
    rhs = basis.space.inner_rows(basis.q, np.asarray(f, dtype=float))
    a = np.zeros(k)
    for i in range(k - 1, -1, -1):
        a[i] = (rhs[i] - _dot(basis.r[i, i + 1:], a[i + 1:])) / basis.r[i, i]
    return ExpansionCoefficients(a, math.fsum(np.abs(a)), rn)
