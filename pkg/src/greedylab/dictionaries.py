"""Dictionaries and their argmax-correlation oracles.

Every dictionary exposes the same small surface used by the greedy driver:

``space``
    the :class:`~greedylab.hilbert.InnerProductSpace` its atoms live in,
``argmax(r)``
    the atom maximizing ``|<g, r>|`` together with that value,
``atom(element)``
    the realized vector of a :class:`DictionaryElement`.

The Heaviside ridge dictionary on a 2-d sample set is the interesting one:
its argmax is a combinatorial search over all halfplane splittings of the
sample points, solved exactly by a rotating-line sweep around each point.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .hilbert import EmpiricalSpace, EuclideanSpace, InnerProductSpace, SampleSet, SparseVector

RIDGE = "ridge2d"
SEQUENCE = "sequence"
FINITE = "finite"

NORM_SLACK = 1e-9


@dataclass(frozen=True)
class DictionaryElement:
    """Parametrization of one atom.

    ridge2d atoms carry ``direction``/``offset`` of the closed halfplane
    ``direction . x + offset >= 0`` and the sorted sample indices it captures;
    sequence atoms carry the 1-based index ``k``; finite atoms the position in
    the atom list.
    """

    kind: str
    index: int | None = None
    direction: tuple[float, float] | None = None
    offset: float | None = None
    captured: tuple[int, ...] = ()

    @classmethod
    def ridge(cls, direction, offset, captured) -> "DictionaryElement":
        return cls(RIDGE, None, (float(direction[0]), float(direction[1])), float(offset),
                   tuple(int(i) for i in captured))


def halfplane_capture(points: np.ndarray, direction, offset) -> np.ndarray:
    """Sorted indices ``i`` with ``direction . x_i + offset >= 0``."""
    w0, w1 = float(direction[0]), float(direction[1])
    return np.flatnonzero(points[:, 0] * w0 + points[:, 1] * w1 + offset >= 0.0)


def split_value(r: np.ndarray, captured) -> float:
    """Exact ``(1/N)|sum_{i in captured} r_i|`` (correctly rounded sum)."""
    idx = np.sort(np.asarray(captured, dtype=np.int64))
    return abs(math.fsum(r[idx])) / r.shape[0]


# ---------------------------------------------------------------------------
# Heaviside ridge atoms on a planar sample set


class _SweepBlock:
    """Angular event order for a contiguous block of pivot points.

    For pivot p the other points are sorted by the angle psi in [0, pi) of the
    line through p and q, ties by distance.  ``upper`` marks points whose
    direction from p is psi itself (rather than psi + pi).  A directed line
    through p at angle theta has on its left exactly the upper points with
    psi > theta and the lower points with psi < theta, so sweeping theta
    from 0 to pi removes upper points and adds lower points one event at a
    time.  ``end`` marks the last event of each group of collinear points;
    only window sums after complete groups are realizable splittings.
    """

    def __init__(self, points: np.ndarray, pivots: np.ndarray):
        n = points.shape[0]
        m = n - 1
        cols = np.arange(m)[None, :]
        nbr = cols + (cols >= pivots[:, None])
        d = points[nbr] - points[pivots][:, None, :]
        dx, dy = d[..., 0], d[..., 1]
        upper = (dy > 0) | ((dy == 0) & (dx > 0))
        ux = np.where(upper, dx, -dx)
        uy = np.where(upper, dy, -dy)
        psi = np.arctan2(uy, ux)
        order = np.lexsort((dx * dx + dy * dy, psi), axis=-1)
        take = lambda a: np.take_along_axis(a, order, axis=1)  # noqa: E731
        psi, ux, uy = take(psi), take(ux), take(uy)
        tie = (psi[:, :-1] == psi[:, 1:]) | (ux[:, :-1] * uy[:, 1:] - uy[:, :-1] * ux[:, 1:] == 0)
        end = np.ones_like(upper)
        end[:, :-1] = ~tie
        self.pivots = pivots
        self.nbr = take(nbr).astype(np.intp)
        # +1 for an event that adds its point to the window, -1 for removal
        self.step_sign = np.where(take(upper), -1, 1).astype(np.int8)
        # position 0 (before any event) is always a valid window
        self.valid = np.concatenate([np.ones((len(pivots), 1), dtype=bool), end], axis=1)
        self.all_valid = bool(self.valid.all())

    def best(self, r: np.ndarray, total: float):
        """Per-pivot best position for each of the four split variants.

        Variants, in canonical order: window, window + pivot, complement,
        complement + pivot.  Returns ``(values, positions)`` of shape
        ``(len(pivots), 4)`` holding approximate ``|sum r|`` values.
        """
        rp = r[self.pivots]
        rest = total - rp
        w = np.empty((len(self.pivots), self.nbr.shape[1] + 1))
        w[:, 0] = 0.0
        np.multiply(r[self.nbr], self.step_sign, out=w[:, 1:])
        np.cumsum(w[:, 1:], axis=1, out=w[:, 1:])
        # after all events the window holds exactly the lower points, so the
        # initial (upper) sum is (rest - net change) / 2
        w += (0.5 * (rest - w[:, -1]))[:, None]
        if self.all_valid:
            i_hi = w.argmax(axis=1)
            i_lo = w.argmin(axis=1)
        else:
            i_hi = np.where(self.valid, w, -np.inf).argmax(axis=1)
            i_lo = np.where(self.valid, w, np.inf).argmin(axis=1)
        rows = np.arange(len(self.pivots))
        w_hi = w[rows, i_hi]
        w_lo = w[rows, i_lo]
        # variant v evaluates |sign * W + shift|
        sign = np.array([1.0, 1.0, -1.0, -1.0])
        shift = np.stack([np.zeros_like(rp), rp, rest, rest + rp], axis=1)
        a = np.abs(sign * w_hi[:, None] + shift)
        b = np.abs(sign * w_lo[:, None] + shift)
        pos_hi = np.broadcast_to(i_hi[:, None], a.shape)
        pos_lo = np.broadcast_to(i_lo[:, None], b.shape)
        take_lo = (b > a) | ((b == a) & (pos_lo < pos_hi))
        return np.where(take_lo, b, a), np.where(take_lo, pos_lo, pos_hi)


class RidgeDictionary:
    """Heaviside ridge atoms ``x -> 1[w . x + b >= 0]`` on a planar sample set.

    The atom with ``w = 0, b >= 0`` is the constant function.  Sweep tables
    cost O(N^2 log N) once; each :meth:`argmax` afterwards is O(N^2).
    ``threads`` only changes how pivot blocks are scheduled; the result is
    identical for any value.
    """

    kind = RIDGE

    def __init__(self, samples: SampleSet, threads: int = 1, block_size: int = 256,
                 refine: int = 16):
        if samples.dim != 2:
            raise DimensionError("ridge2d dictionary needs planar sample points")
        self.samples = samples
        self.space = EmpiricalSpace(samples)
        self.points = samples.points
        self.threads = max(1, int(threads))
        self.block_size = int(block_size)
        self.refine = int(refine)
        self._blocks = None

    @property
    def blocks(self) -> list[_SweepBlock]:
        if self._blocks is None:
            n = self.points.shape[0]
            starts = range(0, n if n > 1 else 0, self.block_size)
            chunks = [np.arange(s, min(s + self.block_size, n)) for s in starts]
            self._blocks = self._map(lambda c: _SweepBlock(self.points, c), chunks)
        return self._blocks

    def _map(self, fn, items):
        if self.threads == 1 or len(items) < 2:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(self.threads) as pool:
            return list(pool.map(fn, items))

    def atom(self, element: DictionaryElement) -> np.ndarray:
        g = np.zeros(self.points.shape[0])
        g[list(element.captured)] = 1.0
        return g

    def argmax(self, r) -> tuple[DictionaryElement, float]:
        r = np.asarray(r, dtype=float)
        n = self.points.shape[0]
        if r.shape != (n,):
            raise DimensionError(f"residual has shape {r.shape}, expected ({n},)")
        total = float(r.sum())
        results = self._map(lambda b: b.best(r, total), self.blocks)
        # canonical candidate order: constant atom, sweep (pivot, variant), empty set
        cand_vals = [np.array([abs(total)])]
        cand_keys = [None]
        for blk, (vals, pos) in zip(self.blocks, results):
            cand_vals.append(vals.ravel())
            cand_keys.append((blk, pos))
        approx = np.concatenate(cand_vals)
        top = approx.max()
        tol = 1e-9 * (float(np.abs(r).sum()) + 1e-300)
        near = np.flatnonzero(approx >= top - tol)[: self.refine]

        best_elem, best_val = None, -1.0
        for flat in near:
            elem = self._realize(flat, cand_keys)
            val = split_value(r, elem.captured)
            if val > best_val:
                best_elem, best_val = elem, val
        empty = DictionaryElement.ridge((0.0, 0.0), -1.0, ())
        if best_val < 0.0:
            return empty, 0.0
        return best_elem, best_val

    def _realize(self, flat: int, keys) -> DictionaryElement:
        if flat == 0:
            return DictionaryElement.ridge((0.0, 0.0), 0.0, range(self.points.shape[0]))
        flat -= 1
        for key in keys[1:]:
            blk, pos = key
            size = pos.size
            if flat < size:
                row, variant = divmod(flat, 4)
                return self.split_element(int(blk.pivots[row]), variant, int(pos[row, variant]))
            flat -= size
        raise IndexError(flat)

    def split_element(self, pivot: int, variant: int, position: int) -> DictionaryElement:
        """Halfplane realizing one sweep candidate.

        The directed line through the pivot is rotated to the middle of the
        angular gap after ``position`` events, then shifted by half the
        smallest distance of any other point so the pivot falls on the
        requested side.
        """
        pts = self.points
        p = pts[pivot]
        others = np.delete(np.arange(pts.shape[0]), pivot)
        d = pts[others] - p
        upper = (d[:, 1] > 0) | ((d[:, 1] == 0) & (d[:, 0] > 0))
        u = np.where(upper[:, None], d, -d)
        psi = np.arctan2(u[:, 1], u[:, 0])
        psi = psi[np.lexsort((d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1], psi))]
        m = psi.size
        lo = psi[position - 1] if position >= 1 else psi[m - 1] - math.pi
        hi = psi[position] if position < m else psi[0] + math.pi
        theta = 0.5 * (lo + hi)
        sign = 1.0 if variant < 2 else -1.0
        w = sign * np.array([-math.sin(theta), math.cos(theta)])
        base = -(p[0] * w[0] + p[1] * w[1])
        dist = np.abs(pts[others, 0] * w[0] + pts[others, 1] * w[1] + base)
        margin = 0.5 * float(dist.min())
        offset = base + margin if variant in (1, 3) else base - margin
        return DictionaryElement.ridge(w, offset, halfplane_capture(pts, w, offset))


def ridge2d_argmax(r, samples: SampleSet, threads: int = 1) -> tuple[DictionaryElement, float]:
    """Exact maximizer of ``|<1[w.x + b >= 0], r>|`` over all planar halfplanes."""
    return RidgeDictionary(samples, threads=threads).argmax(r)


# ---------------------------------------------------------------------------
# l2 sequence dictionary {k^-alpha e_k}


class SequenceDictionary:
    """Atoms ``k^-alpha e_k`` for ``k = 1..k_max`` in truncated l2."""

    kind = SEQUENCE

    def __init__(self, alpha: float, k_max: int):
        if not alpha > 0:
            raise ParameterError("alpha must be positive")
        if k_max < 1:
            raise ParameterError("k_max must be at least 1")
        self.alpha = float(alpha)
        self.k_max = int(k_max)
        self.space = EuclideanSpace(self.k_max)
        self.scale = np.arange(1, self.k_max + 1, dtype=float) ** -self.alpha

    def atom(self, element: DictionaryElement) -> np.ndarray:
        g = np.zeros(self.k_max)
        g[element.index - 1] = self.scale[element.index - 1]
        return g

    def argmax(self, r) -> tuple[DictionaryElement, float]:
        if isinstance(r, SparseVector):
            r = r.to_dense(self.k_max)
        r = np.asarray(r, dtype=float)
        if r.shape != (self.k_max,):
            raise DimensionError(f"residual has shape {r.shape}, expected ({self.k_max},)")
        corr = self.scale * np.abs(r)
        k = int(np.argmax(corr))
        return DictionaryElement(SEQUENCE, k + 1), float(corr[k])


def sequence_argmax(r, alpha: float, k_max: int | None = None) -> tuple[DictionaryElement, float]:
    """Index ``k`` maximizing ``k^-alpha |r_k|``; smallest ``k`` on ties."""
    if isinstance(r, SparseVector):
        if k_max is None:
            k_max = r.support_bound
        if r.indices.size == 0:
            return DictionaryElement(SEQUENCE, 1), 0.0
        r = r.to_dense(k_max)
    r = np.asarray(r, dtype=float)
    if k_max is None:
        k_max = r.shape[0]
    if k_max < 1:
        return DictionaryElement(SEQUENCE, 1), 0.0
    return SequenceDictionary(alpha, k_max).argmax(r[:k_max])


def sequence_target(alpha: float, n_terms: int) -> np.ndarray:
    """``(1/N) sum_{k<=N} k^-alpha e_k`` as a dense vector of length N."""
    return np.arange(1, n_terms + 1, dtype=float) ** -alpha / n_terms


# ---------------------------------------------------------------------------
# finite dictionaries


class FiniteDictionary:
    """An explicit list of unit-norm atoms."""

    kind = FINITE

    def __init__(self, atoms, labels=None, space: InnerProductSpace | None = None):
        atoms = np.array(atoms, dtype=float, ndmin=2)
        if atoms.shape[0] < 1:
            raise ParameterError("a finite dictionary needs at least one atom")
        self.space = space if space is not None else EuclideanSpace(atoms.shape[1])
        if atoms.shape[1] != self.space.dim:
            raise DimensionError("atom length does not match the space")
        norms = np.array([self.space.norm(a) for a in atoms])
        if np.any(np.abs(norms - 1.0) > NORM_SLACK):
            raise ParameterError(f"atoms must have unit norm, got norms {norms}")
        atoms.setflags(write=False)
        self.atoms = atoms
        self.labels = list(labels) if labels is not None else [f"g{i + 1}" for i in range(len(atoms))]

    def __len__(self):
        return self.atoms.shape[0]

    def atom(self, element: DictionaryElement) -> np.ndarray:
        return self.atoms[element.index]

    def correlations(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        self.space._check(r)
        return self.space.inner_rows(self.atoms, r)

    def argmax(self, r) -> tuple[DictionaryElement, float]:
        corr = np.abs(self.correlations(r))
        i = int(np.argmax(corr))
        return DictionaryElement(FINITE, i), float(corr[i])


def finite_argmax(r, dictionary: FiniteDictionary) -> tuple[DictionaryElement, float]:
    return dictionary.argmax(r)


def build_counterexample_dictionary(epsilon: float, delta: float):
    """Five unit atoms in R^5 and a target ``f = (x4 + x5)/2``.

    ::

        x1 = eps e1 - sqrt(1 - eps^2) e2
        x2 = eps e2 + sqrt(1 - eps^2) e3
        x3 = e3
        x4 = eps/4 (e1 + e2) + e3/2 + c e4 + delta e5
        x5 = eps/4 (e1 + e2) + e3/2 - c e4 + delta e5

    with ``c`` fixed by ``||x4|| = 1``.  Requires ``0 < eps < 1/2`` and
    ``0 < delta < eps / sqrt(8)``.
    """
    eps, dlt = float(epsilon), float(delta)
    if not 0.0 < eps < 0.5:
        raise ParameterError(f"epsilon must lie in (0, 1/2), got {eps}")
    if not 0.0 < dlt < eps / math.sqrt(8.0):
        raise ParameterError(f"delta must lie in (0, epsilon/sqrt(8)), got {dlt}")
    c2 = 1.0 - eps * eps / 8.0 - 0.25 - dlt * dlt
    if not c2 > 0.0:
        raise ParameterError("no real c makes the atoms unit norm")
    c = math.sqrt(c2)
    s = math.sqrt(1.0 - eps * eps)
    q = eps / 4.0
    atoms = np.array([
        [eps, -s, 0.0, 0.0, 0.0],
        [0.0, eps, s, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0, 0.0],
        [q, q, 0.5, c, dlt],
        [q, q, 0.5, -c, dlt],
    ])
    f = np.array([q, q, 0.5, 0.0, dlt])
    return FiniteDictionary(atoms, labels=["x1", "x2", "x3", "x4", "x5"]), f
