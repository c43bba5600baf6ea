"""Distance matrices, separation measures and pseudo-centroids.

Everything downstream works on a dense ``n x n`` table of pairwise
distances.  The table does not have to be a metric: negative and asymmetric
entries are accepted, and every formula reads ``d[i, j]`` with the first
index being the point the quantity is "about" (the centroid when measuring a
cluster, the candidate when measuring a seed).
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from ._errors import (
    DimensionMismatchError,
    EmptyClusterError,
    EmptyInputError,
    NegativeEntryWithWeightingError,
    NonFiniteEntryError,
    NonSquareError,
    NonZeroDiagonalError,
    PointNotInClusterError,
    TooFewPointsError,
)

__all__ = [
    "DistanceMatrix",
    "SeparationMeasure",
    "CentroidResult",
    "NeighborOrder",
    "MINMAX",
    "MINSUM",
    "build_matrix",
    "from_points",
    "apply_weight",
    "separate",
    "separation_values",
    "pseudo_centroid",
    "neighbor_order",
]

MeasureKind = Literal["minmax", "minsum"]

_METRICS = {
    "euclidean": "euclidean",
    "squared_euclidean": "sqeuclidean",
    "manhattan": "cityblock",
}


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Validated, read-only ``n x n`` distance table.

    Use :func:`build_matrix` or :func:`from_points` rather than the
    constructor; they perform the validation.
    """

    d: np.ndarray
    symmetric: bool

    @property
    def n(self) -> int:
        return self.d.shape[0]

    @property
    def is_exact(self) -> bool:
        """True when entries are arbitrary-precision Python ints."""
        return self.d.dtype == object

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"DistanceMatrix(n={self.n}, symmetric={self.symmetric}, dtype={self.d.dtype})"


@dataclass(frozen=True)
class SeparationMeasure:
    """How a point's separation from the rest of its cluster is scored.

    ``kind="minmax"`` takes the largest distance, ``kind="minsum"`` the sum.
    ``p`` is the MinSum weight exponent: distances are replaced by
    ``d ** (p + 1)`` (see :func:`apply_weight`).  ``p = 0`` is unweighted.
    """

    kind: MeasureKind = "minmax"
    p: float = 0.0

    def __post_init__(self):
        if self.kind not in ("minmax", "minsum"):
            raise ValueError(f"unknown separation measure {self.kind!r}")
        if self.p < 0:
            raise ValueError("weight exponent p must be >= 0")
        if self.p and self.kind != "minsum":
            raise ValueError("weight exponent only applies to the minsum measure")

    @property
    def unweighted(self) -> "SeparationMeasure":
        return SeparationMeasure(self.kind)

    def prepare(self, m: DistanceMatrix) -> tuple[DistanceMatrix, "SeparationMeasure"]:
        """Fold the weight into the matrix.

        Returns the matrix the algorithms should run on and the equivalent
        unweighted measure.
        """
        if not self.p:
            return m, self
        return apply_weight(m, self.p), self.unweighted


MINMAX = SeparationMeasure("minmax")
MINSUM = SeparationMeasure("minsum")


@dataclass(frozen=True)
class CentroidResult:
    centroid: int
    span: float
    all_centroids: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class NeighborOrder:
    """Per-point ascending ordering of every other point.

    ``order[i]`` lists the ``n - 1`` indices ``j != i`` by ascending
    ``d[i, j]`` (ties by ascending ``j``); ``dist[i]`` holds the matching
    distances.
    """

    order: np.ndarray
    dist: np.ndarray

    @property
    def n(self) -> int:
        return self.order.shape[0]


def _is_int_like(arr: np.ndarray) -> bool:
    if arr.dtype == object:
        return all(isinstance(v, numbers.Integral) for v in arr.flat)
    return np.issubdtype(arr.dtype, np.integer)


def _max_asymmetry_exceeds(d: np.ndarray, tol: float, block: int = 1024) -> bool:
    n = d.shape[0]
    for start in range(0, n, block):
        stop = min(n, start + block)
        diff = np.abs(d[start:stop, :] - d[:, start:stop].T)
        if np.any(diff > tol):
            return True
    return False


def build_matrix(entries, sym_tol: float = 1e-9) -> DistanceMatrix:
    """Validate a square table and wrap it as a :class:`DistanceMatrix`.

    Parameters
    ----------
    entries : array-like of shape (n, n)
        Pairwise distances. Integer input keeps its integer dtype; a numpy
        ``object`` array of Python ints is kept as-is (exact arithmetic).
    sym_tol : float, default=1e-9
        Symmetry tolerance relative to the largest absolute entry. The result
        records whether the table is symmetric within it; asymmetric tables
        are still accepted.
    """
    d = entries.d if isinstance(entries, DistanceMatrix) else entries
    if isinstance(d, np.ndarray) and d.dtype == object:
        arr = d.copy()
    else:
        arr = np.array(d)
        if arr.dtype == object or arr.dtype.kind not in "iuf":
            try:
                arr = arr.astype(float)
            except (TypeError, ValueError) as exc:
                raise NonFiniteEntryError(f"non-numeric distance entry: {exc}") from None
        if arr.dtype.kind == "u":
            arr = arr.astype(np.int64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NonSquareError(f"distance table must be square, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyInputError("distance table is empty")
    if arr.dtype != object and arr.dtype.kind == "f" and not np.all(np.isfinite(arr)):
        raise NonFiniteEntryError("distance table contains NaN or infinite entries")
    diag = np.diagonal(arr)
    if any(v != 0 for v in diag):
        bad = next(i for i, v in enumerate(diag) if v != 0)
        raise NonZeroDiagonalError(f"d({bad},{bad}) = {diag[bad]!r}, expected 0")

    if arr.dtype == object:
        # exact values: compare exactly (float() may overflow on big ints)
        symmetric = bool(np.all(arr == arr.T))
    else:
        scale = float(np.max(np.abs(arr)))
        symmetric = not _max_asymmetry_exceeds(arr, sym_tol * scale)
    arr.setflags(write=False)
    return DistanceMatrix(arr, symmetric)


def from_points(points, metric: str = "euclidean", dtype=np.float64) -> DistanceMatrix:
    """Pairwise distances between coordinate vectors.

    ``metric`` is one of ``euclidean``, ``squared_euclidean`` or ``manhattan``.
    """
    if metric not in _METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {sorted(_METRICS)}")
    if points is None or len(points) == 0:
        raise EmptyInputError("no points given")
    try:
        x = np.asarray(points, dtype=float)
    except ValueError:
        raise DimensionMismatchError("points do not all have the same dimension") from None
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[1] == 0:
        raise DimensionMismatchError(f"points must form an (n, dim>=1) array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteEntryError("points contain NaN or infinite coordinates")
    d = cdist(x, x, metric=_METRICS[metric]).astype(dtype, copy=False)
    np.fill_diagonal(d, 0)
    d.setflags(write=False)
    # symmetric by construction; skip the O(n^2) check
    return DistanceMatrix(d, True)


def _power(d: np.ndarray, p: float) -> np.ndarray:
    """``d ** (p + 1)``; exact for integer values and integer ``p``."""
    if float(p).is_integer() and _is_int_like(d):
        e = int(p) + 1
        out = np.empty(d.shape, dtype=object)
        out.reshape(-1)[:] = [int(v) ** e for v in d.flat]
        return out
    return np.power(d.astype(float), float(p) + 1.0)


def apply_weight(m: DistanceMatrix, p: float) -> DistanceMatrix:
    """Weight each distance by ``d ** p``, i.e. return ``d ** (p + 1)``.

    The transform is monotone on non-negative values, so every row keeps its
    ordering.  Integer tables with an integer ``p`` are raised exactly using
    Python ints (the result has ``object`` dtype); anything else uses floats.
    """
    if p < 0:
        raise ValueError("weight exponent p must be >= 0")
    if p == 0:
        return m
    d = m.d
    if d.size and min(d.flat if d.dtype == object else [d.min()]) < 0:
        raise NegativeEntryWithWeightingError("weighting requires non-negative distances")
    out = _power(d, p)
    out.setflags(write=False)
    return DistanceMatrix(out, m.symmetric)


def _members(C: Iterable[int]) -> np.ndarray:
    idx = np.fromiter((int(c) for c in C), dtype=np.intp)
    return idx


def separation_values(measure: SeparationMeasure, C: Sequence[int], m: DistanceMatrix) -> np.ndarray:
    """``Separate(i: C)`` for every ``i`` in ``C`` (in the order given)."""
    idx = _members(C)
    k = idx.size
    if k == 0:
        raise EmptyClusterError("cluster is empty")
    if k == 1:
        return np.zeros(1, dtype=m.d.dtype)
    sub = m.d[np.ix_(idx, idx)]
    if measure.p:
        sub = _power(sub, measure.p)
    if measure.kind == "minsum":
        # diagonal is zero, so the plain row sum is the sum over C \ {i}
        return sub.sum(axis=1)
    if sub.dtype == object:
        return np.array([max(v for jj, v in enumerate(row) if jj != ii) for ii, row in enumerate(sub)], dtype=object)
    masked = sub.astype(float, copy=True) if sub.dtype.kind != "f" else sub.copy()
    np.fill_diagonal(masked, -np.inf)
    out = masked.max(axis=1)
    return out.astype(sub.dtype) if sub.dtype.kind in "iu" else out


def separate(measure: SeparationMeasure, i: int, C: Iterable[int], m: DistanceMatrix):
    """``Separate(i: C)``: max or sum of ``d[i, j]`` over ``j`` in ``C \\ {i}``.

    A singleton cluster separates by 0.
    """
    members = list(C)
    if i not in members:
        raise PointNotInClusterError(f"point {i} is not in the cluster")
    others = np.array([j for j in members if j != i], dtype=np.intp)
    if others.size == 0:
        return m.d.dtype.type(0) if m.d.dtype != object else 0
    row = m.d[i, others]
    if measure.p:
        row = _power(row, measure.p)
    return row.max() if measure.kind == "minmax" else row.sum()


def pseudo_centroid(measure: SeparationMeasure, C: Iterable[int], m: DistanceMatrix) -> CentroidResult:
    """Member of ``C`` with the smallest separation.

    Ties go to the lowest index; ``all_centroids`` keeps every minimiser.
    """
    members = sorted(int(c) for c in C)
    if not members:
        raise EmptyClusterError("cannot take the pseudo-centroid of an empty cluster")
    vals = separation_values(measure, members, m)
    best = min(vals)
    tied = tuple(members[t] for t in range(len(members)) if vals[t] == best)
    span = best.item() if hasattr(best, "item") else best
    return CentroidResult(tied[0], span, tied)


def neighbor_order(m: DistanceMatrix) -> NeighborOrder:
    """Sort every row ascending, leaving out the point itself.

    Equal distances keep ascending index order (stable sort).  Cost is
    O(n^2 log n); it is computed once and reused by all intensity-based
    starts and for every k.
    """
    n = m.n
    if n < 2:
        raise TooFewPointsError("neighbor ordering needs at least two points")
    d = m.d
    full = np.argsort(d, axis=1, kind="stable")
    keep = full != np.arange(n)[:, None]
    order = full[keep].reshape(n, n - 1)
    dist = np.take_along_axis(d, order, axis=1)
    order.setflags(write=False)
    dist.setflags(write=False)
    return NeighborOrder(order, dist)
