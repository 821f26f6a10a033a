"""Data containers, z-score normalization, and the condensed distance matrix."""
from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels


class ClusteringError(Exception):
    """Base class for all errors raised by this package."""


class TooFewPoints(ClusteringError):
    """An operation needed at least two points."""


class ZeroVariance(ClusteringError):
    """A descriptor column is constant and cannot be standardized."""

    def __init__(self, column: int, name: str | None = None):
        self.column = column
        self.name = name
        shown = f"{name!r} (index {column})" if name else f"index {column}"
        super().__init__(f"column {shown} has zero variance")


class DimensionMismatch(ClusteringError):
    """Two coordinate vectors have different lengths."""


class SdMode(str, enum.Enum):
    """Standard-deviation convention for z-scoring."""

    SAMPLE = "sample"  # divide by n - 1
    POPULATION = "population"  # divide by n


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Dataset:
    """Labeled n×p table of finite real descriptor values."""

    labels: tuple[str, ...]
    values: np.ndarray
    column_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "column_names", tuple(self.column_names))
        object.__setattr__(self, "values", _readonly(np.atleast_2d(self.values)))
        n, p = self.values.shape
        if n < 1 or p < 1:
            raise ValueError("dataset must have at least one row and one column")
        if len(self.labels) != n:
            raise ValueError(f"{len(self.labels)} labels for {n} rows")
        if len(self.column_names) != p:
            raise ValueError(f"{len(self.column_names)} column names for {p} columns")
        if any(not lab for lab in self.labels):
            raise ValueError("labels must be non-empty")
        if len(set(self.labels)) != n:
            raise ValueError("labels must be unique")
        if not np.isfinite(self.values).all():
            raise ValueError("descriptor values must be finite")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def content_hash(self) -> str:
        """SHA-256 of the canonical table serialization (provenance key)."""
        from .io import format_table

        return hashlib.sha256(format_table(self).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class NormalizationStats:
    """Per-column mean/s.d. recorded by :func:`normalize`."""

    means: np.ndarray
    sds: np.ndarray
    mode: SdMode

    def __post_init__(self):
        object.__setattr__(self, "means", _readonly(self.means))
        object.__setattr__(self, "sds", _readonly(self.sds))
        if self.means.shape != self.sds.shape:
            raise ValueError("means/sds length mismatch")
        if not (self.sds > 0).all():
            raise ValueError("sds must be positive")


@dataclass(frozen=True)
class NormalizedDataset:
    """Z-scored coordinates plus the stats that produced them."""

    labels: tuple[str, ...]
    coords: np.ndarray
    stats: NormalizationStats
    column_names: tuple[str, ...] = ()
    source_hash: str | None = None
    normalized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "column_names", tuple(self.column_names))
        object.__setattr__(self, "coords", _readonly(np.atleast_2d(self.coords)))
        if len(self.labels) != self.coords.shape[0]:
            raise ValueError("label/coordinate row count mismatch")

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def p(self) -> int:
        return self.coords.shape[1]


def normalize(data: Dataset, mode: SdMode = SdMode.SAMPLE) -> NormalizedDataset:
    """Z-score each column: (value - column mean) / column s.d.

    ``mode`` picks the s.d. convention (sample n-1 by default; see README for
    why sample is the documented default). Constant columns raise
    :class:`ZeroVariance`; fewer than two rows raise :class:`TooFewPoints`.
    """
    mode = SdMode(mode)
    if data.n < 2:
        raise TooFewPoints(f"normalize needs n >= 2, got {data.n}")
    values = data.values
    for k in range(data.p):
        col = values[:, k]
        if (col == col[0]).all():
            raise ZeroVariance(k, data.column_names[k] if data.column_names else None)
    ddof = 1 if mode is SdMode.SAMPLE else 0
    means = values.mean(axis=0)
    sds = values.std(axis=0, ddof=ddof)
    coords = (values - means) / sds
    return NormalizedDataset(
        labels=data.labels,
        coords=coords,
        stats=NormalizationStats(means=means, sds=sds, mode=mode),
        column_names=data.column_names,
        source_hash=data.content_hash(),
    )


def identity_normalized(data: Dataset, mode: SdMode = SdMode.SAMPLE) -> NormalizedDataset:
    """Wrap raw values unchanged (the --no-normalize path): mean-0/sd-1 placeholders."""
    return NormalizedDataset(
        labels=data.labels,
        coords=data.values,
        stats=NormalizationStats(
            means=np.zeros(data.p), sds=np.ones(data.p), mode=SdMode(mode)
        ),
        column_names=data.column_names,
        source_hash=data.content_hash(),
        normalized=False,
    )


def euclidean_distance(x: np.ndarray, y: np.ndarray) -> float:
    """L2 norm of (x - y); bit-identical to the matrix kernels' per-pair value."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DimensionMismatch(f"vector lengths differ: {x.shape[0]} vs {y.shape[0]}")
    return _kernels.sq_distance(x, y)


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric pairwise distances in condensed upper-triangular storage."""

    n: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "entries", _readonly(self.entries).ravel())
        expected = self.n * (self.n - 1) // 2
        if self.entries.shape[0] != expected:
            raise ValueError(
                f"condensed storage for n={self.n} needs {expected} entries, "
                f"got {self.entries.shape[0]}"
            )
        if not np.isfinite(self.entries).all() or (self.entries < 0).any():
            raise ValueError("distances must be finite and non-negative")

    def condensed_index(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        return i * (2 * self.n - i - 1) // 2 + (j - i - 1)

    def value(self, i: int, j: int) -> float:
        """d(i, j); symmetric, zero on the diagonal (never stored)."""
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"index out of range for n={self.n}")
        if i == j:
            return 0.0
        return float(self.entries[self.condensed_index(i, j)])

    @cached_property
    def _square(self) -> np.ndarray:
        square = np.zeros((self.n, self.n))
        iu, ju = np.triu_indices(self.n, 1)
        square[iu, ju] = self.entries
        square[ju, iu] = self.entries
        square.setflags(write=False)
        return square

    def row(self, i: int) -> np.ndarray:
        """All distances from point i (read-only view, d(i,i)=0 included)."""
        return self._square[i]


def matrix_from_coords(coords: np.ndarray) -> DistanceMatrix:
    """Condensed Euclidean distance matrix over the rows of ``coords``."""
    coords = np.atleast_2d(np.asarray(coords, dtype=np.float64))
    n = coords.shape[0]
    if n < 2:
        raise TooFewPoints(f"distance matrix needs n >= 2, got {n}")
    return DistanceMatrix(n=n, entries=_kernels.pairwise_condensed(coords))


def distance_matrix(nd: NormalizedDataset) -> DistanceMatrix:
    """Pairwise distances between the rows of a normalized dataset."""
    return matrix_from_coords(nd.coords)
