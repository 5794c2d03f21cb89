"""Distance matrices under a closed metric registry, plus the distance feature.

Computation runs over fixed-size row blocks; worker threads only change who
computes a block, never what is computed, so results are bit-identical for
any worker count.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .datasets import SPHERICAL, DataMatrix
from .validation import InputError, check_square_distances

_BLOCK = 64

METRIC_NAMES = (
    "euclidean",
    "manhattan",
    "chebyshev",
    "minkowski",
    "canberra",
    "cosine",
    "chord",
    "spherical_radius",
)

# metrics that satisfy the triangle inequality by construction (cosine and
# minkowski with k < 1 do not)
TRUE_METRICS = (
    "euclidean",
    "manhattan",
    "chebyshev",
    "canberra",
    "chord",
    "spherical_radius",
)


@dataclass(frozen=True)
class MetricId:
    name: str
    k: float | None = None

    def __post_init__(self):
        if self.name not in METRIC_NAMES:
            raise InputError(f"unknown metric {self.name!r}, expected one of {METRIC_NAMES}")
        if self.name == "minkowski":
            if self.k is None or self.k <= 0:
                raise InputError("minkowski requires k > 0")
        elif self.k is not None:
            raise InputError(f"metric {self.name!r} takes no parameter")

    def __str__(self) -> str:
        if self.name == "minkowski":
            return f"minkowski({self.k:g})"
        return self.name


def parse_metric(text: str | MetricId) -> MetricId:
    """Parse 'euclidean' or 'minkowski(1.5)' style metric identifiers."""
    if isinstance(text, MetricId):
        return text
    text = text.strip()
    if text.startswith("minkowski"):
        inner = text[len("minkowski"):].strip()
        if inner.startswith("(") and inner.endswith(")"):
            return MetricId("minkowski", k=float(inner[1:-1]))
        if not inner:
            return MetricId("minkowski", k=2.0)
        raise InputError(f"cannot parse metric {text!r}")
    return MetricId(text)


@dataclass(frozen=True)
class DistanceMatrix:
    values: np.ndarray
    metric: str = "ingested"

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class DistanceFeature:
    """Upper-triangle entries of a distance matrix in row-major (i<j) order."""

    values: np.ndarray
    source_metric: str = "ingested"
    n_points: int = 0

    def index_pair(self, pos: int) -> tuple[int, int]:
        """(i, j) of entry `pos`, 0-based, i < j."""
        n = self.n_points
        i = 0
        remaining = pos
        row_len = n - 1
        while remaining >= row_len:
            remaining -= row_len
            i += 1
            row_len -= 1
        return i, i + 1 + remaining

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class ContrastReport:
    d_min: float
    d_max: float
    relative_contrast: float
    reference: str


@dataclass
class DistanceValidation:
    n: int
    max_asymmetry: float
    max_diagonal: float
    negative_entries: int
    duplicate_offdiagonal: int
    triangle_checked: int
    triangle_violations: int
    violation_examples: list = field(default_factory=list)
    exhaustive: bool = False

    @property
    def ok(self) -> bool:
        return (self.max_asymmetry <= 1e-12 and self.max_diagonal <= 1e-12
                and self.negative_entries == 0 and self.triangle_violations == 0)


def _zero_rows(values: np.ndarray) -> np.ndarray:
    return np.where(np.linalg.norm(values, axis=1) == 0)[0]


def _block_distances(a: np.ndarray, b: np.ndarray, metric: MetricId) -> np.ndarray:
    """Distances between every row of a and every row of b."""
    name = metric.name
    if name == "euclidean":
        diff = a[:, None, :] - b[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=-1))
    if name == "manhattan":
        return np.sum(np.abs(a[:, None, :] - b[None, :, :]), axis=-1)
    if name == "chebyshev":
        return np.max(np.abs(a[:, None, :] - b[None, :, :]), axis=-1)
    if name == "minkowski":
        k = float(metric.k)
        return np.sum(np.abs(a[:, None, :] - b[None, :, :]) ** k, axis=-1) ** (1.0 / k)
    if name == "canberra":
        diff = np.abs(a[:, None, :] - b[None, :, :])
        denom = np.abs(a)[:, None, :] + np.abs(b)[None, :, :]
        with np.errstate(invalid="ignore"):
            terms = np.where(denom > 0, diff / np.where(denom > 0, denom, 1.0), 0.0)
        return np.sum(terms, axis=-1)
    if name in ("cosine", "chord"):
        an = a / np.linalg.norm(a, axis=1, keepdims=True)
        bn = b / np.linalg.norm(b, axis=1, keepdims=True)
        cos = np.clip(an @ bn.T, -1.0, 1.0)
        if name == "cosine":
            return 1.0 - cos
        return np.sqrt(np.maximum(2.0 * (1.0 - cos), 0.0))
    if name == "spherical_radius":
        return np.abs(a[:, :1] - b[:, :1].T)
    raise InputError(f"unknown metric {name!r}")


def compute_distance_matrix(matrix: DataMatrix, metric: str | MetricId,
                            n_jobs: int = 1) -> DistanceMatrix:
    """Symmetric pairwise distance matrix of the rows of `matrix`."""
    metric = parse_metric(metric)
    values = matrix.values
    if metric.name == "spherical_radius" and matrix.coordinate_system != SPHERICAL:
        raise InputError("spherical_radius requires data in spherical coordinates")
    if metric.name in ("cosine", "chord"):
        zeros = _zero_rows(values)
        if zeros.size:
            raise InputError(
                f"{metric.name} distance undefined for zero vectors at rows "
                f"{[int(i) + 1 for i in zeros[:10]]}")

    n = matrix.n
    out = np.empty((n, n), dtype=float)
    starts = list(range(0, n, _BLOCK))

    def fill(start: int) -> None:
        stop = min(start + _BLOCK, n)
        out[start:stop, :] = _block_distances(values[start:stop], values, metric)

    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(fill, starts))
    else:
        for start in starts:
            fill(start)

    # exact symmetry and zero diagonal by construction
    iu = np.triu_indices(n, 1)
    out[(iu[1], iu[0])] = out[iu]
    np.fill_diagonal(out, 0.0)
    return DistanceMatrix(out, metric=str(metric))


def validate_distance_matrix(dist: DistanceMatrix, triangle_samples: int = 10_000,
                             seed: int = 0) -> DistanceValidation:
    """Report (not enforce) metric-space properties of a distance matrix.

    The triangle inequality is checked exhaustively for n <= 50 and on
    `triangle_samples` random triples above. A triple (i, j, k) is violated
    when D_ij > D_ik + D_kj (beyond roundoff).
    """
    d = np.asarray(dist.values, dtype=float)
    n = d.shape[0]
    asym = float(np.max(np.abs(d - d.T)))
    diag = float(np.max(np.abs(np.diag(d))))
    negatives = int(np.sum(d < 0))
    iu = np.triu_indices(n, 1)
    off = d[iu]
    duplicates = int(np.sum(off == 0.0))

    tol = 1e-9 * max(1.0, float(np.max(d)))
    violations = 0
    examples = []
    checked = 0
    exhaustive = n <= 50
    if exhaustive:
        for i in range(n):
            for j in range(i + 1, n):
                # D_ij <= D_ik + D_kj for every witness k
                slack = d[i, :] + d[:, j] - d[i, j]
                bad = np.where(slack < -tol)[0]
                checked += n
                if bad.size:
                    violations += int(bad.size)
                    if len(examples) < 10:
                        examples.append((i + 1, j + 1, int(bad[0]) + 1))
    else:
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, n, size=(triangle_samples, 3))
        i, j, k = idx.T
        slack = d[i, k] + d[k, j] - d[i, j]
        bad = np.where(slack < -tol)[0]
        checked = triangle_samples
        violations = int(bad.size)
        examples = [(int(i[b]) + 1, int(j[b]) + 1, int(k[b]) + 1) for b in bad[:10]]

    return DistanceValidation(
        n=n, max_asymmetry=asym, max_diagonal=diag, negative_entries=negatives,
        duplicate_offdiagonal=duplicates, triangle_checked=checked,
        triangle_violations=violations, violation_examples=examples,
        exhaustive=exhaustive)


def extract_distance_feature(dist: DistanceMatrix) -> DistanceFeature:
    """Upper-triangle vector of a distance matrix, length n(n-1)/2."""
    d = check_square_distances(dist.values, tol=1e-9)
    n = d.shape[0]
    iu = np.triu_indices(n, 1)
    return DistanceFeature(values=d[iu], source_metric=dist.metric, n_points=n)


def scatter_feature(feature: DistanceFeature) -> DistanceMatrix:
    """Rebuild the full symmetric matrix from a distance feature."""
    n = feature.n_points
    out = np.zeros((n, n), dtype=float)
    iu = np.triu_indices(n, 1)
    out[iu] = feature.values
    out[(iu[1], iu[0])] = feature.values
    return DistanceMatrix(out, metric=feature.source_metric)


def load_distance_matrix(path) -> DistanceMatrix:
    """Read a distance matrix from CSV: full square or strict lower triangle.

    Lower-triangle input (row i holds D_{i,1}..D_{i,i-1}) is mirrored. Full
    matrices must be symmetric within 1e-9 and are averaged symmetric; the
    diagonal must be zero within 1e-12 and entries nonnegative.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [[float(c) for c in row if c.strip()] for row in csv.reader(fh)
                if row and any(c.strip() for c in row)]
    if not rows:
        raise InputError(f"empty distance file: {path}")
    lengths = [len(r) for r in rows]

    if lengths == list(range(1, len(rows) + 1)):
        n = len(rows) + 1
        d = np.zeros((n, n), dtype=float)
        for i, row in enumerate(rows, start=1):
            d[i, :i] = row
        d = d + d.T
    elif all(l == lengths[0] for l in lengths) and lengths[0] == len(rows):
        d = np.array(rows, dtype=float)
        asym = float(np.max(np.abs(d - d.T)))
        if asym > 1e-9:
            raise InputError(f"full matrix is asymmetric, max |D_ij - D_ji| = {asym:.3g}")
        d = 0.5 * (d + d.T)
    else:
        raise InputError(
            f"distance file is neither square nor strict lower triangle (row lengths {lengths[:5]}...)")

    if float(np.max(np.abs(np.diag(d)))) > 1e-12:
        raise InputError("distance matrix has nonzero diagonal")
    if np.any(d < 0):
        raise InputError("distance matrix has negative entries")
    return DistanceMatrix(d, metric="ingested")


def save_distance_matrix(dist: DistanceMatrix, path) -> None:
    np.savetxt(path, dist.values, delimiter=",", fmt="%.17g")


def relative_contrast(matrix: DataMatrix, metric: str | MetricId, reference) -> ContrastReport:
    """(Dmax - Dmin)/Dmin for distances from a reference point to all rows.

    Shrinks toward zero as dimensionality grows for data without structure;
    errors when the reference coincides with a data point (Dmin = 0).
    """
    metric = parse_metric(metric)
    ref = np.asarray(reference, dtype=float).reshape(1, -1)
    if ref.shape[1] != matrix.d:
        raise InputError(f"reference has dimension {ref.shape[1]}, data has {matrix.d}")
    dists = _block_distances(ref, matrix.values, metric)[0]
    d_min = float(np.min(dists))
    d_max = float(np.max(dists))
    if d_min == 0.0:
        raise InputError("reference coincides with a data point (Dmin = 0)")
    return ContrastReport(
        d_min=d_min, d_max=d_max,
        relative_contrast=(d_max - d_min) / d_min,
        reference=np.array2string(ref[0], precision=4, threshold=8),
    )
