"""Dataset ingestion and deterministic synthetic geometries.

CSV convention: comma separator, "." decimal, optional header row. Generators
own their seeded RNG; the same seed reproduces bit-identical output.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .validation import InputError, normalize_labels

CARTESIAN = "cartesian"
SPHERICAL = "spherical"


@dataclass(frozen=True)
class DataMatrix:
    """n observations by d numeric features."""

    values: np.ndarray
    feature_names: tuple[str, ...] = ()
    coordinate_system: str = CARTESIAN

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 2:
            raise InputError(f"data must be 2-D, got shape {arr.shape}")
        n, d = arr.shape
        if n < 2:
            raise InputError(f"need at least 2 observations, got {n}")
        if d < 1:
            raise InputError("need at least 1 feature")
        if not np.all(np.isfinite(arr)):
            i, j = np.argwhere(~np.isfinite(arr))[0]
            raise InputError(f"non-finite value at row {i + 1}, column {j + 1}")
        names = tuple(self.feature_names) or tuple(f"f{i + 1}" for i in range(d))
        if len(names) != d:
            raise InputError(f"{len(names)} feature names for {d} features")
        if self.coordinate_system not in (CARTESIAN, SPHERICAL):
            raise InputError(f"unknown coordinate system {self.coordinate_system!r}")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelVector:
    """Cluster label per observation, values 1..k with every label present."""

    labels: np.ndarray
    k: int = field(init=False)

    def __post_init__(self):
        arr = np.asarray(self.labels, dtype=int)
        uniq = np.unique(arr)
        if uniq.size == 0 or uniq[0] != 1 or uniq[-1] != uniq.size:
            raise InputError(f"labels must cover 1..k, got values {uniq}")
        object.__setattr__(self, "labels", arr)
        object.__setattr__(self, "k", int(uniq.size))

    @property
    def n(self) -> int:
        return self.labels.shape[0]


def _parse_cell(text: str, row: int, col: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"cannot parse {text!r} at row {row}, column {col}") from None
    if not math.isfinite(value):
        raise InputError(f"non-finite value {text!r} at row {row}, column {col}")
    return value


def load_csv(path, has_header: bool = True, label_column: str | int | None = None):
    """Load a numeric CSV, optionally splitting off a label column.

    Returns (DataMatrix, LabelVector or None). Row order is preserved; the
    label column, when given by name or 0-based index, is excluded from the
    features. Label values are normalized onto 1..k by sorted original value.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise InputError(f"empty CSV file: {path}")

    header: list[str] | None = rows[0] if has_header else None
    body = rows[1:] if has_header else rows
    if not body:
        raise InputError(f"CSV has a header but no data rows: {path}")

    width = len(body[0])
    for i, row in enumerate(body):
        if len(row) != width:
            raise InputError(f"ragged CSV: row {i + 1} has {len(row)} cells, expected {width}")

    label_idx: int | None = None
    if label_column is not None:
        if isinstance(label_column, int):
            label_idx = label_column
        else:
            if header is None:
                raise InputError("label column given by name requires a header")
            if label_column not in header:
                raise InputError(f"label column {label_column!r} not in header {header}")
            label_idx = header.index(label_column)
        if not 0 <= label_idx < width:
            raise InputError(f"label column index {label_idx} out of range for {width} columns")

    raw_labels: list[str] = []
    data: list[list[float]] = []
    for i, row in enumerate(body):
        vals = []
        for j, cell in enumerate(row):
            if j == label_idx:
                raw_labels.append(cell.strip())
            else:
                vals.append(_parse_cell(cell.strip(), i + 1, j + 1))
        data.append(vals)

    names: tuple[str, ...] = ()
    if header is not None:
        names = tuple(h for j, h in enumerate(header) if j != label_idx)
    matrix = DataMatrix(np.array(data, dtype=float), feature_names=names)

    labels = None
    if label_idx is not None:
        try:
            ints = [int(float(s)) for s in raw_labels]
        except ValueError:
            raise InputError("label column contains non-integer values") from None
        labels = LabelVector(normalize_labels(np.array(ints)))
    return matrix, labels


def save_csv(matrix: DataMatrix, path, labels: LabelVector | None = None,
             label_name: str = "cluster") -> None:
    """Write a DataMatrix (and optional labels as a trailing column) as CSV."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = list(matrix.feature_names)
        if labels is not None:
            header.append(label_name)
        writer.writerow(header)
        for i in range(matrix.n):
            row = [repr(float(v)) for v in matrix.values[i]]
            if labels is not None:
                row.append(str(int(labels.labels[i])))
            writer.writerow(row)


def generate_two_gaussians(n_per_cluster: int, shift: float, scale: float = 0.1,
                           seed: int = 0):
    """Two Gaussian clusters in 2-D separated along the second feature.

    Cluster 1 has second-feature mean -shift, cluster 2 has +shift, so the
    centers differ by 2*shift. Both features have standard deviation `scale`.
    """
    if n_per_cluster < 2:
        raise InputError("n_per_cluster must be >= 2")
    if scale <= 0:
        raise InputError("scale must be > 0")
    rng = np.random.default_rng(seed)
    n = 2 * n_per_cluster
    pts = rng.normal(size=(n, 2)) * scale
    pts[:n_per_cluster, 1] -= shift
    pts[n_per_cluster:, 1] += shift
    labels = np.repeat([1, 2], n_per_cluster)
    return (DataMatrix(pts, feature_names=("x", "y")), LabelVector(labels))


def generate_atom(n: int, seed: int = 0, core_radius: float = 1.0,
                  shell_radius: float = 30.0, shell_spread: float = 0.05):
    """Dense solid ball (class 1) inside a thin hollow shell (class 2) in 3-D.

    n is split evenly between the two classes. Shell radii vary uniformly by
    +-shell_spread relative to shell_radius, so every shell point lies far
    outside the core.
    """
    if n < 20 or n % 2 != 0:
        raise InputError("n must be an even number >= 20")
    rng = np.random.default_rng(seed)
    half = n // 2

    # core: uniform in the solid ball via direction * radius, radius ~ U^(1/3)
    core_dir = rng.normal(size=(half, 3))
    core_dir /= np.linalg.norm(core_dir, axis=1, keepdims=True)
    core_r = core_radius * rng.uniform(size=half) ** (1.0 / 3.0)
    core = core_dir * core_r[:, None]

    shell_dir = rng.normal(size=(half, 3))
    shell_dir /= np.linalg.norm(shell_dir, axis=1, keepdims=True)
    shell_r = shell_radius * (1.0 + shell_spread * rng.uniform(-1.0, 1.0, size=half))
    shell = shell_dir * shell_r[:, None]

    values = np.vstack([core, shell])
    labels = np.repeat([1, 2], half)
    return (DataMatrix(values, feature_names=("x", "y", "z")), LabelVector(labels))


def generate_golfball(n: int, seed: int = 0, radius: float = 1.0) -> DataMatrix:
    """n points approximately uniform on the surface of a 3-D sphere.

    No labels: the dataset can be partitioned but has no distance-based
    structure.
    """
    if n < 20:
        raise InputError("n must be >= 20")
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 3))
    pts *= radius / np.linalg.norm(pts, axis=1, keepdims=True)
    return DataMatrix(pts, feature_names=("x", "y", "z"))


def to_spherical(matrix: DataMatrix) -> DataMatrix:
    """Convert 3-D Cartesian coordinates to spherical (r, phi, theta).

    r = sqrt(x^2+y^2+z^2), phi is the azimuth in (-pi, pi], theta the polar
    angle from the +z axis in [0, pi]. The origin maps to (0, 0, 0).
    """
    if matrix.coordinate_system != CARTESIAN or matrix.d != 3:
        raise InputError("to_spherical needs 3-D Cartesian data")
    x, y, z = matrix.values.T
    r = np.sqrt(x * x + y * y + z * z)
    phi = np.arctan2(y, x)
    with np.errstate(invalid="ignore", divide="ignore"):
        theta = np.where(r > 0, np.arccos(np.clip(z / np.where(r > 0, r, 1.0), -1.0, 1.0)), 0.0)
    phi = np.where(r > 0, phi, 0.0)
    # arctan2(0, x<0) = pi which is inside (-pi, pi]; -pi folds to +pi
    phi = np.where(phi <= -np.pi, np.pi, phi)
    out = np.column_stack([r, phi, theta])
    return DataMatrix(out, feature_names=("r", "phi", "theta"), coordinate_system=SPHERICAL)


def to_cartesian(matrix: DataMatrix) -> DataMatrix:
    """Inverse of to_spherical."""
    if matrix.coordinate_system != SPHERICAL or matrix.d != 3:
        raise InputError("to_cartesian needs spherical (r, phi, theta) data")
    r, phi, theta = matrix.values.T
    x = r * np.sin(theta) * np.cos(phi)
    y = r * np.sin(theta) * np.sin(phi)
    z = r * np.cos(theta)
    return DataMatrix(np.column_stack([x, y, z]), feature_names=("x", "y", "z"))
