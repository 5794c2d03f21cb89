"""Distance-based baseline clusterers and partition evaluation.

Agglomeration uses Lance-Williams updates; ward, median and centroid run on
squared distances with heights reported back on the distance scale (the
Ward.D2 convention). Ties break on the lowest (i, j) slot pair. Partition
evaluation follows the rule that a cluster passes when
median(intra) + 2 * robust_sd(intra) lies at or below the decision boundary,
with the robust sd taken as 1.4826 * MAD.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.base import BaseEstimator

from .distances import DistanceMatrix
from .validation import InputError, check_labels, check_matrix, check_square_distances

LINKAGES = ("single", "complete", "average", "wpgma", "ward", "median", "centroid")
_SQUARED_SPACE = frozenset({"ward", "median", "centroid"})
MONOTONE_LINKAGES = frozenset({"single", "complete", "average", "wpgma", "ward"})

MAD_TO_SD = 1.4826  # consistency factor for Gaussian data


@dataclass(frozen=True)
class Dendrogram:
    """n-1 merge records: (left id, right id, height, new size).

    Ids 0..n-1 are observations; merge t creates id n+t. Heights are
    nondecreasing for monotone linkages; median/centroid may invert, counted
    in `inversions`.
    """

    left: np.ndarray
    right: np.ndarray
    heights: np.ndarray
    sizes: np.ndarray
    n: int
    linkage: str

    @property
    def inversions(self) -> int:
        return int(np.sum(np.diff(self.heights) < 0))


def _lw_update(linkage, d_ki, d_kj, d_ij, ni, nj, nk):
    if linkage == "single":
        return 0.5 * d_ki + 0.5 * d_kj - 0.5 * np.abs(d_ki - d_kj)
    if linkage == "complete":
        return 0.5 * d_ki + 0.5 * d_kj + 0.5 * np.abs(d_ki - d_kj)
    if linkage == "average":
        return (ni * d_ki + nj * d_kj) / (ni + nj)
    if linkage == "wpgma":
        return 0.5 * d_ki + 0.5 * d_kj
    if linkage == "ward":
        tot = ni + nj + nk
        return ((ni + nk) * d_ki + (nj + nk) * d_kj - nk * d_ij) / tot
    if linkage == "median":
        return 0.5 * d_ki + 0.5 * d_kj - 0.25 * d_ij
    if linkage == "centroid":
        nij = ni + nj
        return (ni * d_ki + nj * d_kj) / nij - (ni * nj * d_ij) / (nij * nij)
    raise InputError(f"unknown linkage {linkage!r}, expected one of {LINKAGES}")


class Agglomerative(BaseEstimator):
    """Agglomerative clustering on a precomputed distance matrix."""

    def __init__(self, linkage: str = "ward"):
        self.linkage = linkage

    def fit(self, distances):
        linkage = str(self.linkage).lower()
        if linkage not in LINKAGES:
            raise InputError(f"unknown linkage {self.linkage!r}, expected one of {LINKAGES}")
        values = distances.values if isinstance(distances, DistanceMatrix) else distances
        d = check_square_distances(values, tol=1e-9).copy()
        n = d.shape[0]
        if n < 2:
            raise InputError("need at least 2 observations")
        if linkage in _SQUARED_SPACE:
            d = d * d

        np.fill_diagonal(d, np.inf)
        active = np.ones(n, dtype=bool)
        sizes = np.ones(n, dtype=np.int64)
        ids = np.arange(n, dtype=np.int64)

        left = np.empty(n - 1, dtype=np.int64)
        right = np.empty(n - 1, dtype=np.int64)
        heights = np.empty(n - 1, dtype=float)
        out_sizes = np.empty(n - 1, dtype=np.int64)

        work = d.copy()
        # hide the lower triangle so flat argmin scans row-major over i < j,
        # which breaks ties on the lowest (i, j) pair
        work[np.tril_indices(n)] = np.inf

        for step in range(n - 1):
            flat = int(np.argmin(work))
            i, j = divmod(flat, n)
            height = d[i, j]
            left[step] = ids[i]
            right[step] = ids[j]
            heights[step] = np.sqrt(height) if linkage in _SQUARED_SPACE else height
            out_sizes[step] = sizes[i] + sizes[j]

            k_mask = active.copy()
            k_mask[i] = k_mask[j] = False
            ks = np.where(k_mask)[0]
            if ks.size:
                new_d = _lw_update(linkage, d[ks, i], d[ks, j], d[i, j],
                                   sizes[i], sizes[j], sizes[ks])
                d[ks, i] = new_d
                d[i, ks] = new_d
                lower = ks < i
                work[ks[lower], i] = new_d[lower]
                work[i, ks[~lower]] = new_d[~lower]

            active[j] = False
            sizes[i] += sizes[j]
            ids[i] = n + step
            d[j, :] = np.inf
            d[:, j] = np.inf
            work[j, :] = np.inf
            work[:, j] = np.inf

        self.dendrogram_ = Dendrogram(left=left, right=right, heights=heights,
                                      sizes=out_sizes, n=n, linkage=linkage)
        return self

    def cut(self, k: int) -> np.ndarray:
        if not hasattr(self, "dendrogram_"):
            raise InputError("not fitted")
        return cut(self.dendrogram_, k)

    def fit_predict(self, distances, k: int) -> np.ndarray:
        return self.fit(distances).cut(k)


def hcluster(distances, linkage: str = "ward") -> Dendrogram:
    """Agglomerative merge sequence for a distance matrix."""
    return Agglomerative(linkage=linkage).fit(distances).dendrogram_


def cut(dendrogram: Dendrogram, k: int) -> np.ndarray:
    """Labels 1..k from the first n-k merges, in merge order.

    Applying merges in recorded order also defines the cut for non-monotone
    linkages. Labels are assigned by first occurrence.
    """
    n = dendrogram.n
    if not 1 <= k <= n:
        raise InputError(f"k must be in 1..{n}, got {k}")
    parent = list(range(2 * n - 1))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for step in range(n - k):
        new_id = n + step
        parent[find(int(dendrogram.left[step]))] = new_id
        parent[find(int(dendrogram.right[step]))] = new_id

    labels = np.empty(n, dtype=int)
    seen: dict[int, int] = {}
    for i in range(n):
        root = find(i)
        if root not in seen:
            seen[root] = len(seen) + 1
        labels[i] = seen[root]
    return labels


class KMeansLloyd(BaseEstimator):
    """Lloyd's algorithm with k-means++ seeding, best of `restarts` by WCSS."""

    def __init__(self, n_clusters: int = 2, seed: int = 0, restarts: int = 10,
                 max_iter: int = 300):
        self.n_clusters = n_clusters
        self.seed = seed
        self.restarts = restarts
        self.max_iter = max_iter

    def _plus_plus(self, x, rng) -> np.ndarray:
        n = x.shape[0]
        centers = np.empty((self.n_clusters, x.shape[1]))
        centers[0] = x[rng.integers(n)]
        closest = np.sum((x - centers[0]) ** 2, axis=1)
        for c in range(1, self.n_clusters):
            total = float(np.sum(closest))
            if total <= 0:
                centers[c] = x[rng.integers(n)]
                continue
            centers[c] = x[rng.choice(n, p=closest / total)]
            closest = np.minimum(closest, np.sum((x - centers[c]) ** 2, axis=1))
        return centers

    def fit(self, x):
        x = check_matrix(x, "data")
        k = int(self.n_clusters)
        n = x.shape[0]
        if not 1 <= k <= n:
            raise InputError(f"k must be in 1..{n}, got {k}")

        best_inertia = np.inf
        best_labels = best_centers = None
        for r in range(self.restarts):
            rng = np.random.default_rng(self.seed + r)
            centers = self._plus_plus(x, rng)
            labels = None
            for _ in range(self.max_iter):
                sq = np.sum((x[:, None, :] - centers[None, :, :]) ** 2, axis=2)
                new_labels = np.argmin(sq, axis=1)
                for c in range(k):
                    members = new_labels == c
                    if not np.any(members):
                        # re-seed an empty cluster at the farthest point
                        far = int(np.argmax(np.min(sq, axis=1)))
                        centers[c] = x[far]
                        new_labels[far] = c
                        members = new_labels == c
                    centers[c] = x[members].mean(axis=0)
                if labels is not None and np.array_equal(labels, new_labels):
                    break
                labels = new_labels
            sq = np.sum((x[:, None, :] - centers[None, :, :]) ** 2, axis=2)
            labels = np.argmin(sq, axis=1)
            inertia = float(np.sum(sq[np.arange(n), labels]))
            if inertia < best_inertia:
                best_inertia, best_labels, best_centers = inertia, labels, centers.copy()

        # relabel 1..k by first occurrence; empty label values cannot occur
        seen: dict[int, int] = {}
        out = np.empty(n, dtype=int)
        for i, lab in enumerate(best_labels):
            if lab not in seen:
                seen[int(lab)] = len(seen) + 1
            out[i] = seen[int(lab)]
        self.labels_ = out
        self.cluster_centers_ = best_centers
        self.inertia_ = best_inertia
        return self

    def fit_predict(self, x) -> np.ndarray:
        return self.fit(x).labels_


def kmeans(x, k: int, seed: int = 0, restarts: int = 10) -> np.ndarray:
    values = getattr(x, "values", x)
    return KMeansLloyd(n_clusters=k, seed=seed, restarts=restarts).fit_predict(values)


def _dist_values(distances) -> np.ndarray:
    return distances.values if isinstance(distances, DistanceMatrix) else np.asarray(distances, dtype=float)


def intra_distances(distances, labels, cluster: int) -> np.ndarray:
    """All pairwise distances within one cluster (upper triangle order).

    Empty for singleton clusters, which downstream reports mark as NA.
    """
    d = _dist_values(distances)
    labels = check_labels(labels, n=d.shape[0])
    idx = np.where(labels == cluster)[0]
    if idx.size == 0:
        raise InputError(f"cluster {cluster} has no members")
    sub = d[np.ix_(idx, idx)]
    iu = np.triu_indices(idx.size, 1)
    return sub[iu]


def inter_distances(distances, labels, a: int, b: int) -> np.ndarray:
    """All distances between two distinct clusters."""
    if a == b:
        raise InputError("inter distances need two distinct clusters")
    d = _dist_values(distances)
    labels = check_labels(labels, n=d.shape[0])
    ia = np.where(labels == a)[0]
    ib = np.where(labels == b)[0]
    if ia.size == 0 or ib.size == 0:
        raise InputError("both clusters must be non-empty")
    return d[np.ix_(ia, ib)].ravel()


def robust_sd(values) -> float:
    """1.4826 * median absolute deviation."""
    v = np.asarray(values, dtype=float)
    med = float(np.median(v))
    return MAD_TO_SD * float(np.median(np.abs(v - med)))


@dataclass(frozen=True)
class ClusterCheck:
    cluster: int
    size: int
    n_intra: int
    median: float | None
    robust_sd: float | None
    criterion: float | None      # median + 2 * robust_sd
    passed: bool | None          # None marks NA (singleton cluster)
    pct_above: float | None

    def to_dict(self) -> dict:
        return {"cluster": self.cluster, "size": self.size, "n_intra": self.n_intra,
                "median": self.median, "robust_sd": self.robust_sd,
                "criterion": self.criterion, "passed": self.passed,
                "pct_above": self.pct_above}


@dataclass(frozen=True)
class PartitionReport:
    """Per-cluster intra-distance checks against a Bayes decision boundary."""

    boundary: float
    clusters: tuple[ClusterCheck, ...]
    pct_above: float | None      # pooled over non-singleton clusters
    overall_pass: bool | None
    name: str = ""

    def to_dict(self) -> dict:
        return {"schema": 1, "name": self.name, "boundary": self.boundary,
                "clusters": [c.to_dict() for c in self.clusters],
                "pct_above": self.pct_above, "overall_pass": self.overall_pass}

    @classmethod
    def from_dict(cls, d: dict) -> "PartitionReport":
        checks = tuple(ClusterCheck(**c) for c in d["clusters"])
        return cls(boundary=d["boundary"], clusters=checks, pct_above=d.get("pct_above"),
                   overall_pass=d.get("overall_pass"), name=d.get("name", ""))


def evaluate_partition(distances, labels, boundary: float, name: str = "") -> PartitionReport:
    """Check every cluster's intra distances against the decision boundary.

    A cluster passes when median + 2 * robust_sd <= boundary; singletons are
    NA and excluded from the pooled percentage of intra distances above the
    boundary.
    """
    if boundary <= 0:
        raise InputError("boundary must be > 0")
    d = _dist_values(distances)
    labels = check_labels(labels, n=d.shape[0])
    k = int(np.max(labels))
    checks = []
    pooled_above = 0
    pooled_total = 0
    for c in range(1, k + 1):
        size = int(np.sum(labels == c))
        vals = intra_distances(d, labels, c)
        if vals.size == 0:
            checks.append(ClusterCheck(cluster=c, size=size, n_intra=0, median=None,
                                       robust_sd=None, criterion=None, passed=None,
                                       pct_above=None))
            continue
        med = float(np.median(vals))
        sd = robust_sd(vals)
        crit = med + 2.0 * sd
        above = int(np.sum(vals > boundary))
        pooled_above += above
        pooled_total += vals.size
        checks.append(ClusterCheck(cluster=c, size=size, n_intra=int(vals.size),
                                   median=med, robust_sd=sd, criterion=crit,
                                   passed=bool(crit <= boundary),
                                   pct_above=100.0 * above / vals.size))
    flags = [c.passed for c in checks if c.passed is not None]
    return PartitionReport(
        boundary=float(boundary), clusters=tuple(checks),
        pct_above=(100.0 * pooled_above / pooled_total) if pooled_total else None,
        overall_pass=all(flags) if flags else None, name=name)


def evaluate_summary(rows, boundary: float) -> list[PartitionReport]:
    """Apply the boundary criterion to published (median, 2*sd) summaries.

    `rows` is a list of (name, cells) where each cell is a (median, two_sd)
    pair or None for an NA (singleton) cluster. Mirrors checking a results
    table without access to the underlying distances.
    """
    reports = []
    for name, cells in rows:
        checks = []
        for idx, cell in enumerate(cells, start=1):
            if cell is None:
                checks.append(ClusterCheck(cluster=idx, size=1, n_intra=0, median=None,
                                           robust_sd=None, criterion=None, passed=None,
                                           pct_above=None))
                continue
            med, two_sd = float(cell[0]), float(cell[1])
            crit = med + two_sd
            checks.append(ClusterCheck(cluster=idx, size=-1, n_intra=-1, median=med,
                                       robust_sd=two_sd / 2.0, criterion=crit,
                                       passed=bool(crit <= boundary), pct_above=None))
        flags = [c.passed for c in checks if c.passed is not None]
        reports.append(PartitionReport(boundary=float(boundary), clusters=tuple(checks),
                                       pct_above=None,
                                       overall_pass=all(flags) if flags else None,
                                       name=str(name)))
    return reports


def accuracy(labels_a, labels_b) -> float:
    """Best agreement fraction over bijections between the two label sets.

    Exhaustive over permutations for up to 6 labels on each side, Hungarian
    assignment above (both maximize the same matched count).
    """
    a = check_labels(labels_a)
    b = check_labels(labels_b)
    if a.size != b.size:
        raise InputError(f"label lengths differ: {a.size} vs {b.size}")
    ka, kb = int(np.max(a)), int(np.max(b))
    if max(ka, kb) > 10:
        raise InputError("accuracy matching supports at most 10 labels per side")
    table = np.zeros((ka, kb), dtype=np.int64)
    np.add.at(table, (a - 1, b - 1), 1)

    if ka <= 6 and kb <= 6:
        best = 0
        if ka <= kb:
            for perm in itertools.permutations(range(kb), ka):
                best = max(best, int(sum(table[i, p] for i, p in enumerate(perm))))
        else:
            for perm in itertools.permutations(range(ka), kb):
                best = max(best, int(sum(table[p, j] for j, p in enumerate(perm))))
        return best / a.size
    rows, cols = linear_sum_assignment(-table)
    return float(table[rows, cols].sum()) / a.size
