"""Pareto density estimation, Hartigan's dip test, and mirrored-density specs.

The dip statistic follows the classic greatest-convex-minorant /
least-concave-majorant algorithm (Hartigan & Hartigan 1985, AS 217 as revised
by Maechler's dip.c): the value is the sup-distance between the empirical CDF
and its closest unimodal distribution function, bounded below by 1/(2n).
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .validation import InputError, check_sample


def _dip_statistic_sorted(x: np.ndarray) -> float:
    """Dip of a sorted sample with at least 4 points and positive range.

    Works in units of 1/(2n) internally and divides once at the end.
    """
    n = x.shape[0]

    # pred[j]: previous touch point of the greatest convex minorant at j
    pred = np.zeros(n, dtype=np.int64)
    for j in range(1, n):
        pred[j] = j - 1
        while True:
            p = pred[j]
            pp = pred[p]
            if p == 0 or (x[j] - x[p]) * (p - pp) < (x[p] - x[pp]) * (j - p):
                break
            pred[j] = pp

    # succ[j]: next touch point of the least concave majorant at j
    succ = np.zeros(n, dtype=np.int64)
    succ[n - 1] = n - 1
    for j in range(n - 2, -1, -1):
        succ[j] = j + 1
        while True:
            s = succ[j]
            ss = succ[s]
            if s == n - 1 or (x[j] - x[s]) * (s - ss) < (x[s] - x[ss]) * (j - s):
                break
            succ[j] = ss

    low = 0
    high = n - 1
    dip = 1.0
    gcm = np.zeros(n, dtype=np.int64)
    lcm = np.zeros(n, dtype=np.int64)

    while True:
        # GCM touch points from high down to low, LCM from low up to high
        gcm[0] = high
        ng = 0
        while gcm[ng] > low:
            gcm[ng + 1] = pred[gcm[ng]]
            ng += 1
        lcm[0] = low
        nl = 0
        while lcm[nl] < high:
            lcm[nl + 1] = succ[lcm[nl]]
            nl += 1

        ig = ng
        ih = nl
        ix = ng - 1
        iv = 1

        # largest gap between the two fits, walking both point lists once
        d = 0.0
        if ng != 1 or nl != 1:
            while True:
                gx = gcm[ix]
                lx = lcm[iv]
                if gx > lx:
                    g1 = gcm[ix + 1]
                    denom = x[gx] - x[g1]
                    ratio = (x[lx] - x[g1]) / denom if denom > 0 else 0.0
                    dx = (lx - g1 + 1) - ratio * (gx - g1)
                    iv += 1
                    if dx >= d:
                        d = dx
                        ig = ix + 1
                        ih = iv - 1
                else:
                    l0 = lcm[iv - 1]
                    denom = x[lx] - x[l0]
                    ratio = (x[gx] - x[l0]) / denom if denom > 0 else 0.0
                    dx = ratio * (lx - l0) - (gx - l0 - 1)
                    ix -= 1
                    if dx >= d:
                        d = dx
                        ig = ix + 1
                        ih = iv
                if ix < 0:
                    ix = 0
                if iv > nl:
                    iv = nl
                if gcm[ix] == lcm[iv]:
                    break

        if d < dip:
            break

        # sup deviation of the empirical CDF from the GCM below the modal
        # interval and from the LCM above it
        dip_low = 1.0
        for j in range(ig, ng):
            jb = gcm[j + 1]
            je = gcm[j]
            if je - jb > 1 and x[je] != x[jb]:
                c = (je - jb) / (x[je] - x[jb])
                for jj in range(jb, je + 1):
                    t = (jj - jb + 1) - (x[jj] - x[jb]) * c
                    if t > dip_low:
                        dip_low = t
        dip_high = 1.0
        for j in range(ih, nl):
            jb = lcm[j]
            je = lcm[j + 1]
            if je - jb > 1 and x[je] != x[jb]:
                c = (je - jb) / (x[je] - x[jb])
                for jj in range(jb, je + 1):
                    t = (x[jj] - x[jb]) * c - (jj - jb - 1)
                    if t > dip_high:
                        dip_high = t

        new_dip = dip_low if dip_low >= dip_high else dip_high
        if dip < new_dip:
            dip = new_dip
        if low == gcm[ig] and high == lcm[ih]:
            break
        low = gcm[ig]
        high = lcm[ih]

    return dip / (2.0 * n)


try:  # pragma: no cover - exercised implicitly
    from numba import njit

    _dip_statistic_sorted = njit(cache=True, nogil=True)(_dip_statistic_sorted)
except ImportError:  # pragma: no cover
    pass


def dip_statistic(x) -> float:
    """Hartigan's dip statistic of a 1-D sample (0 for a zero-range sample)."""
    arr = np.sort(check_sample(x, min_size=4, name="dip sample"))
    if arr[0] == arr[-1]:
        return 0.0
    return float(_dip_statistic_sorted(arr))


@dataclass(frozen=True)
class DipResult:
    statistic: float
    p_value: float
    n_boot: int
    sample_size: int

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "p_value": self.p_value,
                "n_boot": self.n_boot, "sample_size": self.sample_size}

    @classmethod
    def from_dict(cls, d: dict) -> "DipResult":
        return cls(statistic=d["statistic"], p_value=d["p_value"],
                   n_boot=d["n_boot"], sample_size=d["sample_size"])


_null_cache: dict[tuple[int, int, int], np.ndarray] = {}
_null_lock = threading.Lock()


def _null_dips(n: int, n_boot: int, seed: int, n_jobs: int = 1) -> np.ndarray:
    """Dips of n_boot uniform(0,1) samples of size n.

    Replicate i draws from its own stream seeded with seed + i, so the result
    does not depend on scheduling. Cached per (n, n_boot, seed).
    """
    key = (n, n_boot, seed)
    with _null_lock:
        hit = _null_cache.get(key)
    if hit is not None:
        return hit

    def one(i: int) -> float:
        sample = np.random.default_rng(seed + i).uniform(size=n)
        sample.sort()
        return float(_dip_statistic_sorted(sample))

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            dips = np.fromiter(pool.map(one, range(n_boot)), dtype=float, count=n_boot)
    else:
        dips = np.fromiter((one(i) for i in range(n_boot)), dtype=float, count=n_boot)

    with _null_lock:
        if len(_null_cache) > 16:
            _null_cache.clear()
        _null_cache[key] = dips
    return dips


def dip_test(x, n_boot: int = 1000, seed: int = 0, n_jobs: int = 1) -> DipResult:
    """Dip statistic with a Monte Carlo p-value against the uniform null.

    The p-value is the proportion of n_boot uniform samples of the same size
    whose dip exceeds the observed dip.
    """
    arr = check_sample(x, min_size=4, name="dip sample")
    if n_boot < 100:
        raise InputError("n_boot must be >= 100")
    stat = dip_statistic(arr)
    if stat == 0.0:
        return DipResult(statistic=0.0, p_value=1.0, n_boot=n_boot, sample_size=arr.size)
    null = _null_dips(arr.size, n_boot, seed, n_jobs=n_jobs)
    p = float(np.mean(null > stat))
    return DipResult(statistic=stat, p_value=p, n_boot=n_boot, sample_size=arr.size)


@dataclass(frozen=True)
class DensityEstimate:
    kernel_points: np.ndarray
    densities: np.ndarray
    pareto_radius: float
    degenerate: bool = False

    def integral(self) -> float:
        return float(np.trapezoid(self.densities, self.kernel_points))

    def to_dict(self) -> dict:
        return {"kernel_points": self.kernel_points.tolist(),
                "densities": self.densities.tolist(),
                "pareto_radius": self.pareto_radius,
                "degenerate": self.degenerate}

    @classmethod
    def from_dict(cls, d: dict) -> "DensityEstimate":
        return cls(kernel_points=np.asarray(d["kernel_points"], dtype=float),
                   densities=np.asarray(d["densities"], dtype=float),
                   pareto_radius=d["pareto_radius"],
                   degenerate=d.get("degenerate", False))


def pareto_radius(x, max_points: int = 1000) -> float:
    """Kernel radius: the 18th percentile of pairwise absolute differences.

    Samples larger than max_points are thinned to evenly spaced order
    statistics before the O(n^2) difference computation.
    """
    xs = np.sort(check_sample(x, min_size=2, name="sample"))
    if xs.size > max_points:
        idx = np.round(np.linspace(0, xs.size - 1, max_points)).astype(int)
        xs = xs[idx]
    iu = np.triu_indices(xs.size, 1)
    diffs = np.abs(xs[:, None] - xs[None, :])[iu]
    return float(np.percentile(diffs, 18))


def pareto_density(x, grid_size: int = 512) -> DensityEstimate:
    """Uniform-kernel density with the Pareto radius as bandwidth.

    The raw estimate counts sample points within the radius of each of
    grid_size evenly spaced kernel points spanning [min - r, max + r], then
    is renormalized to integrate to one. A zero-range sample yields a
    degenerate spike flagged as such.
    """
    xs = np.sort(check_sample(x, min_size=10, name="sample"))
    lo, hi = float(xs[0]), float(xs[-1])
    if lo == hi:
        delta = max(1.0, abs(lo)) * 1e-9
        grid = np.array([lo - delta, lo, lo + delta])
        dens = np.array([0.0, 1.0 / delta, 0.0])
        return DensityEstimate(grid, dens, pareto_radius=0.0, degenerate=True)

    radius = pareto_radius(xs)
    if radius <= 0:
        # heavy duplication can zero the percentile; fall back to grid spacing
        radius = (hi - lo) / grid_size
    grid = np.linspace(lo - radius, hi + radius, grid_size)
    left = np.searchsorted(xs, grid - radius, side="left")
    right = np.searchsorted(xs, grid + radius, side="right")
    raw = (right - left) / (xs.size * 2.0 * radius)
    area = float(np.trapezoid(raw, grid))
    dens = raw / area if area > 0 else raw
    return DensityEstimate(grid, dens, pareto_radius=radius, degenerate=False)


def local_maxima(estimate: DensityEstimate, min_fraction: float = 0.1,
                 min_drop: float = 0.1) -> list[int]:
    """Grid indices of the significant local density maxima.

    Candidate maxima below min_fraction of the global peak are dropped, and
    two candidates only count as separate modes when the valley between them
    falls at least min_drop below the smaller of the two: the count-based
    estimate is jagged, so raw local maxima overcount.
    """
    d = estimate.densities
    peak = float(np.max(d))
    candidates = []
    for i in range(len(d)):
        left = d[i - 1] if i > 0 else -np.inf
        right = d[i + 1] if i < len(d) - 1 else -np.inf
        if d[i] > left and d[i] >= right and d[i] >= min_fraction * peak:
            candidates.append(i)
    kept: list[int] = []
    for idx in candidates:
        if not kept:
            kept.append(idx)
            continue
        prev = kept[-1]
        valley = float(np.min(d[prev:idx + 1]))
        if valley <= (1.0 - min_drop) * min(d[prev], d[idx]):
            kept.append(idx)
        elif d[idx] > d[prev]:
            kept[-1] = idx
    return kept


@dataclass(frozen=True)
class MdSeries:
    label: str
    density: DensityEstimate
    dip: DipResult | None
    sample_size: int

    def to_dict(self) -> dict:
        return {"label": self.label, "density": self.density.to_dict(),
                "dip": self.dip.to_dict() if self.dip else None,
                "sample_size": self.sample_size}

    @classmethod
    def from_dict(cls, d: dict) -> "MdSeries":
        return cls(label=d["label"], density=DensityEstimate.from_dict(d["density"]),
                   dip=DipResult.from_dict(d["dip"]) if d.get("dip") else None,
                   sample_size=d["sample_size"])


@dataclass(frozen=True)
class MdPlotSpec:
    """One mirrored-density silhouette per series, with optional model overlay."""

    series: tuple[MdSeries, ...]
    overlay_x: np.ndarray | None = None
    overlay_density: np.ndarray | None = None
    boundaries: tuple[float, ...] = ()

    def value_range(self) -> tuple[float, float]:
        los = [float(s.density.kernel_points[0]) for s in self.series]
        his = [float(s.density.kernel_points[-1]) for s in self.series]
        if self.boundaries:
            los.append(min(self.boundaries))
            his.append(max(self.boundaries))
        return min(los), max(his)

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "series": [s.to_dict() for s in self.series],
            "overlay": None if self.overlay_x is None else {
                "x": self.overlay_x.tolist(),
                "density": self.overlay_density.tolist(),
            },
            "boundaries": list(self.boundaries),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MdPlotSpec":
        overlay = d.get("overlay")
        return cls(series=tuple(MdSeries.from_dict(s) for s in d["series"]),
                   overlay_x=None if overlay is None else np.asarray(overlay["x"], dtype=float),
                   overlay_density=None if overlay is None else np.asarray(overlay["density"], dtype=float),
                   boundaries=tuple(d.get("boundaries", ())))


def md_plot(series, model=None, boundaries=(), n_boot: int = 1000, seed: int = 0,
            grid_size: int = 512, dip_sample: int | None = None) -> MdPlotSpec:
    """Assemble mirrored-density data for named samples, in input order.

    Each series gets a Pareto density estimate and a dip test (skipped below
    4 points). `model` adds an overlay curve of its PDF across the plot range;
    `boundaries` adds rule lines. `dip_sample` caps the dip test sample size
    (seeded subsample) for large inputs.
    """
    if not series:
        raise InputError("md_plot needs at least one series")
    built = []
    for label, sample in series:
        arr = check_sample(sample, min_size=1, name=f"series {label!r}")
        est = pareto_density(arr) if arr.size >= 10 else _tiny_density(arr)
        dip = None
        if arr.size >= 4 and not est.degenerate:
            dip_arr = arr
            if dip_sample is not None and arr.size > dip_sample:
                dip_arr = np.random.default_rng(seed).choice(arr, size=dip_sample, replace=False)
            dip = dip_test(dip_arr, n_boot=n_boot, seed=seed)
        built.append(MdSeries(label=str(label), density=est, dip=dip, sample_size=arr.size))
    if all(s.density.degenerate for s in built):
        raise InputError("all series are degenerate (zero range)")

    overlay_x = overlay_d = None
    if model is not None:
        lo = min(float(s.density.kernel_points[0]) for s in built)
        hi = max(float(s.density.kernel_points[-1]) for s in built)
        overlay_x = np.linspace(lo, hi, grid_size)
        overlay_d = model.pdf(overlay_x)
    return MdPlotSpec(series=tuple(built), overlay_x=overlay_x,
                      overlay_density=overlay_d, boundaries=tuple(float(b) for b in boundaries))


def _tiny_density(arr: np.ndarray) -> DensityEstimate:
    """Fallback silhouette for series too small for the Pareto estimate."""
    lo, hi = float(np.min(arr)), float(np.max(arr))
    if lo == hi:
        delta = max(1.0, abs(lo)) * 1e-9
        return DensityEstimate(np.array([lo - delta, lo, lo + delta]),
                               np.array([0.0, 1.0 / delta, 0.0]), 0.0, degenerate=True)
    width = hi - lo
    grid = np.array([lo - 0.05 * width, lo, hi, hi + 0.05 * width])
    dens = np.array([0.0, 1.0 / (1.1 * width), 1.0 / (1.1 * width), 0.0])
    return DensityEstimate(grid, dens, pareto_radius=width, degenerate=False)
