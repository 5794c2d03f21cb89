"""Independent brute-force oracles used by the test suite.

These deliberately avoid the algorithms under test: the dip oracle solves a
minimax fitting problem with linear programs, and the agglomeration oracle
re-derives every cluster-pair distance from the original matrix at each step.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

# ---------------------------------------------------------------------------
# Dip statistic oracle
#
# dip(F_n) = inf over unimodal CDFs G of sup |F_n - G|. The optimum can always
# be realized (as an infimum) by a G whose mode sits at a sample point, with
# an optional jump there, that is piecewise linear between sample points:
# a mode inside a gap can be slid onto the next sample point by replacing the
# segment with its chord without increasing the sup distance. For each mode
# position j this is a feasibility region linear in the G values and the
# tolerance, so minimizing the tolerance is a small LP:
#   variables g_0..g_{n-1} (value at each sample point, g_j split into a left
#   limit and a value to allow the jump) plus eps;
#   boxes    g_i >= (i+1)/n - eps and g_i <= i/n + eps (sup condition on the
#            staircase, split accordingly at j);
#   shape    slopes nondecreasing left of j, nonincreasing right of j,
#            everything monotone within [0, 1].
# ---------------------------------------------------------------------------


def _dip_lp_mode_at(x: np.ndarray, j: int) -> float:
    n = x.size
    nv = n + 2  # g values (mode point doubled) + eps
    eps = nv - 1
    gjm, gjp = j, j + 1

    def vidx(i: int) -> int:
        # variable index of G(x_i); left of the mode uses the left limit
        return i if i < j else i + 1

    A, b = [], []

    def add(coeffs, rhs):
        row = np.zeros(nv)
        for idx, c in coeffs:
            row[idx] += c
        A.append(row)
        b.append(rhs)

    f_hi = lambda i: (i + 1) / n  # value of the empirical CDF at x_i
    f_lo = lambda i: i / n        # its left limit

    for i in range(n):
        if i == j:
            continue
        add([(vidx(i), -1.0), (eps, -1.0)], -f_hi(i))
        add([(vidx(i), 1.0), (eps, -1.0)], f_lo(i))
    add([(gjm, 1.0), (eps, -1.0)], f_lo(j))
    add([(gjm, -1.0), (eps, -1.0)], -f_lo(j))
    add([(gjp, 1.0), (eps, -1.0)], f_hi(j))
    add([(gjp, -1.0), (eps, -1.0)], -f_hi(j))

    chain = [vidx(i) for i in range(j)] + [gjm, gjp] + [vidx(i) for i in range(j + 1, n)]
    for u, v in zip(chain, chain[1:]):
        add([(u, 1.0), (v, -1.0)], 0.0)

    left_vals = [vidx(i) for i in range(j)] + [gjm]
    for t in range(len(left_vals) - 2):
        h0 = x[t + 1] - x[t]
        h1 = x[t + 2] - x[t + 1]
        # (v1 - v0)/h0 <= (v2 - v1)/h1
        add([(left_vals[t], -h1), (left_vals[t + 1], h0 + h1), (left_vals[t + 2], -h0)], 0.0)

    right_vals = [gjp] + [vidx(i) for i in range(j + 1, n)]
    for t in range(len(right_vals) - 2):
        h0 = x[j + t + 1] - x[j + t]
        h1 = x[j + t + 2] - x[j + t + 1]
        # (v1 - v0)/h0 >= (v2 - v1)/h1
        add([(right_vals[t], h1), (right_vals[t + 1], -h0 - h1), (right_vals[t + 2], h0)], 0.0)

    bounds = [(0.0, 1.0)] * (nv - 1) + [(0.0, 0.5)]
    c = np.zeros(nv)
    c[eps] = 1.0
    res = linprog(c, A_ub=np.array(A), b_ub=np.array(b), bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(f"dip oracle LP failed for mode {j}: {res.message}")
    return float(res.fun)


def dip_oracle(sample) -> float:
    """Exact dip of a small sample by exhaustive mode placement."""
    x = np.sort(np.asarray(sample, dtype=float))
    return min(_dip_lp_mode_at(x, j) for j in range(x.size))


# ---------------------------------------------------------------------------
# Naive agglomeration oracle
#
# Every step recomputes all cluster-pair distances from the original matrix:
# min/max/mean over member pairs for single/complete/average, and the
# closed-form quadratic expressions in leaf weights for the geometric
# linkages (uniform weights for average/ward/centroid, halving weights along
# the merge tree for wpgma/median).
# ---------------------------------------------------------------------------


class _OracleCluster:
    def __init__(self, members, weights, cid):
        self.members = list(members)
        self.weights = np.asarray(weights, dtype=float)
        self.id = cid

    @property
    def size(self):
        return len(self.members)


def _pair_distance(d, d2, a: _OracleCluster, b: _OracleCluster, linkage: str) -> float:
    block = d[np.ix_(a.members, b.members)]
    if linkage == "single":
        return float(np.min(block))
    if linkage == "complete":
        return float(np.max(block))
    if linkage == "average":
        return float(np.mean(block))
    if linkage == "wpgma":
        block2 = d[np.ix_(a.members, b.members)]
        return float(a.weights @ block2 @ b.weights)

    # squared-space linkages: distance between generalized centers
    def center_sq(u: _OracleCluster, v: _OracleCluster) -> float:
        cross = float(u.weights @ d2[np.ix_(u.members, v.members)] @ v.weights)
        intra_u = float(u.weights @ d2[np.ix_(u.members, u.members)] @ u.weights)
        intra_v = float(v.weights @ d2[np.ix_(v.members, v.members)] @ v.weights)
        return cross - 0.5 * intra_u - 0.5 * intra_v

    if linkage in ("median", "centroid"):
        return float(np.sqrt(max(center_sq(a, b), 0.0)))
    if linkage == "ward":
        na, nb = a.size, b.size
        return float(np.sqrt(max(2.0 * na * nb / (na + nb) * center_sq(a, b), 0.0)))
    raise ValueError(linkage)


def agglomerate_oracle(d, linkage: str):
    """Merge sequence [(left id, right id, height, size)] by full re-scan."""
    d = np.asarray(d, dtype=float)
    d2 = d * d
    n = d.shape[0]
    uniform = linkage in ("average", "ward", "centroid")
    clusters = [_OracleCluster([i], [1.0], i) for i in range(n)]
    merges = []
    next_id = n
    while len(clusters) > 1:
        best = None
        for p in range(len(clusters)):
            for q in range(p + 1, len(clusters)):
                dist = _pair_distance(d, d2, clusters[p], clusters[q], linkage)
                if best is None or dist < best[0]:
                    best = (dist, p, q)
        dist, p, q = best
        a, b = clusters[p], clusters[q]
        members = a.members + b.members
        if uniform:
            weights = np.full(len(members), 1.0 / len(members))
        else:
            weights = np.concatenate([a.weights * 0.5, b.weights * 0.5])
        merged = _OracleCluster(members, weights, next_id)
        merges.append((a.id, b.id, dist, len(members)))
        clusters = [c for t, c in enumerate(clusters) if t not in (p, q)]
        clusters.append(merged)
        next_id += 1
    return merges


# ---------------------------------------------------------------------------
# Misc small oracles
# ---------------------------------------------------------------------------


def pairwise_oracle(values, fn) -> np.ndarray:
    """Distance matrix by an explicit double loop over a per-pair function."""
    n = len(values)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = fn(values[i], values[j])
    return out


def accuracy_oracle(a, b) -> float:
    """Best agreement over all bijections, by explicit permutation search."""
    import itertools

    a = np.asarray(a)
    b = np.asarray(b)
    la = sorted(set(a.tolist()))
    lb = sorted(set(b.tolist()))
    small, big, x, y = (la, lb, a, b) if len(la) <= len(lb) else (lb, la, b, a)
    best = 0
    for perm in itertools.permutations(big, len(small)):
        mapping = dict(zip(small, perm))
        best = max(best, sum(1 for u, v in zip(x, y) if mapping[u] == v))
    return best / len(a)
