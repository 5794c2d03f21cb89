"""1-D Gaussian mixtures: EM fitting, posteriors, Bayes decision boundaries,
chi-square goodness of fit and QQ data.

Initialization places component means at the (i-0.5)/M quantiles with equal
weights and sds of sample_sd/M; additional restarts jitter the means. The sd
floor of 1e-4 times the data range keeps components from collapsing onto
duplicate values. Both choices are affine-equivariant, so fitting a*x + c
reproduces the fit of x mapped through the same transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, ndtr
from scipy.stats import chi2 as chi2_dist
from sklearn.base import BaseEstimator

from .validation import InputError, check_sample

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def _log_normal(x: np.ndarray, means: np.ndarray, sds: np.ndarray) -> np.ndarray:
    """(n, M) matrix of log N(x | m_i, s_i)."""
    z = (x[:, None] - means[None, :]) / sds[None, :]
    return -0.5 * z * z - np.log(sds)[None, :] - _LOG_SQRT_2PI


def _em_run(x, weights, means, sds, max_iter, tol, sd_floor):
    """One EM run; returns (weights, means, sds, loglik, trace, floored)."""
    n = x.size
    trace = []
    floored = False
    log_w = np.log(weights)
    ll_prev = None
    for _ in range(max_iter):
        log_joint = log_w[None, :] + _log_normal(x, means, sds)
        log_norm = logsumexp(log_joint, axis=1)
        ll = float(np.sum(log_norm))
        trace.append(ll)
        resp = np.exp(log_joint - log_norm[:, None])
        nk = resp.sum(axis=0)
        safe_nk = np.maximum(nk, 1e-300)
        weights = nk / n
        means = (resp * x[:, None]).sum(axis=0) / safe_nk
        var = (resp * (x[:, None] - means[None, :]) ** 2).sum(axis=0) / safe_nk
        sds = np.sqrt(var)
        if np.any(sds < sd_floor):
            sds = np.maximum(sds, sd_floor)
            floored = True
        log_w = np.log(np.maximum(weights, 1e-300))
        if ll_prev is not None and abs(ll - ll_prev) <= tol * (abs(ll_prev) + 1e-300):
            break
        ll_prev = ll
    log_joint = log_w[None, :] + _log_normal(x, means, sds)
    ll = float(np.sum(logsumexp(log_joint, axis=1)))
    trace.append(ll)
    return weights, means, sds, ll, trace, floored


@dataclass(frozen=True)
class BayesBoundaries:
    """Roots of equal adjacent-component posteriors where dominance switches."""

    boundaries: tuple[float, ...]
    posterior_at_boundary: tuple[float, ...]
    pairs: tuple[tuple[int, int], ...]
    missing_pairs: tuple[tuple[int, int], ...] = ()

    @property
    def last(self) -> float | None:
        return self.boundaries[-1] if self.boundaries else None

    def to_dict(self) -> dict:
        return {"boundaries": list(self.boundaries),
                "posterior_at_boundary": list(self.posterior_at_boundary),
                "pairs": [list(p) for p in self.pairs],
                "missing_pairs": [list(p) for p in self.missing_pairs]}


class GaussianMixture1D(BaseEstimator):
    """EM-fitted mixture of M univariate Gaussians.

    Fitted attributes: weights_, means_ (ascending), sds_, log_likelihood_,
    n_samples_, converged_, floored_, weak_components_, ll_trace_.
    """

    def __init__(self, n_components: int = 2, restarts: int = 5,
                 max_iter: int = 1000, tol: float = 1e-8, seed: int = 0):
        self.n_components = n_components
        self.restarts = restarts
        self.max_iter = max_iter
        self.tol = tol
        self.seed = seed

    def fit(self, x):
        m = int(self.n_components)
        if m < 1:
            raise InputError("n_components must be >= 1")
        x = check_sample(x, min_size=10 * m, name="sample")
        span = float(np.max(x) - np.min(x))
        sd_floor = 1e-4 * span if span > 0 else 1e-12 * max(1.0, abs(float(x[0])))
        sample_sd = float(np.std(x))
        if sample_sd == 0.0:
            sample_sd = sd_floor

        base_means = np.quantile(x, (np.arange(m) + 0.5) / m)
        best = None
        for r in range(self.restarts):
            means0 = base_means.copy()
            if r > 0:
                rng = np.random.default_rng(self.seed + r)
                means0 = means0 + rng.normal(size=m) * (sample_sd / m)
            weights0 = np.full(m, 1.0 / m)
            sds0 = np.full(m, max(sample_sd / m, sd_floor))
            result = _em_run(x, weights0, means0, sds0, self.max_iter, self.tol, sd_floor)
            if best is None or result[3] > best[3]:
                best = result

        weights, means, sds, ll, trace, floored = best
        order = np.argsort(means, kind="stable")
        self.weights_ = weights[order]
        self.means_ = means[order]
        self.sds_ = sds[order]
        self.log_likelihood_ = ll
        self.n_samples_ = int(x.size)
        self.ll_trace_ = trace
        self.floored_ = floored
        self.converged_ = len(trace) - 1 < self.max_iter
        self.weak_components_ = [int(i) for i in np.where(self.weights_ < 1.0 / (10 * x.size))[0]]
        return self

    @classmethod
    def from_parameters(cls, weights, means, sds, data=None, n_samples: int | None = None,
                        weight_tol: float = 1e-6) -> "GaussianMixture1D":
        """Build a model from explicit parameters (e.g. interactive edits)."""
        w = np.asarray(weights, dtype=float)
        mu = np.asarray(means, dtype=float)
        s = np.asarray(sds, dtype=float)
        if not (w.shape == mu.shape == s.shape) or w.ndim != 1 or w.size < 1:
            raise InputError("weights, means and sds must be 1-D and the same length")
        if abs(float(np.sum(w)) - 1.0) > weight_tol:
            raise InputError(f"weights must sum to 1 within {weight_tol:g}, got {np.sum(w)!r}")
        if np.any(w <= 0):
            raise InputError("weights must be positive")
        if np.any(s <= 0):
            raise InputError("sds must be positive")
        model = cls(n_components=w.size)
        order = np.argsort(mu, kind="stable")
        model.weights_ = w[order] / np.sum(w)
        model.means_ = mu[order]
        model.sds_ = s[order]
        model.n_samples_ = int(n_samples or 0)
        model.ll_trace_ = []
        model.floored_ = False
        model.converged_ = True
        model.weak_components_ = []
        if data is not None:
            data = check_sample(data, name="sample")
            model.log_likelihood_ = float(np.sum(model.logpdf(data)))
            model.n_samples_ = int(data.size)
        else:
            model.log_likelihood_ = float("nan")
        return model

    def _check_fitted(self):
        if not hasattr(self, "means_"):
            raise InputError("model is not fitted")

    @property
    def m(self) -> int:
        self._check_fitted()
        return int(self.means_.size)

    def logpdf(self, x) -> np.ndarray:
        self._check_fitted()
        x = np.atleast_1d(np.asarray(x, dtype=float))
        log_joint = np.log(self.weights_)[None, :] + _log_normal(x, self.means_, self.sds_)
        return logsumexp(log_joint, axis=1)

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.logpdf(x))

    def posterior(self, x) -> np.ndarray:
        """(n, M) posterior component probabilities, computed in log space."""
        self._check_fitted()
        x = np.atleast_1d(np.asarray(x, dtype=float))
        log_joint = np.log(self.weights_)[None, :] + _log_normal(x, self.means_, self.sds_)
        return np.exp(log_joint - logsumexp(log_joint, axis=1)[:, None])

    def cdf(self, x) -> np.ndarray:
        self._check_fitted()
        x = np.atleast_1d(np.asarray(x, dtype=float))
        z = (x[:, None] - self.means_[None, :]) / self.sds_[None, :]
        return ndtr(z) @ self.weights_

    def quantile(self, q, tol: float = 1e-9) -> np.ndarray:
        """Invert the mixture CDF by bisection to the requested tolerance."""
        self._check_fitted()
        q = np.atleast_1d(np.asarray(q, dtype=float))
        if np.any((q <= 0) | (q >= 1)):
            raise InputError("quantile probabilities must lie in (0, 1)")
        lo = np.full(q.shape, float(np.min(self.means_ - 20 * self.sds_)))
        hi = np.full(q.shape, float(np.max(self.means_ + 20 * self.sds_)))
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < q
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if float(np.max(hi - lo)) < tol:
                break
        return 0.5 * (lo + hi)

    def boundaries(self, grid_size: int = 1024, tol: float = 1e-9) -> BayesBoundaries:
        """Bayes decision boundaries between adjacent (sorted) components.

        For each pair the root of equal weighted densities inside the open
        interval between the means is located by grid scan plus bisection;
        roots where the globally dominant component does not change are
        discarded, and pairs without any valid root are reported as missing.
        """
        self._check_fitted()
        if self.m < 2:
            raise InputError("boundaries need at least 2 components")
        found, posts, pairs, missing = [], [], [], []
        log_w = np.log(self.weights_)

        def height(x, i):
            return (log_w[i] - np.log(self.sds_[i])
                    - 0.5 * ((x - self.means_[i]) / self.sds_[i]) ** 2)

        for i in range(self.m - 1):
            a, b = float(self.means_[i]), float(self.means_[i + 1])
            if not a < b:
                missing.append((i + 1, i + 2))
                continue
            xs = np.linspace(a, b, grid_size)
            diff = height(xs, i) - height(xs, i + 1)
            roots = []
            sign_change = np.where(np.sign(diff[:-1]) * np.sign(diff[1:]) < 0)[0]
            for s in sign_change:
                lo, hi = xs[s], xs[s + 1]
                flo = diff[s]
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    fmid = height(mid, i) - height(mid, i + 1)
                    if flo * fmid <= 0:
                        hi = mid
                    else:
                        lo, flo = mid, fmid
                    if hi - lo < tol:
                        break
                roots.append(0.5 * (lo + hi))
            # exact zeros on the scan grid are roots too
            roots.extend(float(xs[z]) for z in np.where(diff == 0.0)[0] if 0 < z < grid_size - 1)

            valid = []
            step = max((b - a) * 1e-7, 1e-12)
            for root in sorted(roots):
                left_dom = int(np.argmax(self.posterior(root - step)[0]))
                right_dom = int(np.argmax(self.posterior(root + step)[0]))
                if left_dom != right_dom:
                    valid.append(root)
            if valid:
                root = valid[-1]
                found.append(float(root))
                posts.append(float(self.posterior(root)[0][i]))
                pairs.append((i + 1, i + 2))
            else:
                missing.append((i + 1, i + 2))

        return BayesBoundaries(boundaries=tuple(found), posterior_at_boundary=tuple(posts),
                               pairs=tuple(pairs), missing_pairs=tuple(missing))

    def sample(self, n: int, seed: int = 0) -> np.ndarray:
        self._check_fitted()
        rng = np.random.default_rng(seed)
        comp = rng.choice(self.m, size=n, p=self.weights_)
        return rng.normal(self.means_[comp], self.sds_[comp])

    def to_dict(self) -> dict:
        self._check_fitted()
        ll = self.log_likelihood_
        return {"schema": 1, "weights": self.weights_.tolist(),
                "means": self.means_.tolist(), "sds": self.sds_.tolist(),
                "loglik": None if np.isnan(ll) else float(ll), "n": self.n_samples_}

    @classmethod
    def from_dict(cls, payload: dict) -> "GaussianMixture1D":
        model = cls.from_parameters(payload["weights"], payload["means"], payload["sds"],
                                    n_samples=payload.get("n"))
        if payload.get("loglik") is not None:
            model.log_likelihood_ = float(payload["loglik"])
        return model


def fit_gmm(values, n_components: int, restarts: int = 5, max_iter: int = 1000,
            tol: float = 1e-8, seed: int = 0) -> GaussianMixture1D:
    values = _as_values(values)
    return GaussianMixture1D(n_components=n_components, restarts=restarts,
                             max_iter=max_iter, tol=tol, seed=seed).fit(values)


def gmm_pdf(model: GaussianMixture1D, x) -> np.ndarray:
    return model.pdf(x)


def posterior(model: GaussianMixture1D, x) -> np.ndarray:
    return model.posterior(x)


def bayes_boundaries(model: GaussianMixture1D) -> BayesBoundaries:
    return model.boundaries()


def _as_values(values) -> np.ndarray:
    # accept raw arrays or anything carrying a `.values` array (DistanceFeature)
    inner = getattr(values, "values", values)
    return np.asarray(inner, dtype=float)


@dataclass(frozen=True)
class GofResult:
    chi2_statistic: float
    dof: int
    p_value: float
    bins: int
    bin_edges: tuple[float, ...]
    observed: tuple[float, ...]
    expected: tuple[float, ...]
    sample_size: int

    def to_dict(self) -> dict:
        return {"chi2_statistic": self.chi2_statistic, "dof": self.dof,
                "p_value": self.p_value, "bins": self.bins,
                "bin_edges": [None if not np.isfinite(e) else e for e in self.bin_edges],
                "sample_size": self.sample_size}

    @classmethod
    def from_dict(cls, d: dict) -> "GofResult":
        edges = tuple(-np.inf if e is None and i == 0 else np.inf if e is None else e
                      for i, e in enumerate(d.get("bin_edges", ())))
        return cls(chi2_statistic=d["chi2_statistic"], dof=d["dof"],
                   p_value=d["p_value"], bins=d["bins"], bin_edges=edges,
                   observed=(), expected=(), sample_size=d.get("sample_size", 0))


def chi_square_gof(model: GaussianMixture1D, values, bins: int | None = None,
                   min_expected: float = 5.0, max_points: int | None = None,
                   seed: int = 0) -> GofResult:
    """Chi-square test of the mixture against the sample distribution.

    Equal-width bins over the data range (default 10 per component) plus two
    tail bins carry the model mass, so expectations sum to the sample size.
    Bins are merged (smallest expectation into its smaller neighbor) until
    every expectation reaches min_expected, never below two bins. Degrees of
    freedom are bins - 1 - (3M - 1), floored at 1. `max_points` caps the
    sample by a seeded subsample, bounding the test's sensitivity on very
    large inputs.
    """
    x = check_sample(_as_values(values), min_size=50, name="sample")
    if max_points is not None and x.size > max_points:
        x = np.random.default_rng(seed).choice(x, size=max_points, replace=False)
    n = x.size
    m = model.m
    n_bins = bins if bins is not None else 10 * m
    inner = np.linspace(float(np.min(x)), float(np.max(x)), n_bins + 1)
    edges = np.concatenate([[-np.inf], inner, [np.inf]])
    observed = np.concatenate([[0.0], np.histogram(x, bins=inner)[0], [0.0]]).astype(float)
    cdf_vals = model.cdf(inner)
    expected = np.diff(np.concatenate([[0.0], cdf_vals, [1.0]])) * n

    obs = list(observed)
    exp = list(expected)
    edge_list = list(edges)
    while len(obs) > 2 and min(exp) < min_expected:
        i = int(np.argmin(exp))
        if i == 0:
            j = 1
        elif i == len(exp) - 1:
            j = i - 1
        else:
            j = i - 1 if exp[i - 1] <= exp[i + 1] else i + 1
        lo, hi = min(i, j), max(i, j)
        obs[lo] += obs[hi]
        exp[lo] += exp[hi]
        del obs[hi], exp[hi], edge_list[hi]
    if len(obs) < 2:
        raise InputError("fewer than 2 bins left after merging; sample too small for the test")

    obs_arr = np.array(obs)
    exp_arr = np.maximum(np.array(exp), 1e-300)
    stat = float(np.sum((obs_arr - exp_arr) ** 2 / exp_arr))
    dof = max(1, len(obs) - 1 - (3 * m - 1))
    p = float(chi2_dist.sf(stat, dof))
    return GofResult(chi2_statistic=stat, dof=dof, p_value=p, bins=len(obs),
                     bin_edges=tuple(float(e) for e in edge_list),
                     observed=tuple(obs_arr), expected=tuple(exp_arr), sample_size=n)


@dataclass(frozen=True)
class QqData:
    empirical: np.ndarray
    model: np.ndarray
    max_abs_deviation: float

    def to_dict(self) -> dict:
        return {"empirical": self.empirical.tolist(), "model": self.model.tolist(),
                "max_abs_deviation": self.max_abs_deviation}

    @classmethod
    def from_dict(cls, d: dict) -> "QqData":
        return cls(empirical=np.asarray(d["empirical"], dtype=float),
                   model=np.asarray(d["model"], dtype=float),
                   max_abs_deviation=d["max_abs_deviation"])


def qq_data(model: GaussianMixture1D, values, points: int = 200) -> QqData:
    """Empirical vs model quantiles at probabilities (i - 0.5) / points.

    Empirical quantiles use the Hazen convention, under which probability
    (i - 0.5) / n maps exactly onto the i-th order statistic.
    """
    if points < 10:
        raise InputError("points must be >= 10")
    x = check_sample(_as_values(values), min_size=2, name="sample")
    probs = (np.arange(points) + 0.5) / points
    emp = np.quantile(x, probs, method="hazen")
    mod = model.quantile(probs)
    return QqData(empirical=emp, model=mod,
                  max_abs_deviation=float(np.max(np.abs(emp - mod))))


@dataclass(frozen=True)
class ModeSelection:
    candidates: tuple[int, ...]
    bic: tuple[float, ...]
    suggested: int
    models: tuple[GaussianMixture1D, ...]

    def to_dict(self) -> dict:
        return {"candidates": list(self.candidates), "bic": list(self.bic),
                "suggested": self.suggested}


def select_modes(values, max_components: int = 5, restarts: int = 5,
                 max_iter: int = 1000, tol: float = 1e-8, seed: int = 0) -> ModeSelection:
    """Rank candidate component counts by BIC. Suggests, never applies."""
    x = check_sample(_as_values(values), min_size=10, name="sample")
    candidates, bics, models = [], [], []
    for m in range(1, max_components + 1):
        if x.size < 10 * m:
            break
        model = fit_gmm(x, m, restarts=restarts, max_iter=max_iter, tol=tol, seed=seed)
        candidates.append(m)
        bics.append(-2.0 * model.log_likelihood_ + (3 * m - 1) * np.log(x.size))
        models.append(model)
    if not candidates:
        raise InputError("sample too small for any candidate model")
    suggested = candidates[int(np.argmin(bics))]
    return ModeSelection(candidates=tuple(candidates), bic=tuple(bics),
                         suggested=suggested, models=tuple(models))
