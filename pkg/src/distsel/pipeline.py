"""End-to-end workflow: scan metrics, model the chosen distance feature,
derive the decision boundary, and evaluate partitions against it.

The human stays in the loop: scanning only ranks metrics by dip p-value and
never selects one, and the mixture size is always caller-chosen. Large
distance features are subsampled (seeded) for the dip test, the mixture fit
and the chi-square test; the caps are explicit parameters recorded here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .clustering import (Agglomerative, KMeansLloyd, PartitionReport,
                         evaluate_partition, inter_distances, intra_distances)
from .datasets import (CARTESIAN, DataMatrix, LabelVector, generate_two_gaussians,
                       to_spherical)
from .density import DipResult, MdPlotSpec, dip_test, md_plot
from .distances import (DistanceFeature, DistanceMatrix, MetricId,
                        compute_distance_matrix, extract_distance_feature,
                        parse_metric)
from .gmm import (BayesBoundaries, GaussianMixture1D, GofResult, QqData,
                  chi_square_gof, fit_gmm, qq_data)
from .validation import InputError

DIP_SAMPLE = 5000
FIT_SAMPLE = 20000
CHI_SAMPLE = 2000


def _subsample(values: np.ndarray, cap: int | None, seed: int) -> np.ndarray:
    if cap is None or values.size <= cap:
        return values
    return np.random.default_rng(seed).choice(values, size=cap, replace=False)


@dataclass(frozen=True)
class ScanEntry:
    metric: str
    dip: DipResult | None = None
    summary: dict | None = None
    plot: MdPlotSpec | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {"metric": self.metric,
                "dip": self.dip.to_dict() if self.dip else None,
                "summary": self.summary,
                "plot": self.plot.to_dict() if self.plot else None,
                "error": self.error}

    @classmethod
    def from_dict(cls, d: dict) -> "ScanEntry":
        return cls(metric=d["metric"],
                   dip=DipResult.from_dict(d["dip"]) if d.get("dip") else None,
                   summary=d.get("summary"),
                   plot=MdPlotSpec.from_dict(d["plot"]) if d.get("plot") else None,
                   error=d.get("error"))


@dataclass(frozen=True)
class ScanResult:
    entries: tuple[ScanEntry, ...]
    ranking: tuple[str, ...]
    note: str | None = None

    def to_dict(self) -> dict:
        return {"schema": 1, "entries": [e.to_dict() for e in self.entries],
                "ranking": list(self.ranking), "note": self.note}

    @classmethod
    def from_dict(cls, d: dict) -> "ScanResult":
        return cls(entries=tuple(ScanEntry.from_dict(e) for e in d["entries"]),
                   ranking=tuple(d["ranking"]), note=d.get("note"))


def _metric_distance_matrix(data: DataMatrix, metric: MetricId, n_jobs: int = 1) -> DistanceMatrix:
    source = data
    if (metric.name == "spherical_radius" and data.coordinate_system == CARTESIAN
            and data.d == 3):
        source = to_spherical(data)
    return compute_distance_matrix(source, metric, n_jobs=n_jobs)


def run_scan(data: DataMatrix, metrics, seed: int = 0, n_boot: int = 1000,
             dip_sample: int | None = DIP_SAMPLE, grid_size: int = 512,
             n_jobs: int = 1) -> ScanResult:
    """Distance feature, dip test and density silhouette for each metric.

    Metrics are ranked by ascending dip p-value (ties by name); per-metric
    failures are recorded inline and rank last. 3-D Cartesian data is
    converted on the fly when the spherical_radius metric is requested.
    """
    metric_ids = [parse_metric(m) for m in metrics]
    if not metric_ids:
        raise InputError("run_scan needs at least one metric")
    entries = []
    for metric in metric_ids:
        label = str(metric)
        try:
            dist = _metric_distance_matrix(data, metric, n_jobs=n_jobs)
            feature = extract_distance_feature(dist)
            values = feature.values
            dip = dip_test(_subsample(values, dip_sample, seed), n_boot=n_boot, seed=seed)
            plot = md_plot([(label, values)], n_boot=n_boot, seed=seed,
                           grid_size=grid_size, dip_sample=dip_sample)
            summary = {"n": int(values.size), "min": float(np.min(values)),
                       "median": float(np.median(values)), "max": float(np.max(values))}
            entries.append(ScanEntry(metric=label, dip=dip, summary=summary, plot=plot))
        except InputError as exc:
            entries.append(ScanEntry(metric=label, error=str(exc)))

    ok = [e for e in entries if e.error is None]
    failed = [e for e in entries if e.error is not None]
    # Monte Carlo p-values saturate at 0 for strong candidates; the dip
    # statistic itself breaks those ties before falling back to the name
    ranked = sorted(ok, key=lambda e: (e.dip.p_value, -e.dip.statistic, e.metric))
    ranking = tuple([e.metric for e in ranked] + [e.metric for e in failed])
    note = None
    if ok and all(e.dip.p_value > 0.5 for e in ok):
        note = "no multimodal candidate: every scanned metric has dip p > 0.5"
    return ScanResult(entries=tuple(entries), ranking=ranking, note=note)


@dataclass
class SessionState:
    """Mutable state of one analysis session (serialized as schema-1 JSON)."""

    session_id: str = "default"
    data: DataMatrix | None = None
    labels: LabelVector | None = None
    scan: ScanResult | None = None
    metric: str | None = None
    model: GaussianMixture1D | None = None
    boundaries: BayesBoundaries | None = None
    bd: float | None = None
    gof: GofResult | None = None
    qq: QqData | None = None
    warning: str | None = None
    evaluations: list[PartitionReport] = field(default_factory=list)
    evaluation_plots: dict = field(default_factory=dict)
    seed: int = 0

    def distance_feature(self, metric: str | None = None) -> DistanceFeature:
        metric = metric or self.metric
        if self.data is None or metric is None:
            raise InputError("session has no dataset or no chosen metric")
        dist = _metric_distance_matrix(self.data, parse_metric(metric))
        return extract_distance_feature(dist)

    def distance_matrix(self, metric: str | None = None) -> DistanceMatrix:
        metric = metric or self.metric
        if self.data is None or metric is None:
            raise InputError("session has no dataset or no chosen metric")
        return _metric_distance_matrix(self.data, parse_metric(metric))

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "session_id": self.session_id,
            "seed": self.seed,
            "data": None if self.data is None else {
                "values": self.data.values.tolist(),
                "feature_names": list(self.data.feature_names),
                "coordinate_system": self.data.coordinate_system,
            },
            "labels": None if self.labels is None else self.labels.labels.tolist(),
            "scan": self.scan.to_dict() if self.scan else None,
            "metric": self.metric,
            "model": self.model.to_dict() if self.model else None,
            "boundaries": self.boundaries.to_dict() if self.boundaries else None,
            "bd": self.bd,
            "gof": self.gof.to_dict() if self.gof else None,
            "qq": self.qq.to_dict() if self.qq else None,
            "warning": self.warning,
            "evaluations": [r.to_dict() for r in self.evaluations],
            "evaluation_plots": {name: plot.to_dict()
                                 for name, plot in self.evaluation_plots.items()},
        }


def run_model(session: SessionState, m: int, restarts: int = 5, seed: int | None = None,
              fit_sample: int | None = FIT_SAMPLE, chi_sample: int | None = CHI_SAMPLE,
              qq_points: int = 200) -> SessionState:
    """Fit an m-component mixture to the session's distance feature.

    Sets the decision boundary to the last Bayes boundary (the one separating
    the final mode, where the inter distances live), attaches goodness-of-fit
    and QQ data, and warns when the chi-square test rejects while the QQ
    deviation stays small.
    """
    if session.metric is None:
        raise InputError("choose a metric before modeling")
    seed = session.seed if seed is None else seed
    values = session.distance_feature().values
    model = fit_gmm(_subsample(values, fit_sample, seed), m, restarts=restarts, seed=seed)
    session.model = model
    session.warning = None
    if m >= 2:
        bounds = model.boundaries()
        session.boundaries = bounds
        session.bd = bounds.last
        if session.bd is None:
            session.warning = "no Bayes boundary found between the last two components"
    else:
        session.boundaries = None
        session.bd = None
    session.gof = chi_square_gof(model, values, max_points=chi_sample, seed=seed)
    session.qq = qq_data(model, values, points=qq_points)
    span = float(np.max(values) - np.min(values))
    if (session.gof.p_value < 0.05 and span > 0
            and session.qq.max_abs_deviation < 0.05 * span):
        extra = (f"chi-square rejects the model (p = {session.gof.p_value:.3g}) "
                 f"but the QQ deviation is small "
                 f"({session.qq.max_abs_deviation / span:.2%} of the range); "
                 "the model may still be adequate")
        session.warning = f"{session.warning}; {extra}" if session.warning else extra
    return session


def run_evaluate(session: SessionState, partitions) -> list[PartitionReport]:
    """Evaluate named partitions against the session's decision boundary.

    `partitions` is a list of (name, labels). Each report also gets a
    mirrored-density spec of the full distance feature plus per-cluster intra
    distances, clusters ordered by descending size.
    """
    if session.bd is None:
        raise InputError("no decision boundary: model the distance feature first")
    dist = session.distance_matrix()
    feature = extract_distance_feature(dist)
    reports = []
    for name, labels in partitions:
        labels = np.asarray(labels, dtype=int)
        if labels.size != dist.n:
            raise InputError(f"partition {name!r} has {labels.size} labels for {dist.n} points")
        report = evaluate_partition(dist, labels, session.bd, name=str(name))
        reports.append(report)
        order = sorted((c for c in report.clusters), key=lambda c: (-c.size, c.cluster))
        series = [("all", feature.values)]
        series += [(f"cluster {c.cluster}", intra_distances(dist, labels, c.cluster))
                   for c in order if c.n_intra > 0]
        session.evaluation_plots[str(name)] = md_plot(
            series, boundaries=[session.bd], seed=session.seed, dip_sample=DIP_SAMPLE)
    session.evaluations.extend(reports)
    return reports


def built_in_partition(session: SessionState, algorithm: str, k: int,
                       linkage: str | None = None, seed: int | None = None) -> np.ndarray:
    """Labels from a built-in clusterer on the session's data."""
    algorithm = algorithm.lower()
    seed = session.seed if seed is None else seed
    if algorithm == "kmeans":
        if session.data is None:
            raise InputError("session has no dataset")
        return KMeansLloyd(n_clusters=k, seed=seed).fit_predict(session.data.values)
    if algorithm in ("hierarchical", "agglomerative", "hcluster"):
        return Agglomerative(linkage=linkage or "ward").fit_predict(session.distance_matrix(), k)
    # bare linkage names act as hierarchical shortcuts (ward, single, ...)
    return Agglomerative(linkage=algorithm).fit_predict(session.distance_matrix(), k)


def render_report_table(reports) -> str:
    """Text table of per-cluster criterion values, published-results style."""
    k_max = max((len(r.clusters) for r in reports), default=0)
    name_w = max([len(r.name) for r in reports] + [len("algorithm")])
    header = ["algorithm".ljust(name_w)]
    header += [f"m(t{j})+2sd(t{j})".rjust(16) for j in range(1, k_max + 1)]
    header.append("  verdict")
    lines = ["  ".join(header)]
    for r in reports:
        cells = [r.name.ljust(name_w)]
        for j in range(k_max):
            if j >= len(r.clusters) or r.clusters[j].passed is None:
                cells.append("NA".rjust(16))
            else:
                c = r.clusters[j]
                cells.append(f"{c.median:.2f}+{2 * c.robust_sd:.2f} = {c.criterion:.2f}".rjust(16))
        verdict = "NA" if r.overall_pass is None else ("pass" if r.overall_pass else "fail")
        cells.append(f"  {verdict}")
        lines.append("  ".join(cells))
    lines.append(f"boundary = {reports[0].boundary:.4g}" if reports else "")
    return "\n".join(lines)


def run_table1(seeds, shifts=(0.1, 0.2, 0.3), n_per_cluster: int = 250,
               scale: float = 0.1, m: int = 2, restarts: int = 3,
               n_boot: int = 1000, dip_sample: int | None = DIP_SAMPLE,
               fit_sample: int | None = FIT_SAMPLE,
               chi_sample: int | None = CHI_SAMPLE) -> dict:
    """Two-cluster shift benchmark: dip, model validity, boundary and
    intra-above-boundary statistics per shift, averaged over seeds.

    A cell's mixture counts as valid when the chi-square test does not reject
    it (p >= 0.05); the boundary and the intra percentage are reported either
    way so the aggregates stay defined.
    """
    seeds = [int(s) for s in seeds]
    report = {"schema": 1, "n_per_cluster": n_per_cluster, "scale": scale,
              "components": m, "seeds": seeds, "shifts": []}
    for shift in shifts:
        cells = []
        for seed in seeds:
            data, labels = generate_two_gaussians(n_per_cluster, shift, scale, seed=seed)
            dist = compute_distance_matrix(data, "euclidean")
            values = extract_distance_feature(dist).values
            dip = dip_test(_subsample(values, dip_sample, seed), n_boot=n_boot, seed=seed)
            model = fit_gmm(_subsample(values, fit_sample, seed), m,
                            restarts=restarts, seed=seed)
            gof = chi_square_gof(model, values, max_points=chi_sample, seed=seed)
            bounds = model.boundaries()
            bd = bounds.last
            cell = {"seed": seed, "dip_p": dip.p_value, "chi_p": gof.p_value,
                    "valid_gmm": bool(gof.p_value >= 0.05), "bd": bd,
                    "i_pct": None, "inter_median": float(np.median(
                        inter_distances(dist, labels.labels, 1, 2))),
                    "cluster_criteria": None}
            if bd is not None:
                part = evaluate_partition(dist, labels.labels, bd)
                cell["i_pct"] = part.pct_above
                cell["cluster_criteria"] = [c.criterion for c in part.clusters]
            cells.append(cell)

        def agg(key):
            vals = [c[key] for c in cells if c[key] is not None]
            if not vals:
                return {"mean": None, "sd": None}
            return {"mean": float(np.mean(vals)), "sd": float(np.std(vals))}

        crits = [c["cluster_criteria"] for c in cells if c["cluster_criteria"]]
        report["shifts"].append({
            "shift": shift,
            "cells": cells,
            "dip_p": agg("dip_p"),
            "chi_p": agg("chi_p"),
            "valid_fraction": float(np.mean([c["valid_gmm"] for c in cells])),
            "bd": agg("bd"),
            "i_pct": agg("i_pct"),
            "inter_median": agg("inter_median"),
            "cluster_criteria_mean": (np.mean(crits, axis=0).tolist() if crits else None),
        })
    return report


def render_table1(report: dict) -> str:
    """Text rendering of the shift benchmark, one row per shift."""
    lines = [f"{'shift':>6}  {'dip p':>7}  {'chi p':>9}  {'BD':>6}  {'I in %':>7}  "
             f"{'m(inter-pd)':>12}  per-cluster m+2sd"]
    for row in report["shifts"]:
        valid = row["valid_fraction"] >= 0.5
        chi = f"{row['chi_p']['mean']:.3f}" if valid else "no valid GMM"
        i_pct = f"{row['i_pct']['mean']:.1f}" if valid and row["i_pct"]["mean"] is not None else "/"
        crits = row["cluster_criteria_mean"]
        crit_s = "  ".join(f"{c:.3f}" for c in crits) if crits else "/"
        lines.append(f"{row['shift']:>6}  {row['dip_p']['mean']:>7.3f}  {chi:>9}  "
                     f"{row['bd']['mean']:>6.3f}  {i_pct:>7}  "
                     f"{row['inter_median']['mean']:>12.3f}  {crit_s}")
    return "\n".join(lines)


def dump_json(payload, path=None) -> str:
    """Canonical JSON (sorted keys) so identical inputs give identical bytes."""
    if hasattr(payload, "to_dict"):
        payload = payload.to_dict()
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=True)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text


def session_from_dict(payload: dict) -> SessionState:
    """Rebuild a session from its JSON form (model and results included)."""
    state = SessionState(session_id=payload.get("session_id", "default"),
                         seed=int(payload.get("seed", 0)))
    if payload.get("data"):
        d = payload["data"]
        state.data = DataMatrix(np.array(d["values"], dtype=float),
                                feature_names=tuple(d.get("feature_names") or ()),
                                coordinate_system=d.get("coordinate_system", CARTESIAN))
    if payload.get("labels"):
        state.labels = LabelVector(np.array(payload["labels"], dtype=int))
    state.metric = payload.get("metric")
    if payload.get("model"):
        state.model = GaussianMixture1D.from_dict(payload["model"])
    if payload.get("boundaries"):
        b = payload["boundaries"]
        state.boundaries = BayesBoundaries(
            boundaries=tuple(b["boundaries"]),
            posterior_at_boundary=tuple(b["posterior_at_boundary"]),
            pairs=tuple(tuple(p) for p in b["pairs"]),
            missing_pairs=tuple(tuple(p) for p in b.get("missing_pairs", ())))
    state.bd = payload.get("bd")
    state.warning = payload.get("warning")
    if payload.get("scan"):
        state.scan = ScanResult.from_dict(payload["scan"])
    if payload.get("gof"):
        state.gof = GofResult.from_dict(payload["gof"])
    if payload.get("qq"):
        state.qq = QqData.from_dict(payload["qq"])
    state.evaluations = [PartitionReport.from_dict(r)
                         for r in payload.get("evaluations", [])]
    state.evaluation_plots = {name: MdPlotSpec.from_dict(p)
                              for name, p in payload.get("evaluation_plots", {}).items()}
    return state
