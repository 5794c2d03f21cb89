"""Command-line interface: generate, distances, scan, fit, boundaries,
evaluate, table1, serve. Everything takes --seed; outputs go to --out as
JSON/CSV/SVG. Exit code is 0 unless a hard error occurs."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import pipeline
from .clustering import evaluate_summary
from .datasets import (generate_atom, generate_golfball, generate_two_gaussians,
                       load_csv, save_csv)
from .distances import (compute_distance_matrix, load_distance_matrix, parse_metric,
                        save_distance_matrix, validate_distance_matrix)
from .gmm import GaussianMixture1D, fit_gmm
from .plotting import render_svg
from .validation import InputError, normalize_labels


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
def main():
    """Distance selection and clustering evaluation via distance distributions."""


@main.command()
@click.argument("name", type=click.Choice(["two_gaussians", "atom", "golfball"]))
@click.option("--n", default=500, show_default=True, help="Total number of points.")
@click.option("--seed", default=0, show_default=True)
@click.option("--shift", default=0.2, show_default=True,
              help="two_gaussians: half the distance between cluster centers.")
@click.option("--scale", default=0.1, show_default=True,
              help="two_gaussians: per-feature standard deviation.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def generate(name, n, seed, shift, scale, out):
    """Write a synthetic dataset as CSV (labels as a trailing 'cluster' column)."""
    try:
        if name == "two_gaussians":
            data, labels = generate_two_gaussians(n // 2, shift, scale, seed=seed)
        elif name == "atom":
            data, labels = generate_atom(n, seed=seed)
        else:
            data, labels = generate_golfball(n, seed=seed), None
        save_csv(data, out, labels=labels)
    except InputError as exc:
        _fail(str(exc))
    click.echo(f"wrote {out}")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", default="euclidean", show_default=True)
@click.option("--label-column", default=None, help="Column to drop before computing distances.")
@click.option("--no-header", is_flag=True, help="Input CSV has no header row.")
@click.option("--jobs", default=1, show_default=True, help="Worker threads for row blocks.")
@click.option("--validate", is_flag=True, help="Report metric-space properties.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def distances(input_path, metric, label_column, no_header, jobs, validate, out):
    """Compute a distance matrix and write it as square CSV."""
    try:
        data, _ = load_csv(input_path, has_header=not no_header, label_column=label_column)
        dist = compute_distance_matrix(data, parse_metric(metric), n_jobs=jobs)
        save_distance_matrix(dist, out)
        if validate:
            rep = validate_distance_matrix(dist)
            click.echo(f"symmetry {rep.max_asymmetry:.2e}, diagonal {rep.max_diagonal:.2e}, "
                       f"negatives {rep.negative_entries}, triangle violations "
                       f"{rep.triangle_violations}/{rep.triangle_checked}"
                       f"{' (exhaustive)' if rep.exhaustive else ''}")
    except InputError as exc:
        _fail(str(exc))
    click.echo(f"wrote {out}")


def _load_labels_file(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and r[0].strip()]
    cells = [r[0].strip() for r in rows]
    try:
        float(cells[0])
    except ValueError:
        cells = cells[1:]  # header row
    try:
        values = np.array([int(float(c)) for c in cells])
    except ValueError as exc:
        raise InputError(f"label file {path} contains non-integer values") from exc
    return normalize_labels(values)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metrics", required=True,
              help="Comma-separated metric ids, e.g. euclidean,manhattan,chord.")
@click.option("--label-column", default=None)
@click.option("--no-header", is_flag=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--n-boot", default=1000, show_default=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="Scan JSON output.")
@click.option("--svg-dir", default=None, type=click.Path(file_okay=False),
              help="Write one mirrored-density SVG per metric.")
@click.option("--choose", default=None,
              help="Record this metric as the selection in --session-out.")
@click.option("--session-out", default=None, type=click.Path(dir_okay=False),
              help="Write a session JSON carrying the dataset and chosen metric.")
def scan(input_path, metrics, label_column, no_header, seed, n_boot, out, svg_dir,
         choose, session_out):
    """Rank metrics by dip p-value. Selection stays with you: pass --choose."""
    try:
        data, labels = load_csv(input_path, has_header=not no_header, label_column=label_column)
        result = pipeline.run_scan(data, [m.strip() for m in metrics.split(",") if m.strip()],
                                   seed=seed, n_boot=n_boot)
    except InputError as exc:
        _fail(str(exc))
    click.echo(f"{'rank':>4}  {'metric':<20} {'dip statistic':>13}  {'dip p':>7}")
    for rank, name in enumerate(result.ranking, start=1):
        entry = next(e for e in result.entries if e.metric == name)
        if entry.error:
            click.echo(f"{rank:>4}  {name:<20} {'error':>13}  {entry.error}")
        else:
            click.echo(f"{rank:>4}  {name:<20} {entry.dip.statistic:>13.5f}  "
                       f"{entry.dip.p_value:>7.3f}")
    if result.note:
        click.echo(f"note: {result.note}")
    if out:
        pipeline.dump_json(result, out)
        click.echo(f"wrote {out}")
    if svg_dir:
        Path(svg_dir).mkdir(parents=True, exist_ok=True)
        for entry in result.entries:
            if entry.plot is not None:
                safe = entry.metric.replace("(", "_").replace(")", "").replace(".", "_")
                render_svg(entry.plot, Path(svg_dir) / f"{safe}.svg")
        click.echo(f"wrote SVGs to {svg_dir}")
    if choose:
        if choose not in [e.metric for e in result.entries]:
            _fail(f"--choose {choose!r} was not among the scanned metrics")
        if not session_out:
            _fail("--choose needs --session-out")
        state = pipeline.SessionState(session_id=Path(session_out).stem, seed=seed)
        state.data = data
        state.labels = labels
        state.scan = result
        state.metric = choose
        pipeline.dump_json(state.to_dict(), session_out)
        click.echo(f"chose {choose}; wrote {session_out}")


@main.command()
@click.option("--session", "session_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Session JSON from `scan --choose`.")
@click.option("--input", "input_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", default=None)
@click.option("--distances", "distances_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Precomputed distance matrix CSV instead of raw data.")
@click.option("--label-column", default=None)
@click.option("--no-header", is_flag=True)
@click.option("-m", "--components", default=2, show_default=True)
@click.option("--restarts", default=5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="Model JSON output.")
def fit(session_path, input_path, metric, distances_path, label_column, no_header,
        components, restarts, seed, out):
    """Fit a Gaussian mixture to the distance feature of the chosen metric."""
    try:
        if session_path:
            state = pipeline.session_from_dict(json.loads(Path(session_path).read_text()))
            state.seed = seed
        elif distances_path:
            from .distances import extract_distance_feature
            dist = load_distance_matrix(distances_path)
            values = extract_distance_feature(dist).values
            model = fit_gmm(pipeline._subsample(values, pipeline.FIT_SAMPLE, seed),
                            components, restarts=restarts, seed=seed)
            _emit_model(model, values, out, seed)
            return
        else:
            if not input_path or not metric:
                _fail("fit needs --session, or --input with --metric, or --distances")
            data, _ = load_csv(input_path, has_header=not no_header, label_column=label_column)
            state = pipeline.SessionState(seed=seed)
            state.data = data
            state.metric = metric
        pipeline.run_model(state, components, restarts=restarts, seed=seed)
    except InputError as exc:
        _fail(str(exc))
    click.echo(f"metric: {state.metric}")
    click.echo(f"weights: {np.round(state.model.weights_, 4).tolist()}")
    click.echo(f"means:   {np.round(state.model.means_, 4).tolist()}")
    click.echo(f"sds:     {np.round(state.model.sds_, 4).tolist()}")
    if state.boundaries is not None:
        click.echo(f"boundaries: {[round(b, 6) for b in state.boundaries.boundaries]}")
        click.echo(f"decision boundary (last): {state.bd}")
    click.echo(f"chi-square p = {state.gof.p_value:.4g} on {state.gof.dof} dof; "
               f"QQ max deviation = {state.qq.max_abs_deviation:.4g}")
    if state.warning:
        click.echo(f"warning: {state.warning}")
    if out:
        pipeline.dump_json(state.model, out)
        click.echo(f"wrote {out}")
    if session_path:
        pipeline.dump_json(state.to_dict(), session_path)
        click.echo(f"updated {session_path}")


def _emit_model(model, values, out, seed) -> None:
    from .gmm import chi_square_gof, qq_data
    click.echo(f"weights: {np.round(model.weights_, 4).tolist()}")
    click.echo(f"means:   {np.round(model.means_, 4).tolist()}")
    click.echo(f"sds:     {np.round(model.sds_, 4).tolist()}")
    if model.m >= 2:
        bounds = model.boundaries()
        click.echo(f"boundaries: {[round(b, 6) for b in bounds.boundaries]}")
        click.echo(f"decision boundary (last): {bounds.last}")
    gof = chi_square_gof(model, values, max_points=pipeline.CHI_SAMPLE, seed=seed)
    qq = qq_data(model, values)
    click.echo(f"chi-square p = {gof.p_value:.4g} on {gof.dof} dof; "
               f"QQ max deviation = {qq.max_abs_deviation:.4g}")
    if out:
        pipeline.dump_json(model, out)
        click.echo(f"wrote {out}")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None, type=click.Path(dir_okay=False))
def boundaries(model_path, out):
    """Bayes decision boundaries of a stored mixture model."""
    try:
        model = GaussianMixture1D.from_dict(json.loads(Path(model_path).read_text()))
        bounds = model.boundaries()
    except InputError as exc:
        _fail(str(exc))
    for b, p, pair in zip(bounds.boundaries, bounds.posterior_at_boundary, bounds.pairs):
        click.echo(f"components {pair[0]}/{pair[1]}: boundary {b:.9g} (posterior {p:.6f})")
    for pair in bounds.missing_pairs:
        click.echo(f"components {pair[0]}/{pair[1]}: no dominance switch, no boundary")
    if out:
        pipeline.dump_json(bounds.to_dict(), out)
        click.echo(f"wrote {out}")


@main.command()
@click.option("--session", "session_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--input", "input_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", default=None)
@click.option("--distances", "distances_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--label-column", default=None)
@click.option("--no-header", is_flag=True)
@click.option("--model", "model_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--bd", default=None, type=float, help="Decision boundary override.")
@click.option("--labels", "label_files", multiple=True, type=click.Path(exists=True, dir_okay=False),
              help="Partition label files (repeatable).")
@click.option("--cluster", "cluster_specs", multiple=True,
              help="Built-in clusterer spec like ward:2 or kmeans:3 (repeatable).")
@click.option("--summary-csv", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Published per-cluster medians and 2*sd values (name,m1,2sd1,...; NA allowed).")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.option("--svg-dir", default=None, type=click.Path(file_okay=False))
def evaluate(session_path, input_path, metric, distances_path, label_column, no_header,
             model_path, bd, label_files, cluster_specs, summary_csv, seed, out, svg_dir):
    """Check partitions against the decision boundary, published-table style."""
    try:
        if summary_csv:
            if bd is None:
                _fail("--summary-csv needs --bd")
            rows = _load_summary_rows(summary_csv)
            reports = evaluate_summary(rows, bd)
            click.echo(pipeline.render_report_table(reports))
            if out:
                pipeline.dump_json({"schema": 1, "reports": [r.to_dict() for r in reports]}, out)
                click.echo(f"wrote {out}")
            return

        state = _evaluation_session(session_path, input_path, metric, distances_path,
                                    label_column, no_header, seed)
        if model_path:
            state.model = GaussianMixture1D.from_dict(json.loads(Path(model_path).read_text()))
            bounds = state.model.boundaries() if state.model.m >= 2 else None
            state.boundaries = bounds
            state.bd = bounds.last if bounds else None
        if bd is not None:
            state.bd = bd
        if state.bd is None:
            _fail("no decision boundary: give --model or --bd, or fit the session first")

        partitions = []
        for path in label_files:
            partitions.append((Path(path).stem, _load_labels_file(path)))
        for spec in cluster_specs:
            algo, _, k = spec.partition(":")
            partitions.append((spec, pipeline.built_in_partition(state, algo, int(k or 2),
                                                                 seed=seed)))
        if not partitions:
            _fail("nothing to evaluate: give --labels and/or --cluster")
        reports = pipeline.run_evaluate(state, partitions)
    except InputError as exc:
        _fail(str(exc))
    click.echo(pipeline.render_report_table(reports))
    if out:
        pipeline.dump_json({"schema": 1, "bd": state.bd,
                            "reports": [r.to_dict() for r in reports]}, out)
        click.echo(f"wrote {out}")
    if svg_dir:
        Path(svg_dir).mkdir(parents=True, exist_ok=True)
        for name, plot in state.evaluation_plots.items():
            safe = "".join(ch if ch.isalnum() else "_" for ch in name)
            render_svg(plot, Path(svg_dir) / f"{safe}.svg")
        click.echo(f"wrote SVGs to {svg_dir}")


def _evaluation_session(session_path, input_path, metric, distances_path,
                        label_column, no_header, seed):
    if session_path:
        state = pipeline.session_from_dict(json.loads(Path(session_path).read_text()))
        return state
    state = pipeline.SessionState(seed=seed)
    if distances_path:
        dist = load_distance_matrix(distances_path)
        # stash the ingested matrix via a closure-free override
        state.distance_matrix = lambda metric=None: dist  # type: ignore[assignment]
        from .distances import extract_distance_feature
        state.distance_feature = lambda metric=None: extract_distance_feature(dist)  # type: ignore[assignment]
        state.metric = "ingested"
        return state
    if not input_path or not metric:
        raise InputError("evaluate needs --session, --distances, or --input with --metric")
    data, _ = load_csv(input_path, has_header=not no_header, label_column=label_column)
    state.data = data
    state.metric = metric
    return state


def _load_summary_rows(path):
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            name = row[0].strip()
            cells = []
            body = [c.strip() for c in row[1:] if c.strip()]
            for i in range(0, len(body) - 1, 2):
                pair = (body[i], body[i + 1])
                if pair[0].upper() == "NA" or pair[1].upper() == "NA":
                    cells.append(None)
                else:
                    cells.append((float(pair[0]), float(pair[1])))
            rows.append((name, cells))
    return rows


@main.command()
@click.option("--seeds", default="1,2,3,4,5,6,7,8,9,10", show_default=True)
@click.option("--shifts", default="0.1,0.2,0.3", show_default=True)
@click.option("--n", default=250, show_default=True, help="Points per cluster.")
@click.option("--scale", default=0.1, show_default=True)
@click.option("-m", "--components", default=2, show_default=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False))
def table1(seeds, shifts, n, scale, components, out):
    """Two-cluster shift benchmark summary across seeds."""
    try:
        report = pipeline.run_table1(
            [int(s) for s in seeds.split(",") if s.strip()],
            shifts=[float(s) for s in shifts.split(",") if s.strip()],
            n_per_cluster=n, scale=scale, m=components)
    except InputError as exc:
        _fail(str(exc))
    click.echo(pipeline.render_table1(report))
    if out:
        pipeline.dump_json(report, out)
        click.echo(f"wrote {out}")


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--session-dir", default="sessions", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--ui-dir", default=None, type=click.Path(file_okay=False),
              help="Serve a built frontend from /ui.")
def serve(port, host, session_dir, ui_dir):
    """Run the JSON API for the browser UI."""
    from .server import serve as run_server

    click.echo(f"serving on http://{host}:{port} (sessions in {session_dir})")
    run_server(port, session_dir, host=host, ui_dir=ui_dir)


if __name__ == "__main__":
    main()
