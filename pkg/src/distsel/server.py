"""JSON API carrying the human-in-the-loop workflow for the browser UI.

All statistics are computed server-side; the UI only renders payloads.
Sessions are persisted as one JSON file each (atomic replace) under the
session directory and updated under a per-session lock, last write wins.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import uuid
from pathlib import Path

import numpy as np
from fastapi import Body, FastAPI, HTTPException
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .datasets import CARTESIAN, DataMatrix, LabelVector
from .gmm import GaussianMixture1D, chi_square_gof, qq_data
from .pipeline import (CHI_SAMPLE, SessionState, built_in_partition, run_evaluate,
                       run_model, run_scan, session_from_dict)
from .validation import InputError, normalize_labels


class SessionStore:
    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, SessionState] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def path(self, session_id: str) -> Path:
        return self.directory / f"{session_id}.json"

    def get(self, session_id: str) -> SessionState:
        with self._registry_lock:
            state = self._sessions.get(session_id)
        if state is not None:
            return state
        path = self.path(session_id)
        if path.exists():
            state = session_from_dict(json.loads(path.read_text(encoding="utf-8")))
            with self._registry_lock:
                self._sessions[session_id] = state
            return state
        raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")

    def create(self, session_id: str | None) -> SessionState:
        session_id = session_id or uuid.uuid4().hex
        state = SessionState(session_id=session_id)
        with self._registry_lock:
            self._sessions[session_id] = state
        return state

    def get_or_create(self, session_id: str | None) -> SessionState:
        if session_id:
            try:
                return self.get(session_id)
            except HTTPException:
                return self.create(session_id)
        return self.create(None)

    def persist(self, state: SessionState) -> None:
        payload = json.dumps(state.to_dict(), sort_keys=True)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp, self.path(state.session_id))
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)


def _bad_request(message: str) -> HTTPException:
    return HTTPException(status_code=400, detail=message)


def create_app(session_dir, ui_dir=None) -> FastAPI:
    app = FastAPI(title="distsel", version="0.1.0")
    store = SessionStore(session_dir)
    app.state.store = store

    def _session(session_id: str | None) -> SessionState:
        if not session_id:
            raise _bad_request("missing session id")
        return store.get(session_id)

    @app.post("/scan")
    def post_scan(payload: dict = Body(...)):
        data = payload.get("data")
        metrics = payload.get("metrics")
        if not data or not metrics:
            raise _bad_request("payload needs 'data' and 'metrics'")
        state = store.get_or_create(payload.get("session"))
        with store.lock(state.session_id):
            try:
                state.data = DataMatrix(
                    np.asarray(data["values"], dtype=float),
                    feature_names=tuple(data.get("feature_names") or ()),
                    coordinate_system=data.get("coordinate_system", CARTESIAN))
                if payload.get("labels") is not None:
                    state.labels = LabelVector(normalize_labels(
                        np.asarray(payload["labels"], dtype=int)))
                state.seed = int(payload.get("seed", 0))
                state.scan = run_scan(state.data, metrics, seed=state.seed,
                                      n_boot=int(payload.get("n_boot", 1000)))
            except (InputError, KeyError, TypeError, ValueError) as exc:
                raise _bad_request(str(exc)) from exc
            store.persist(state)
            return {"schema": 1, "session": state.session_id,
                    "scan": state.scan.to_dict()}

    @app.get("/scan")
    def get_scan(session: str):
        state = _session(session)
        if state.scan is None:
            raise _bad_request("session has no scan yet")
        return {"schema": 1, "session": state.session_id, "scan": state.scan.to_dict()}

    @app.get("/density/{metric}")
    def get_density(metric: str, session: str):
        state = _session(session)
        if state.scan is None:
            raise _bad_request("session has no scan yet")
        for entry in state.scan.entries:
            if entry.metric == metric and entry.plot is not None:
                return {"schema": 1, "session": state.session_id,
                        "metric": metric, "plot": entry.plot.to_dict()}
        raise HTTPException(status_code=404, detail=f"no density for metric {metric!r}")

    def _model_payload(state: SessionState) -> dict:
        overlay = None
        if state.model is not None and state.metric is not None:
            # the UI displays only server-computed numbers; ship the PDF curve
            values = state.distance_feature().values
            xs = np.linspace(float(np.min(values)), float(np.max(values)), 512)
            overlay = {"x": xs.tolist(), "density": state.model.pdf(xs).tolist()}
        return {"schema": 1, "session": state.session_id, "metric": state.metric,
                "model": state.model.to_dict() if state.model else None,
                "boundaries": state.boundaries.to_dict() if state.boundaries else None,
                "bd": state.bd,
                "overlay": overlay,
                "gof": state.gof.to_dict() if state.gof else None,
                "qq": state.qq.to_dict() if state.qq else None,
                "warning": state.warning}

    @app.post("/gmm/fit")
    def post_fit(payload: dict = Body(...)):
        state = _session(payload.get("session"))
        with store.lock(state.session_id):
            metric = payload.get("metric") or state.metric
            if metric is None:
                raise _bad_request("payload needs 'metric' (none chosen yet)")
            state.metric = str(metric)
            try:
                run_model(state, int(payload.get("m", 2)),
                          restarts=int(payload.get("restarts", 5)),
                          seed=payload.get("seed"))
            except (InputError, ValueError) as exc:
                raise _bad_request(str(exc)) from exc
            store.persist(state)
            return _model_payload(state)

    @app.put("/gmm/params")
    def put_params(payload: dict = Body(...)):
        state = _session(payload.get("session"))
        with store.lock(state.session_id):
            if state.metric is None:
                raise _bad_request("fit a model before editing parameters")
            try:
                values = state.distance_feature().values
                model = GaussianMixture1D.from_parameters(
                    payload["weights"], payload["means"], payload["sds"], data=values)
            except (InputError, KeyError, TypeError, ValueError) as exc:
                raise _bad_request(str(exc)) from exc
            state.model = model
            state.warning = None
            if model.m >= 2:
                state.boundaries = model.boundaries()
                state.bd = state.boundaries.last
                if state.bd is None:
                    state.warning = "no Bayes boundary found between the last two components"
            else:
                state.boundaries = None
                state.bd = None
            state.gof = chi_square_gof(model, values, max_points=CHI_SAMPLE, seed=state.seed)
            state.qq = qq_data(model, values)
            store.persist(state)
            return _model_payload(state)

    @app.get("/gmm")
    def get_model(session: str):
        state = _session(session)
        if state.model is None:
            raise _bad_request("session has no model yet")
        return _model_payload(state)

    @app.post("/evaluate")
    def post_evaluate(payload: dict = Body(...)):
        state = _session(payload.get("session"))
        with store.lock(state.session_id):
            specs = payload.get("partitions")
            if not specs:
                raise _bad_request("payload needs 'partitions'")
            partitions = []
            try:
                for spec in specs:
                    name = spec.get("name") or spec.get("algorithm") or "partition"
                    if "labels" in spec:
                        labels = normalize_labels(np.asarray(spec["labels"], dtype=int))
                    elif "algorithm" in spec:
                        labels = built_in_partition(state, spec["algorithm"],
                                                    int(spec.get("k", 2)),
                                                    linkage=spec.get("linkage"))
                    else:
                        raise InputError(f"partition {name!r} needs 'labels' or 'algorithm'")
                    partitions.append((name, labels))
                reports = run_evaluate(state, partitions)
            except (InputError, ValueError) as exc:
                raise _bad_request(str(exc)) from exc
            store.persist(state)
            return {"schema": 1, "session": state.session_id,
                    "reports": [r.to_dict() for r in reports],
                    "plots": {name: state.evaluation_plots[name].to_dict()
                              for name, _ in partitions}}

    @app.get("/report")
    def get_report(session: str):
        return JSONResponse(_session(session).to_dict())

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(port: int, session_dir, host: str = "127.0.0.1", ui_dir=None) -> None:
    """Run the JSON API (blocking)."""
    import uvicorn

    uvicorn.run(create_app(session_dir, ui_dir=ui_dir), host=host, port=port,
                log_level="warning")
