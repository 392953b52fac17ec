"""HTTP session layer for human labeling.

Each session owns one engine running on its own thread. The engine blocks
inside oracle queries; the service publishes the pending query, accepts the
matching answer, and serves state snapshots taken at step boundaries, so
readers never observe a torn mid-step state. Budget, tree, and bound-curve
telemetry all come from those snapshots.
"""

import os
import threading
import time
import uuid
from dataclasses import replace

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from splitlabel.bound import NodeStats, maximize_bound
from splitlabel.data import Dataset, export_labels_text
from splitlabel.engine import Engine, OracleError, RunConfig
from splitlabel.splitters import ConfigError, SplitterConfig

BOUNDARY_TIMEOUT = 60.0


class StaleQueryError(Exception):
    """Submitted query_id does not match the pending query."""


class HumanOracle:
    """Blocking oracle bridged to HTTP through a condition variable.

    ``query`` publishes the pending request and waits for ``submit`` with the
    matching query id; ``abort`` wakes any waiter with an error so the engine
    can terminate gracefully. Query ids increase strictly within a session.
    """

    def __init__(self):
        self._cond = threading.Condition()
        self._pending = None
        self._answer = None
        self._aborted = False
        self._finished = False
        self._query_counter = 0

    def query(self, example_id, features=None):
        with self._cond:
            if self._aborted:
                raise OracleError("session aborted")
            self._query_counter += 1
            self._pending = {"query_id": self._query_counter,
                             "example_id": int(example_id)}
            self._answer = None
            self._cond.notify_all()
            while self._answer is None and not self._aborted:
                self._cond.wait()
            self._pending = None
            if self._answer is None:
                self._cond.notify_all()
                raise OracleError("session aborted")
            answer = self._answer
            self._answer = None
            return answer

    def submit(self, query_id, answer):
        with self._cond:
            if self._pending is None or self._pending["query_id"] != query_id:
                pending = None if self._pending is None else self._pending["query_id"]
                raise StaleQueryError(
                    f"submitted query_id {query_id}, pending is {pending}"
                )
            self._answer = int(answer)
            self._cond.notify_all()

    def abort(self):
        with self._cond:
            self._aborted = True
            self._cond.notify_all()

    def finish(self):
        with self._cond:
            self._finished = True
            self._cond.notify_all()

    def pending(self):
        with self._cond:
            return None if self._pending is None else dict(self._pending)

    def wait_for_boundary(self, after_query_id=0, timeout=BOUNDARY_TIMEOUT):
        """Block until a newer pending query appears or the run finishes."""
        deadline = time.monotonic() + timeout
        with self._cond:
            while True:
                if self._finished or self._aborted:
                    return True
                if (self._pending is not None
                        and self._pending["query_id"] > after_query_id):
                    return True
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return False
                self._cond.wait(remaining)


class Session:
    """One engine, its oracle bridge, and its published snapshots."""

    def __init__(self, session_id, config, dataset, checkpoint_path=None):
        self.id = session_id
        self.config = config
        self.dataset = dataset
        self.checkpoint_path = checkpoint_path
        self.oracle = HumanOracle()
        self.engine = Engine(config, dataset, self.oracle)
        self.command_lock = threading.Lock()
        self._snap_lock = threading.Lock()
        self.bound_curve = []
        self.assignment = None
        self.export_text = None
        self._publish(initial=True)
        self.thread = threading.Thread(target=self._run, daemon=True)
        self.thread.start()

    def _run(self):
        assignment, _trace = self.engine.run(on_step=self._on_step)
        with self._snap_lock:
            self.assignment = assignment
        self.oracle.finish()
        self._publish()

    def _on_step(self, record, engine):
        with self._snap_lock:
            self.bound_curve.append(record.total_bound_after)
        self._publish()
        if self.checkpoint_path is not None:
            self.engine.save_checkpoint(self.checkpoint_path)

    def _publish(self, initial=False):
        engine = self.engine
        snapshot = {
            "step_index": engine.step_index,
            "budget_remaining": engine.budget,
            "budget": engine.config.budget,
            "leaves": engine.tree.leaf_summaries(),
            "history_tail": [r.to_dict() for r in engine.trace[-50:]],
        }
        snapshot["total_bound"] = sum(
            leaf_bound(engine, leaf["id"]) for leaf in snapshot["leaves"]
        )
        with self._snap_lock:
            snapshot["bound_curve"] = list(self.bound_curve)
            self._snapshot = snapshot

    def status(self):
        if not self.thread.is_alive() and self.assignment is not None:
            return "finished"
        return "awaiting_label" if self.oracle.pending() else "running"

    def snapshot(self):
        with self._snap_lock:
            snap = dict(self._snapshot)
        snap["status"] = self.status()
        return snap

    def finalize(self):
        """Stop the engine if needed and cache the label export."""
        with self.command_lock:
            if self.export_text is not None:
                return self.export_text
            self.oracle.abort()
            self.thread.join(timeout=BOUNDARY_TIMEOUT)
            if self.thread.is_alive():
                raise HTTPException(500, "engine failed to stop")
            if self.assignment is None:
                self.assignment = self.engine.finalize()
            self.export_text = export_labels_text(self.assignment)
            self._publish()
            return self.export_text


def leaf_bound(engine, leaf_id):
    node = engine.tree.node(leaf_id)
    return maximize_bound(NodeStats(m=node.m, n=node.n, N=node.N)).value


class CreateSessionRequest(BaseModel):
    dataset: str
    config: dict | None = None
    num_classes: int | None = None


class SubmitLabelRequest(BaseModel):
    query_id: int
    label: int


def parse_config(raw, default=None):
    """RunConfig from a JSON dict, filling gaps from a default config."""
    base = default or RunConfig(budget=100)
    if not raw:
        return base
    raw = dict(raw)
    value = raw.pop("splitter", None)
    try:
        if isinstance(value, str):
            splitter = SplitterConfig(kind=value, seed=raw.get("seed", base.seed))
        elif value is not None:
            splitter = SplitterConfig(**value)
        elif "seed" in raw:
            # keep the one-seed convention of the command line: a run seed
            # with no explicit splitter config also reseeds the splitter
            splitter = replace(base.splitter, seed=raw["seed"])
        else:
            splitter = base.splitter
        return replace(base, splitter=splitter, **raw)
    except (TypeError, ConfigError) as err:
        raise HTTPException(400, f"bad config: {err}")


def create_app(datasets, default_config=None, checkpoint_dir=None, static_dir=None):
    """Service over a registry of named datasets.

    Sessions live in memory; when checkpoint_dir is set, each session also
    drops a resumable engine snapshot after every step.
    """
    app = FastAPI(title="splitlabel session service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions = {}

    def get_session(session_id):
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, f"unknown session {session_id}")
        return session

    @app.get("/health")
    def health():
        return {"status": "ok", "sessions": len(sessions)}

    @app.get("/datasets")
    def list_datasets():
        return {
            name: {"size": ds.size, "num_classes": ds.num_classes,
                   "render_hint": ds.render_hint}
            for name, ds in datasets.items()
        }

    @app.post("/sessions")
    def create_session(request: CreateSessionRequest):
        dataset = datasets.get(request.dataset)
        if dataset is None:
            raise HTTPException(404, f"unknown dataset {request.dataset!r}")
        if request.num_classes is not None and dataset.num_classes is None:
            dataset = Dataset(features=dataset.features, truth=dataset.truth,
                              num_classes=request.num_classes,
                              render_hint=dataset.render_hint)
        if dataset.num_classes is None:
            raise HTTPException(400, "dataset has no label column; "
                                     "pass num_classes when creating the session")
        config = parse_config(request.config, default_config)
        session_id = uuid.uuid4().hex[:12]
        checkpoint_path = None
        if checkpoint_dir is not None:
            os.makedirs(checkpoint_dir, exist_ok=True)
            checkpoint_path = os.path.join(checkpoint_dir, f"{session_id}.json")
        try:
            session = Session(session_id, config, dataset, checkpoint_path)
        except ConfigError as err:
            raise HTTPException(400, str(err))
        sessions[session_id] = session
        session.oracle.wait_for_boundary()
        return {
            "session_id": session_id,
            "status": session.status(),
            "dataset": request.dataset,
            "size": dataset.size,
            "num_classes": dataset.num_classes,
            "render_hint": dataset.render_hint,
            "config": {
                "budget": config.budget,
                "training_ratio": config.training_ratio,
                "quality": config.quality,
                "splitter": config.splitter.kind,
                "min_split_size": config.min_split_size,
                "seed": config.seed,
            },
        }

    @app.get("/sessions/{session_id}/query")
    def get_next_query(session_id: str):
        session = get_session(session_id)
        pending = session.oracle.pending()
        if pending is None:
            return {"status": session.status()}
        example_id = pending["example_id"]
        return {
            "status": "awaiting_label",
            "query_id": pending["query_id"],
            "example_id": example_id,
            "features": session.dataset.features[example_id].tolist(),
            "render_hint": session.dataset.render_hint,
            "num_classes": session.dataset.num_classes,
            "budget_remaining": session.engine.budget,
        }

    @app.post("/sessions/{session_id}/labels")
    def submit_label(session_id: str, request: SubmitLabelRequest):
        session = get_session(session_id)
        if not 0 <= request.label < session.dataset.num_classes:
            raise HTTPException(
                422, f"label must be in [0, {session.dataset.num_classes})"
            )
        with session.command_lock:
            try:
                session.oracle.submit(request.query_id, request.label)
            except StaleQueryError as err:
                raise HTTPException(409, str(err))
            session.oracle.wait_for_boundary(after_query_id=request.query_id)
        snapshot = session.snapshot()
        snapshot["accepted_query_id"] = request.query_id
        return snapshot

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        return get_session(session_id).snapshot()

    @app.post("/sessions/{session_id}/finalize")
    def finalize_session(session_id: str):
        text = get_session(session_id).finalize()
        return PlainTextResponse(text, media_type="text/csv")

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True))
    return app
