"""HTTP service exposing sessions, steps, and the grammar to clients."""

from __future__ import annotations

import threading
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import HTMLResponse, JSONResponse
from pydantic import BaseModel

from .bundle import serialize_bundle
from .data import Dataset
from .errors import (
    CapabilityError,
    ExplanationError,
    ParameterError,
    SessionError,
    StepRejectedError,
)
from .html_export import export_html
from .models import ModelHandle
from .session import Session

# parameter guidance surfaced with next-step suggestions: which parameters a
# step needs, and which of those the session context can already provide
STEP_PARAMETERS: dict[str, dict[str, list[str]]] = {
    "Select_Variable": {"required": ["variable"], "optional": [], "from_context": []},
    "SHAP_Attribution": {
        "required": ["instance"],
        "optional": ["mode", "b_permutations", "background_rows", "seed"],
        "from_context": ["instance"],
    },
    "BD_Attribution": {
        "required": ["instance"],
        "optional": ["order", "background_rows", "seed"],
        "from_context": ["instance"],
    },
    "LIME_Attribution": {
        "required": ["instance"],
        "optional": ["n_samples", "kernel_width", "top_k", "seed"],
        "from_context": ["instance"],
    },
    "Ceteris_Paribus": {
        "required": ["instance", "variable"],
        "optional": ["grid_size"],
        "from_context": ["instance", "variable"],
    },
    "Histogram": {"required": ["variable"], "optional": [], "from_context": ["variable"]},
    "Boxplot": {"required": ["variable"], "optional": [], "from_context": ["variable"]},
    "Barplot": {"required": ["variable"], "optional": [], "from_context": ["variable"]},
    "Scatter_Plot": {
        "required": ["variable"],
        "optional": ["bins", "seed"],
        "from_context": ["variable"],
    },
    "Mosaic_Plot": {
        "required": ["var_a", "var_b"],
        "optional": [],
        "from_context": ["var_a"],
    },
    "Pairwise_Correlation": {"required": [], "optional": ["method"], "from_context": []},
    "Graphical_Networks": {
        "required": [],
        "optional": ["threshold", "method"],
        "from_context": [],
    },
    "Partial_Dependence": {
        "required": ["variable"],
        "optional": ["grid_size", "instance_cap"],
        "from_context": ["variable"],
    },
    "Accumulated_Local": {
        "required": ["variable"],
        "optional": ["k_bins"],
        "from_context": ["variable"],
    },
    "SHAP_Dependence": {
        "required": ["variable"],
        "optional": ["mode", "b_permutations", "instance_cap", "background_rows"],
        "from_context": ["variable"],
    },
    "Permutational_Importance": {
        "required": [],
        "optional": ["loss", "b_repeats", "seed"],
        "from_context": [],
    },
    "LOCO_Importance": {"required": [], "optional": ["loss"], "from_context": []},
    "SHAP_Importance": {
        "required": [],
        "optional": ["mode", "b_permutations", "instance_cap", "background_rows"],
        "from_context": [],
    },
}


class StepRequest(BaseModel):
    symbol: str
    params: dict[str, Any] = {}


class SessionRequest(BaseModel):
    seed: int | None = None


class _Registry:
    """Concurrent session store; per-session mutations are serialized."""

    def __init__(self):
        self._lock = threading.Lock()
        self._sessions: dict[str, tuple[Session, threading.Lock]] = {}

    def create(self, session: Session) -> None:
        with self._lock:
            self._sessions[session.id] = (session, threading.Lock())

    def get(self, session_id: str) -> tuple[Session, threading.Lock]:
        with self._lock:
            try:
                return self._sessions[session_id]
            except KeyError:
                raise SessionError(f"unknown session {session_id!r}") from None


def _error_body(code: str, message: str, permitted: list[str] | None = None) -> dict:
    body: dict = {"code": code, "message": message}
    if permitted is not None:
        body["permitted_steps"] = permitted
    return body


def _next_steps_doc(session: Session) -> dict:
    ns = session.next_steps()
    context_has = {
        "instance": session.context.instance is not None,
        "variable": session.context.variable is not None,
        "var_a": session.context.variable is not None,
    }
    permitted = []
    for symbol in ns.terminals:
        spec = STEP_PARAMETERS[symbol]
        needed = [
            p
            for p in spec["required"]
            if not (p in spec["from_context"] and context_has.get(p, False))
        ]
        permitted.append(
            {
                "symbol": symbol,
                "required": needed,
                "optional": spec["optional"],
            }
        )
    return {
        "permitted": [p["symbol"] for p in permitted],
        "end_of_dialogue": ns.end_of_dialogue,
        "parameters": {p["symbol"]: {"required": p["required"], "optional": p["optional"]}
                       for p in permitted},
    }


def create_app(
    dataset: Dataset,
    model: ModelHandle,
    seed: int = 0,
    ui_asset: str | None = None,
    snapshot_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="explanation-dialogue service")
    registry = _Registry()
    app.state.registry = registry
    app.state.dataset = dataset
    app.state.model = model
    app.state.seed = seed

    if snapshot_dir is not None:

        @app.on_event("shutdown")
        def _snapshot_sessions() -> None:
            from pathlib import Path

            out = Path(snapshot_dir)
            out.mkdir(parents=True, exist_ok=True)
            with registry._lock:
                items = list(registry._sessions.items())
            for sid, (session, lock) in items:
                with lock:
                    text = serialize_bundle(session.export_bundle())
                (out / f"session-{sid}.json").write_text(text, encoding="utf-8")

    from .grammar import iema_grammar

    grammar = iema_grammar()

    @app.exception_handler(SessionError)
    async def _unknown_session(_: Request, exc: SessionError):
        return JSONResponse(status_code=404, content=_error_body("unknown_session", str(exc)))

    @app.get("/", response_class=HTMLResponse)
    def live_shell():
        # no embedded bundle: the dashboard detects live mode and talks to
        # the same-origin session endpoints
        from .assets import asset_text

        ui = ui_asset if ui_asset is not None else asset_text("viewer.js")
        return HTMLResponse(
            "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
            "<title>Explanation dialogue</title></head>"
            f"<body><div id=\"app\"></div><script>\n{ui}\n</script></body></html>"
        )

    @app.get("/grammar")
    def get_grammar():
        return grammar.to_json()

    @app.get("/dataset/summary")
    def dataset_summary():
        return dataset.summary()

    @app.post("/sessions", status_code=201)
    def create_session(req: SessionRequest | None = None):
        session_seed = seed if req is None or req.seed is None else req.seed
        session = Session(dataset, model, seed=session_seed)
        registry.create(session)
        return {"id": session.id, "seed": session.seed}

    @app.get("/sessions/{session_id}")
    def get_bundle(session_id: str):
        session, lock = registry.get(session_id)
        with lock:
            return session.export_bundle()

    @app.get("/sessions/{session_id}/next-steps")
    def get_next_steps(session_id: str):
        session, lock = registry.get(session_id)
        with lock:
            return _next_steps_doc(session)

    @app.post("/sessions/{session_id}/steps")
    def post_step(session_id: str, req: StepRequest):
        session, lock = registry.get(session_id)
        with lock:
            try:
                step = session.apply_step(req.symbol, req.params)
            except StepRejectedError as e:
                return JSONResponse(
                    status_code=409,
                    content=_error_body("grammar_violation", str(e), list(e.permitted)),
                )
            except (ParameterError, CapabilityError, ExplanationError) as e:
                return JSONResponse(
                    status_code=422, content=_error_body("bad_parameters", str(e))
                )
            return {"step": step.to_doc(), "next_steps": _next_steps_doc(session)}

    @app.delete("/sessions/{session_id}/steps/last")
    def undo_step(session_id: str):
        session, lock = registry.get(session_id)
        with lock:
            try:
                session.undo()
            except SessionError as e:
                return JSONResponse(
                    status_code=409, content=_error_body("empty_history", str(e))
                )
            return {"history_length": len(session.history), "next_steps": _next_steps_doc(session)}

    @app.get("/sessions/{session_id}/export", response_class=HTMLResponse)
    def export_session_html(session_id: str):
        session, lock = registry.get(session_id)
        with lock:
            text = serialize_bundle(session.export_bundle())
        return HTMLResponse(export_html(text, ui_asset=ui_asset))

    return app


def run_service(
    dataset,
    model,
    port: int,
    seed: int = 0,
    ui_asset: str | None = None,
    snapshot_dir: str | None = None,
) -> None:
    import uvicorn

    if not 1 <= port <= 65535:
        raise SessionError(f"port must lie in [1, 65535], got {port}")
    app = create_app(dataset, model, seed=seed, ui_asset=ui_asset, snapshot_dir=snapshot_dir)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
