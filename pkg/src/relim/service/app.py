"""FastAPI application exposing sessions over HTTP/JSON."""

from __future__ import annotations

import os

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from ..caps import EngineCaps, caps_from_env
from ..errors import (
    CapExceededError,
    DomainError,
    ParseError,
    RelimError,
)
from .models import (
    ActionRequest,
    ActionResponse,
    CreateSessionRequest,
    ForkRequest,
    SeekRequest,
    SessionSummary,
)
from .sessions import SessionManager

DEFAULT_STORE = os.path.join(os.path.expanduser("~"), ".relim", "sessions")
ENV_STORE = "RELIM_STORE"


def _status_for(error: RelimError) -> int:
    if isinstance(error, ParseError):
        return 422
    if isinstance(error, CapExceededError):
        return 409
    return 400


def create_app(
    store_path: str | None = None,
    caps: EngineCaps | None = None,
    deadline_seconds: float = 60.0,
) -> FastAPI:
    store_path = store_path or os.environ.get(ENV_STORE, DEFAULT_STORE)
    caps = (caps or caps_from_env()).with_deadline(deadline_seconds)
    manager = SessionManager(store_path, caps)

    app = FastAPI(title="relim", version="0.1.0")
    app.state.manager = manager
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RelimError)
    async def relim_error_handler(request: Request, exc: RelimError):
        return JSONResponse(status_code=_status_for(exc), content=exc.to_json())

    @app.exception_handler(KeyError)
    async def missing_handler(request: Request, exc: KeyError):
        return JSONResponse(
            status_code=404,
            content={"code": "not-found", "message": f"unknown session {exc}", "details": {}},
        )

    @app.exception_handler(IndexError)
    async def cursor_handler(request: Request, exc: IndexError):
        return JSONResponse(
            status_code=400,
            content={"code": "bad-cursor", "message": f"cursor {exc} out of range", "details": {}},
        )

    @app.post("/sessions")
    def create_session(body: CreateSessionRequest):
        if body.family is None and body.text is None:
            raise DomainError("provide either a problem text or a family spec")
        initial = (
            {"family": body.family.model_dump()} if body.family is not None else {"text": body.text}
        )
        session = manager.create(initial, name=body.name, notes=body.notes)
        return session.view()

    @app.get("/sessions", response_model=list[SessionSummary])
    def list_sessions():
        return manager.list()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return manager.get(session_id).view()

    @app.post("/sessions/{session_id}/actions", response_model=ActionResponse)
    def apply_action(session_id: str, body: ActionRequest):
        return manager.apply_action(session_id, body.op, body.params)

    @app.post("/sessions/{session_id}/seek")
    def seek(session_id: str, body: SeekRequest):
        return manager.seek(session_id, body.cursor).view()

    @app.post("/sessions/{session_id}/fork")
    def fork(session_id: str, body: ForkRequest):
        return manager.fork(session_id, body.name).view()

    @app.get("/sessions/{session_id}/export", response_class=PlainTextResponse)
    def export(session_id: str):
        return manager.get(session_id).snapshot()

    @app.get("/sessions/{session_id}/replay")
    def replay(session_id: str):
        return manager.replay(session_id)

    @app.get("/health")
    def health():
        return {"ok": True, "sessions": len(manager.sessions), "warnings": manager.store.warnings}

    return app
