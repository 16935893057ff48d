"""HTTP wrapper around the engine.

One engine instance per process; concurrent requests for the same session are
serialized with a per-session lock so state reads and writes never interleave."""
from __future__ import annotations

import threading
from collections import defaultdict
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .engine import MAX_UTTERANCE_CHARS, Engine


class ChatRequest(BaseModel):
    session_id: str = Field(min_length=1, max_length=128)
    utterance: str = Field(max_length=MAX_UTTERANCE_CHARS)


class ChatOption(BaseModel):
    doc_id: str
    title: str


class ChatResponse(BaseModel):
    session_id: str
    reply: str
    responder_id: str
    phase: str
    options: list[ChatOption] = []
    step_index: Optional[int] = None
    step_total: Optional[int] = None
    ended: bool = False
    degraded: bool = False


def create_app(engine: Optional[Engine] = None) -> FastAPI:
    app = FastAPI(title="tasktalk")
    app.state.engine = engine or Engine()
    locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
    locks_guard = threading.Lock()

    def lock_for(session_id: str) -> threading.Lock:
        with locks_guard:
            return locks[session_id]

    @app.post("/chat", response_model=ChatResponse)
    def chat(req: ChatRequest) -> ChatResponse:
        if not req.session_id.strip():
            raise HTTPException(status_code=422, detail="session_id must be non-empty")
        with lock_for(req.session_id):
            result = app.state.engine.handle_turn(req.session_id, req.utterance)
        return ChatResponse(
            session_id=result.session_id,
            reply=result.reply,
            responder_id=result.responder_id,
            phase=result.phase,
            options=[ChatOption(doc_id=i, title=t) for i, t in result.options],
            step_index=result.step_index,
            step_total=result.step_total,
            ended=result.ended,
            degraded=result.degraded,
        )

    @app.get("/session/{session_id}")
    def session(session_id: str) -> dict:
        state = app.state.engine.get_state(session_id)
        if state is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return state.to_dict()

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    return app
