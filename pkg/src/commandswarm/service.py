"""HTTP + WebSocket service exposing sessions, commands, traces, snapshots.

Pipeline rejections (unsafe command, invalid tree) are 200-with-trace: the
pipeline worked, the command failed its gates. 503 is reserved for a
required external endpoint being down (fail-closed).
"""

from __future__ import annotations

import asyncio
import threading
import time
import uuid
from typing import Optional

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel, Field

from . import swarm_sim
from .pipeline import CommandInput, ExecutionStatus, PipelineConfig, Session

SNAPSHOT_RATE_HZ = 30.0  # WebSocket snapshot coalescing bound


class CreateSessionRequest(BaseModel):
    scenario_id: int = Field(ge=1, le=5)
    seed: Optional[int] = None


class CreateSessionResponse(BaseModel):
    session_id: str


class CommandRequest(BaseModel):
    text: str
    language: Optional[str] = None
    shots: int = Field(default=0, ge=0, le=2)


class ManagedSession:
    """Session plus the lock, event buffer, and background stepping loop."""

    def __init__(self, session: Session, ticks_per_second: float):
        self.session = session
        self.lock = threading.Lock()
        self.events: list[dict] = []
        self.tick_interval = 1.0 / ticks_per_second
        self._thread: Optional[threading.Thread] = None
        session.on_stage = self._record_event

    def _record_event(self, stage: str, payload: dict) -> None:
        self.events.append({"type": "trace_stage", "stage": stage, "payload": payload})

    def ensure_loop(self) -> None:
        if self._thread is not None and self._thread.is_alive():
            return
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def _run(self) -> None:
        while True:
            with self.lock:
                if self.session.executor is None:
                    return
                self.session.step()
            time.sleep(self.tick_interval)

    def snapshot(self) -> dict:
        with self.lock:
            return self.session.world.snapshot()


def create_app(config: Optional[PipelineConfig] = None,
               ticks_per_second: float = 100.0) -> FastAPI:
    app = FastAPI(title="commandswarm")
    sessions: dict[str, ManagedSession] = {}
    app.state.sessions = sessions
    pipeline_config = config or PipelineConfig()

    def get_session(session_id: str) -> ManagedSession:
        managed = sessions.get(session_id)
        if managed is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return managed

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/scenarios")
    def scenarios():
        return [
            {"id": sid, "description": swarm_sim.load_scenario(sid).description}
            for sid in swarm_sim.scenario_ids()
        ]

    @app.post("/sessions", status_code=201, response_model=CreateSessionResponse)
    def create_session(request: CreateSessionRequest):
        session_id = uuid.uuid4().hex[:12]
        seed = request.seed if request.seed is not None else 42
        session = Session(session_id, scenario_id=request.scenario_id, seed=seed,
                          config=pipeline_config)
        sessions[session_id] = ManagedSession(session, ticks_per_second)
        return CreateSessionResponse(session_id=session_id)

    @app.post("/sessions/{session_id}/command")
    def submit_command(session_id: str, request: CommandRequest):
        managed = get_session(session_id)
        with managed.lock:
            command = CommandInput(
                session_id=session_id,
                raw_text=request.text,
                language_hint=request.language,
            )
            trace = managed.session.handle_command(command, shots=request.shots)
        if trace.execution_status == ExecutionStatus.RUNNING:
            managed.ensure_loop()
        body = trace.to_dict()
        fail_closed = (
            trace.safety_verdict is not None
            and trace.safety_verdict.decision == "Reject"
            and trace.safety_verdict.reason == "safety service unavailable"
        )
        if trace.stage_error is not None or fail_closed:
            raise HTTPException(status_code=503, detail=body)
        return body

    @app.post("/sessions/{session_id}/stop")
    def stop_session(session_id: str):
        managed = get_session(session_id)
        with managed.lock:
            managed.session.stop()
        return {"status": "stopped"}

    @app.get("/sessions/{session_id}/trace")
    def get_traces(session_id: str):
        managed = get_session(session_id)
        with managed.lock:
            return [t.to_dict() for t in managed.session.traces]

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        return get_session(session_id).snapshot()

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str):
        managed = sessions.get(session_id)
        if managed is None:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        last_tick = -1
        sent_events = 0
        try:
            while True:
                while sent_events < len(managed.events):
                    await websocket.send_json(managed.events[sent_events])
                    sent_events += 1
                snapshot = managed.snapshot()
                if snapshot["tick"] > last_tick:
                    last_tick = snapshot["tick"]
                    await websocket.send_json({"type": "snapshot", "payload": snapshot})
                await asyncio.sleep(1.0 / SNAPSHOT_RATE_HZ)
        except WebSocketDisconnect:
            return

    return app
