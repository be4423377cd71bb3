"""Annotation sessions for human review of repair attempts.

A session bundles repair items and a roster of raters. Items are dispensed in
session order; every (rater, item) verdict is written once to an append-only
log and never changed. The machine's own verdict stays server-side: responses
built for raters are constructed from an allowlist of fields that does not
include it.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from pydantic import BaseModel, Field

from cxxrepair.compile_harness import CompileOutcome, CompileStatus, Diagnostic, Severity
from cxxrepair.errors import PanelError
from cxxrepair.metrics import AnnotationSet
from cxxrepair.reward import PatchProposal, RepairTask, Verdict, VerdictCategory


class UnknownResourceError(PanelError):
    """Session, rater, or item id that the store has never seen."""


class DuplicateAnnotationError(PanelError):
    """Second submission for a (session, item, rater) that already has a verdict."""


class SessionClosedError(PanelError):
    """Write attempted against a closed session."""


class SessionStatus(str, Enum):
    OPEN = "open"
    CLOSED = "closed"


@dataclass(frozen=True)
class PanelItem:
    item_id: str
    task: RepairTask
    patch: PatchProposal
    compile_outcome: CompileOutcome
    machine_verdict: Verdict | None = None

    def to_dict(self) -> dict:
        # Full server-side state, machine verdict included; never sent to raters.
        return {
            "item_id": self.item_id,
            "task": {
                "record_id": self.task.record_id,
                "buggy_source": self.task.buggy_source,
                "compiler_message": self.task.compiler_message,
            },
            "patch": {
                "task_id": self.patch.task_id,
                "fixed_source": self.patch.fixed_source,
                "actor_id": self.patch.actor_id,
            },
            "compile_outcome": {
                "status": self.compile_outcome.status.value,
                "raw_stderr": self.compile_outcome.raw_stderr,
                "diagnostics": [d.to_dict() for d in self.compile_outcome.diagnostics],
            },
            "machine_verdict": None
            if self.machine_verdict is None
            else {
                "category": self.machine_verdict.category.value,
                "rationale": self.machine_verdict.rationale,
                "judge_id": self.machine_verdict.judge_id,
            },
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "PanelItem":
        outcome = raw["compile_outcome"]
        verdict = raw.get("machine_verdict")
        return cls(
            item_id=str(raw["item_id"]),
            task=RepairTask(
                record_id=str(raw["task"]["record_id"]),
                buggy_source=str(raw["task"]["buggy_source"]),
                compiler_message=str(raw["task"]["compiler_message"]),
            ),
            patch=PatchProposal(
                task_id=str(raw["patch"]["task_id"]),
                fixed_source=str(raw["patch"]["fixed_source"]),
                actor_id=str(raw["patch"].get("actor_id", "unknown")),
            ),
            compile_outcome=CompileOutcome(
                status=CompileStatus(outcome["status"]),
                diagnostics=[
                    Diagnostic(
                        file=str(d["file"]),
                        line=int(d["line"]),
                        column=None if d.get("column") is None else int(d["column"]),
                        severity=Severity(d["severity"]),
                        message=str(d["message"]),
                    )
                    for d in outcome.get("diagnostics", ())
                ],
                raw_stderr=str(outcome.get("raw_stderr", "")),
                duration=0.0,
            ),
            machine_verdict=None
            if verdict is None
            else Verdict(
                category=VerdictCategory(verdict["category"]),
                rationale=str(verdict.get("rationale", "")),
                judge_id=str(verdict.get("judge_id", "")),
            ),
        )


def rater_view(item: PanelItem, position: int, total: int) -> dict:
    """Rater-facing projection of an item.

    Built field-by-field from an allowlist so the machine verdict cannot leak
    through serialization, whatever fields PanelItem grows later.
    """
    return {
        "item_id": item.item_id,
        "buggy_source": item.task.buggy_source,
        "compiler_message": item.task.compiler_message,
        "fixed_source": item.patch.fixed_source,
        "compile_status": item.compile_outcome.status.value,
        "diagnostics": [d.to_dict() for d in item.compile_outcome.diagnostics],
        "position": position,
        "total": total,
    }


@dataclass
class PanelSession:
    session_id: str
    items: list[PanelItem]
    raters: list[str]
    status: SessionStatus = SessionStatus.OPEN

    def __post_init__(self):
        if not self.session_id:
            raise PanelError("session id is empty")
        if not self.items:
            raise PanelError("session has no items")
        if not self.raters:
            raise PanelError("session has no raters")
        item_ids = [item.item_id for item in self.items]
        if len(set(item_ids)) != len(item_ids):
            raise PanelError("duplicate item ids in session")
        if len(set(self.raters)) != len(self.raters):
            raise PanelError("duplicate rater ids in session")
        if any(not rater for rater in self.raters):
            raise PanelError("empty rater id in session")

    def item_ids(self) -> list[str]:
        return [item.item_id for item in self.items]


@dataclass(frozen=True)
class AnnotationRecord:
    session_id: str
    item_id: str
    rater_id: str
    category: VerdictCategory
    submitted_at: str

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "item_id": self.item_id,
            "rater_id": self.rater_id,
            "category": self.category.value,
            "submitted_at": self.submitted_at,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "AnnotationRecord":
        return cls(
            session_id=str(raw["session_id"]),
            item_id=str(raw["item_id"]),
            rater_id=str(raw["rater_id"]),
            category=VerdictCategory(raw["category"]),
            submitted_at=str(raw["submitted_at"]),
        )


class PanelStore:
    """Durable session state: one JSON file per session plus a shared
    append-only annotation log, re-indexed into memory on startup. All writes
    go through one lock, which is what makes the write-once rule hold under
    concurrent submissions.
    """

    def __init__(self, state_dir: str | Path):
        self.state_dir = Path(state_dir)
        self.sessions_dir = self.state_dir / "sessions"
        self.log_path = self.state_dir / "annotations.jsonl"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._sessions: dict[str, PanelSession] = {}
        self._annotations: dict[str, dict[tuple[str, str], AnnotationRecord]] = {}
        self._rebuild()

    # -- persistence ---------------------------------------------------

    def _rebuild(self) -> None:
        for path in sorted(self.sessions_dir.glob("*.json")):
            try:
                raw = json.loads(path.read_text(encoding="utf-8"))
                session = PanelSession(
                    session_id=str(raw["session_id"]),
                    items=[PanelItem.from_dict(item) for item in raw["items"]],
                    raters=[str(r) for r in raw["raters"]],
                    status=SessionStatus(raw.get("status", "open")),
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise PanelError(f"corrupt session file {path}: {exc}") from exc
            self._sessions[session.session_id] = session
            self._annotations[session.session_id] = {}
        if not self.log_path.exists():
            return
        with self.log_path.open(encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    record = AnnotationRecord.from_dict(json.loads(line))
                except (json.JSONDecodeError, KeyError, ValueError) as exc:
                    raise PanelError(f"{self.log_path}:{line_no}: corrupt record: {exc}") from exc
                if record.session_id not in self._sessions:
                    raise PanelError(
                        f"{self.log_path}:{line_no}: record for unknown session "
                        f"{record.session_id!r}"
                    )
                self._annotations[record.session_id][(record.rater_id, record.item_id)] = record

    def _persist_session(self, session: PanelSession) -> None:
        payload = {
            "session_id": session.session_id,
            "status": session.status.value,
            "raters": session.raters,
            "items": [item.to_dict() for item in session.items],
        }
        path = self.sessions_dir / f"{session.session_id}.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(payload, ensure_ascii=False, indent=1), encoding="utf-8")
        tmp.replace(path)

    def _append_record(self, record: AnnotationRecord) -> None:
        with self.log_path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
            handle.flush()
            os.fsync(handle.fileno())

    # -- operations ----------------------------------------------------

    def create_session(
        self,
        items: list[PanelItem],
        raters: list[str],
        session_id: str | None = None,
    ) -> PanelSession:
        with self._lock:
            session_id = session_id or uuid.uuid4().hex[:12]
            if session_id in self._sessions:
                raise PanelError(f"session {session_id!r} already exists")
            session = PanelSession(session_id=session_id, items=list(items), raters=list(raters))
            self._persist_session(session)
            self._sessions[session_id] = session
            self._annotations[session_id] = {}
            return session

    def get_session(self, session_id: str) -> PanelSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownResourceError(f"unknown session: {session_id!r}") from None

    def session_ids(self) -> list[str]:
        return sorted(self._sessions)

    def next_item(self, session_id: str, rater_id: str) -> PanelItem | None:
        """Lowest-indexed item the rater has not yet annotated; None when done."""
        session = self.get_session(session_id)
        if rater_id not in session.raters:
            raise UnknownResourceError(f"unknown rater {rater_id!r} in session {session_id!r}")
        done = self._annotations[session_id]
        for item in session.items:
            if (rater_id, item.item_id) not in done:
                return item
        return None

    def annotated_count(self, session_id: str, rater_id: str) -> int:
        session = self.get_session(session_id)
        if rater_id not in session.raters:
            raise UnknownResourceError(f"unknown rater {rater_id!r} in session {session_id!r}")
        return sum(1 for (rater, _) in self._annotations[session_id] if rater == rater_id)

    def submit_annotation(
        self,
        session_id: str,
        rater_id: str,
        item_id: str,
        category: VerdictCategory,
    ) -> AnnotationRecord:
        with self._lock:
            session = self.get_session(session_id)
            if session.status is SessionStatus.CLOSED:
                raise SessionClosedError(f"session {session_id!r} is closed")
            if rater_id not in session.raters:
                raise UnknownResourceError(
                    f"unknown rater {rater_id!r} in session {session_id!r}"
                )
            if item_id not in session.item_ids():
                raise UnknownResourceError(
                    f"unknown item {item_id!r} in session {session_id!r}"
                )
            if (rater_id, item_id) in self._annotations[session_id]:
                raise DuplicateAnnotationError(
                    f"rater {rater_id!r} already annotated item {item_id!r}"
                )
            record = AnnotationRecord(
                session_id=session_id,
                item_id=item_id,
                rater_id=rater_id,
                category=category,
                submitted_at=datetime.now(timezone.utc).isoformat(),
            )
            self._append_record(record)
            self._annotations[session_id][(rater_id, item_id)] = record
            return record

    def export_records(self, session_id: str) -> list[AnnotationRecord]:
        """Persisted records in deterministic (item, rater) order."""
        session = self.get_session(session_id)
        done = self._annotations[session_id]
        records = []
        for item in session.items:
            for rater in session.raters:
                record = done.get((rater, item.item_id))
                if record is not None:
                    records.append(record)
        return records

    def export_annotations(self, session_id: str) -> AnnotationSet:
        """Session labels in the exact shape the agreement metrics consume."""
        session = self.get_session(session_id)
        return AnnotationSet(
            items=session.item_ids(),
            raters=list(session.raters),
            labels={
                (record.rater_id, record.item_id): record.category
                for record in self.export_records(session_id)
            },
        )

    def progress(self, session_id: str) -> dict:
        session = self.get_session(session_id)
        total = len(session.items)
        per_rater = {
            rater: self.annotated_count(session_id, rater) for rater in session.raters
        }
        return {
            "session_id": session_id,
            "status": session.status.value,
            "total_items": total,
            "raters": per_rater,
            "complete": all(count == total for count in per_rater.values()),
        }

    def close_session(self, session_id: str) -> PanelSession:
        with self._lock:
            session = self.get_session(session_id)
            if session.status is SessionStatus.CLOSED:
                return session
            session.status = SessionStatus.CLOSED
            self._persist_session(session)
            return session


# ---------------------------------------------------------------- HTTP layer


class TaskBody(BaseModel):
    record_id: str = Field(min_length=1)
    buggy_source: str = Field(min_length=1)
    compiler_message: str = ""


class PatchBody(BaseModel):
    task_id: str = ""
    fixed_source: str = Field(min_length=1)
    actor_id: str = "unknown"


class DiagnosticBody(BaseModel):
    file: str
    line: int
    column: int | None = None
    severity: str
    message: str


class CompileOutcomeBody(BaseModel):
    status: str = "fail"
    raw_stderr: str = ""
    diagnostics: list[DiagnosticBody] = []


class VerdictBody(BaseModel):
    category: VerdictCategory
    rationale: str = ""
    judge_id: str = ""


class ItemBody(BaseModel):
    item_id: str = Field(min_length=1)
    task: TaskBody
    patch: PatchBody
    compile_outcome: CompileOutcomeBody = CompileOutcomeBody()
    machine_verdict: VerdictBody | None = None

    def to_item(self) -> PanelItem:
        return PanelItem(
            item_id=self.item_id,
            task=RepairTask(
                record_id=self.task.record_id,
                buggy_source=self.task.buggy_source,
                compiler_message=self.task.compiler_message,
            ),
            patch=PatchProposal(
                task_id=self.patch.task_id or self.item_id,
                fixed_source=self.patch.fixed_source,
                actor_id=self.patch.actor_id,
            ),
            compile_outcome=CompileOutcome(
                status=CompileStatus(self.compile_outcome.status),
                diagnostics=[
                    Diagnostic(
                        file=d.file,
                        line=d.line,
                        column=d.column,
                        severity=Severity(d.severity),
                        message=d.message,
                    )
                    for d in self.compile_outcome.diagnostics
                ],
                raw_stderr=self.compile_outcome.raw_stderr,
                duration=0.0,
            ),
            machine_verdict=None
            if self.machine_verdict is None
            else Verdict(
                category=self.machine_verdict.category,
                rationale=self.machine_verdict.rationale,
                judge_id=self.machine_verdict.judge_id,
            ),
        )


class SessionBody(BaseModel):
    items: list[ItemBody] = Field(min_length=1)
    raters: list[str] = Field(min_length=1)
    session_id: str | None = None


class AnnotationBody(BaseModel):
    rater_id: str = Field(min_length=1)
    item_id: str = Field(min_length=1)
    category: VerdictCategory


def build_panel_app(store: PanelStore, ui_dir: str | Path | None = None):
    """JSON API over a PanelStore, optionally serving a static browser UI."""
    from fastapi import FastAPI, Query, Request
    from fastapi.responses import JSONResponse

    from cxxrepair import __version__

    app = FastAPI(title="cxxrepair annotation panel", version=__version__)

    @app.exception_handler(UnknownResourceError)
    async def _unknown(request: Request, exc: UnknownResourceError) -> JSONResponse:
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(DuplicateAnnotationError)
    async def _duplicate(request: Request, exc: DuplicateAnnotationError) -> JSONResponse:
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(SessionClosedError)
    async def _closed(request: Request, exc: SessionClosedError) -> JSONResponse:
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(PanelError)
    async def _panel_error(request: Request, exc: PanelError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionBody) -> dict:
        session = store.create_session(
            items=[item.to_item() for item in body.items],
            raters=body.raters,
            session_id=body.session_id,
        )
        return {
            "session_id": session.session_id,
            "status": session.status.value,
            "n_items": len(session.items),
            "raters": session.raters,
        }

    @app.get("/sessions/{session_id}/next")
    def next_item(session_id: str, rater: str = Query(min_length=1)) -> dict:
        session = store.get_session(session_id)
        item = store.next_item(session_id, rater)
        if item is None:
            return {
                "done": True,
                "annotated": store.annotated_count(session_id, rater),
                "total": len(session.items),
            }
        position = session.item_ids().index(item.item_id) + 1
        return {"done": False, "item": rater_view(item, position, len(session.items))}

    @app.post("/sessions/{session_id}/annotations", status_code=201)
    def submit(session_id: str, body: AnnotationBody) -> dict:
        record = store.submit_annotation(
            session_id=session_id,
            rater_id=body.rater_id,
            item_id=body.item_id,
            category=body.category,
        )
        return {"status": "recorded", **record.to_dict()}

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str) -> dict:
        session = store.get_session(session_id)
        return {
            "session_id": session_id,
            "items": session.item_ids(),
            "raters": session.raters,
            "records": [record.to_dict() for record in store.export_records(session_id)],
        }

    @app.get("/sessions/{session_id}/progress")
    def progress(session_id: str) -> dict:
        return store.progress(session_id)

    @app.post("/sessions/{session_id}/close")
    def close(session_id: str) -> dict:
        session = store.close_session(session_id)
        return {"session_id": session.session_id, "status": session.status.value}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def annotation_set_from_export(payload: dict) -> AnnotationSet:
    """Rebuild an AnnotationSet from the JSON body of GET /sessions/{id}/export."""
    return AnnotationSet(
        items=[str(item) for item in payload["items"]],
        raters=[str(rater) for rater in payload["raters"]],
        labels={
            (str(r["rater_id"]), str(r["item_id"])): VerdictCategory(r["category"])
            for r in payload["records"]
        },
    )


def serve(
    store: PanelStore,
    host: str = "127.0.0.1",
    port: int = 8081,
    ui_dir: str | Path | None = None,
) -> None:
    import uvicorn

    uvicorn.run(build_panel_app(store, ui_dir=ui_dir), host=host, port=port, log_level="info")
