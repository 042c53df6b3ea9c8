"""HTTP front end for the annotation store (JSON in, JSON out).

Thin adapter: every route delegates to AnnotationStore and maps workflow
errors onto status codes (404 unknown task, 409 state conflict, 422 bad
edit, 403 dual-control violation).
"""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.requests import Request
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from . import __version__
from .annotation import (
    AnnotationStore,
    ConflictError,
    NotFoundError,
    PolicyError,
    ValidationError,
)
from .negatives import instance_to_row

import json


class TaskRowIn(BaseModel):
    caption: str
    context: str
    image_uri: str = ""
    image_id: str = ""
    source_record_id: str = ""


class CreateTasksRequest(BaseModel):
    instances: list[TaskRowIn]


class ClaimRequest(BaseModel):
    annotator_id: str = Field(min_length=1)


class EditRequest(BaseModel):
    annotator_id: str = Field(min_length=1)
    start: int
    end: int
    replacement: str


class VerifyRequest(BaseModel):
    annotator_id: str = Field(min_length=1)
    verdict: str


_ERROR_CODES = (
    (NotFoundError, 404),
    (ConflictError, 409),
    (PolicyError, 403),
    (ValidationError, 422),
)


def create_app(store: AnnotationStore, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="contextcap annotation service", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    for exc_type, code in _ERROR_CODES:
        def _handler(request: Request, exc: Exception, code: int = code) -> JSONResponse:
            return JSONResponse(status_code=code, content={"detail": str(exc)})

        app.add_exception_handler(exc_type, _handler)

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok", "version": __version__}

    @app.get("/tasks")
    def list_tasks(status: str | None = None, reviewer: str | None = None) -> list[dict[str, Any]]:
        return store.list_tasks(status=status, reviewer=reviewer)

    @app.post("/tasks")
    def create_tasks(body: CreateTasksRequest) -> dict[str, Any]:
        created, skipped = store.create_tasks([row.model_dump() for row in body.instances])
        return {"created": len(created), "skipped": skipped, "task_ids": created}

    @app.get("/tasks/{task_id}")
    def get_task(task_id: str) -> dict[str, Any]:
        return store.get_task(task_id)

    @app.post("/tasks/{task_id}/claim")
    def claim(task_id: str, body: ClaimRequest) -> dict[str, Any]:
        return store.claim(task_id, body.annotator_id)

    @app.post("/tasks/{task_id}/edit")
    def submit_edit(task_id: str, body: EditRequest) -> dict[str, Any]:
        return store.submit_edit(task_id, body.annotator_id, body.start, body.end,
                                 body.replacement)

    @app.post("/tasks/{task_id}/verify")
    def verify(task_id: str, body: VerifyRequest) -> dict[str, Any]:
        return store.verify(task_id, body.annotator_id, body.verdict)

    @app.get("/export")
    def export(pair_positives: bool = False) -> PlainTextResponse:
        rows = [instance_to_row(inst) for inst in store.export(pair_positives=pair_positives)]
        body = "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in rows)
        return PlainTextResponse(body, media_type="application/x-ndjson")

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
