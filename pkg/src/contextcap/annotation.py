"""Peer-verified caption editing over an append-only event log.

Tasks move pending -> claimed -> edited -> peer_verified; a rejection
recycles the task to pending with its edit cleared. The event log is the
single source of truth: state is an in-memory fold over it, and replaying
the log reproduces the state exactly. Captions and contexts are stored
NFC-normalized, and edit spans are Unicode code point offsets into that
stored caption (the one normalization point clients must match).
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping

from .corpus import ImageRef
from .negatives import EntailmentInstance, Label, NegClass
from .util import nfc, stable_hash

DEFAULT_CLAIM_TIMEOUT = 30 * 60.0


class TaskStatus(str, Enum):
    PENDING = "pending"
    CLAIMED = "claimed"
    EDITED = "edited"
    PEER_VERIFIED = "peer_verified"
    REJECTED = "rejected"  # transient: observable state returns to pending


class Action(str, Enum):
    CREATE = "create"
    CLAIM = "claim"
    SUBMIT_EDIT = "submit_edit"
    VERIFY = "verify"
    REJECT = "reject"


class AnnotationError(Exception):
    """Base class for workflow errors."""


class NotFoundError(AnnotationError):
    pass


class ConflictError(AnnotationError):
    pass


class ValidationError(AnnotationError):
    pass


class PolicyError(AnnotationError):
    pass


@dataclass(frozen=True)
class SpanEdit:
    """Replace caption[start:end] (code point offsets) with replacement."""

    start: int
    end: int
    replacement: str

    def apply(self, caption: str) -> str:
        return caption[:self.start] + self.replacement + caption[self.end:]


@dataclass
class AnnotationTask:
    task_id: str
    image_uri: str
    caption: str
    context: str
    image_id: str = ""
    source_record_id: str = ""
    status: TaskStatus = TaskStatus.PENDING
    claimant: str | None = None
    claimed_at: float | None = None
    editor: str | None = None
    edit: SpanEdit | None = None
    resulting_caption: str | None = None
    verifier: str | None = None
    rejections: int = 0


def _task_id_for(image_uri: str, caption: str, context: str) -> str:
    return f"task-{stable_hash('task', image_uri, caption, context):016x}"


class AnnotationStore:
    """Event-sourced task store with a single-writer lock.

    Every mutation validates against current state, appends one event to
    the log (flushed, fsynced by default), then folds it into memory with
    the same code replay uses. Claims lapse after claim_timeout seconds;
    expiry is evaluated against the injected clock at read time, never
    written back, so replay stays exact.
    """

    def __init__(
        self,
        path: str | Path,
        claim_timeout: float = DEFAULT_CLAIM_TIMEOUT,
        clock=time.time,
        fsync: bool = True,
    ):
        self._path = Path(path)
        self._timeout = claim_timeout
        self._clock = clock
        self._fsync = fsync
        self._lock = threading.Lock()
        self._tasks: dict[str, AnnotationTask] = {}
        self._seq = 0
        self._path.parent.mkdir(parents=True, exist_ok=True)
        if self._path.exists():
            with open(self._path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    event = json.loads(line)
                    self._fold(event)
        self._fh = open(self._path, "a", encoding="utf-8")

    def close(self) -> None:
        self._fh.close()

    # --- event plumbing ----------------------------------------------------

    def _append(self, action: Action, actor: str, task_id: str, payload: dict[str, Any]) -> dict:
        event = {
            "seq": self._seq + 1,
            "ts": self._clock(),
            "actor": actor,
            "action": action.value,
            "task_id": task_id,
            "payload": payload,
        }
        self._fh.write(json.dumps(event, ensure_ascii=False) + "\n")
        self._fh.flush()
        if self._fsync:
            os.fsync(self._fh.fileno())
        self._fold(event)
        return event

    def _fold(self, event: Mapping[str, Any]) -> None:
        """Apply one event to in-memory state. Replay-safe: consults only
        the event itself and prior state, never the clock."""
        self._seq = event["seq"]
        action = Action(event["action"])
        task_id = event["task_id"]
        payload = event.get("payload", {})
        if action is Action.CREATE:
            self._tasks[task_id] = AnnotationTask(
                task_id=task_id,
                image_uri=payload["image_uri"],
                caption=payload["caption"],
                context=payload["context"],
                image_id=payload.get("image_id", ""),
                source_record_id=payload.get("source_record_id", ""),
            )
            return
        task = self._tasks[task_id]
        if action is Action.CLAIM:
            task.status = TaskStatus.CLAIMED
            task.claimant = event["actor"]
            task.claimed_at = event["ts"]
        elif action is Action.SUBMIT_EDIT:
            edit = SpanEdit(payload["start"], payload["end"], payload["replacement"])
            task.edit = edit
            task.editor = event["actor"]
            task.resulting_caption = edit.apply(task.caption)
            task.status = TaskStatus.EDITED
        elif action is Action.VERIFY:
            task.status = TaskStatus.PEER_VERIFIED
            task.verifier = event["actor"]
        elif action is Action.REJECT:
            task.status = TaskStatus.PENDING
            task.claimant = None
            task.claimed_at = None
            task.editor = None
            task.edit = None
            task.resulting_caption = None
            task.rejections += 1

    def _effective_status(self, task: AnnotationTask) -> TaskStatus:
        if (task.status is TaskStatus.CLAIMED and task.claimed_at is not None
                and self._clock() - task.claimed_at > self._timeout):
            return TaskStatus.PENDING
        return task.status

    def _get(self, task_id: str) -> AnnotationTask:
        task = self._tasks.get(task_id)
        if task is None:
            raise NotFoundError(f"unknown task {task_id!r}")
        return task

    # --- operations ---------------------------------------------------------

    def create_tasks(self, instances: Iterable[Mapping[str, Any]]) -> tuple[list[str], int]:
        """Provision tasks from caption/context/image rows.

        Text is NFC-normalized on the way in; task ids derive from the
        normalized content, so re-submitting the same rows is a no-op.
        Returns (new task ids, duplicates skipped).
        """
        created: list[str] = []
        skipped = 0
        with self._lock:
            for row in instances:
                try:
                    caption = nfc(str(row["caption"]))
                    context = nfc(str(row["context"]))
                    image_uri = str(row.get("image_uri", ""))
                except (KeyError, TypeError):
                    raise ValidationError("task rows need caption and context") from None
                if not caption or not context:
                    raise ValidationError("caption and context must be non-empty")
                task_id = _task_id_for(image_uri, caption, context)
                if task_id in self._tasks:
                    skipped += 1
                    continue
                self._append(Action.CREATE, actor=str(row.get("actor", "loader")),
                             task_id=task_id, payload={
                                 "image_uri": image_uri,
                                 "caption": caption,
                                 "context": context,
                                 "image_id": str(row.get("image_id", "")),
                                 "source_record_id": str(row.get("source_record_id", "")),
                             })
                created.append(task_id)
        return created, skipped

    def claim(self, task_id: str, annotator_id: str) -> dict[str, Any]:
        if not annotator_id:
            raise ValidationError("annotator_id must be non-empty")
        with self._lock:
            task = self._get(task_id)
            if self._effective_status(task) is not TaskStatus.PENDING:
                raise ConflictError(f"task {task_id!r} is {task.status.value}, not claimable")
            self._append(Action.CLAIM, actor=annotator_id, task_id=task_id, payload={})
            return self._snapshot(task)

    def submit_edit(self, task_id: str, annotator_id: str, start: int, end: int,
                    replacement: str) -> dict[str, Any]:
        with self._lock:
            task = self._get(task_id)
            status = self._effective_status(task)
            if status is not TaskStatus.CLAIMED or task.claimant != annotator_id:
                raise ConflictError(
                    f"task {task_id!r} is not held by {annotator_id!r} (status {status.value})")
            if not isinstance(start, int) or not isinstance(end, int):
                raise ValidationError("span offsets must be integers")
            if not (0 <= start < end <= len(task.caption)):
                raise ValidationError(
                    f"span ({start}, {end}) out of range for caption of length {len(task.caption)}")
            replacement = nfc(replacement)
            original = task.caption[start:end]
            if replacement.lower() == original.lower():
                raise ValidationError("replacement must differ from the original span (case-insensitive)")
            self._append(Action.SUBMIT_EDIT, actor=annotator_id, task_id=task_id,
                         payload={"start": start, "end": end, "replacement": replacement})
            return self._snapshot(task)

    def verify(self, task_id: str, verifier_id: str, verdict: str) -> dict[str, Any]:
        if verdict not in ("accept", "reject"):
            raise ValidationError("verdict must be 'accept' or 'reject'")
        with self._lock:
            task = self._get(task_id)
            if self._effective_status(task) is not TaskStatus.EDITED:
                raise ConflictError(f"task {task_id!r} is not awaiting verification")
            if verifier_id == task.editor:
                raise PolicyError("an edit may not be verified by its author")
            action = Action.VERIFY if verdict == "accept" else Action.REJECT
            self._append(action, actor=verifier_id, task_id=task_id, payload={})
            return self._snapshot(task)

    # --- queries ------------------------------------------------------------

    def _snapshot(self, task: AnnotationTask) -> dict[str, Any]:
        effective = self._effective_status(task)
        return {
            "task_id": task.task_id,
            "image_uri": task.image_uri,
            "image_id": task.image_id,
            "caption": task.caption,
            "context": task.context,
            "source_record_id": task.source_record_id,
            "status": effective.value,
            "claimant": task.claimant if effective is not TaskStatus.PENDING else None,
            "editor": task.editor,
            "edit": (
                {"start": task.edit.start, "end": task.edit.end,
                 "replacement": task.edit.replacement}
                if task.edit else None),
            "resulting_caption": task.resulting_caption,
            "verifier": task.verifier,
            "rejections": task.rejections,
        }

    def get_task(self, task_id: str) -> dict[str, Any]:
        with self._lock:
            return self._snapshot(self._get(task_id))

    def list_tasks(self, status: str | None = None, reviewer: str | None = None) -> list[dict[str, Any]]:
        """Task summaries sorted by task id. status filters on effective
        status; reviewer narrows to edits the given actor may verify."""
        if status is not None:
            try:
                status = TaskStatus(status).value
            except ValueError:
                raise ValidationError(f"unknown status filter {status!r}") from None
        out = []
        with self._lock:
            for task_id in sorted(self._tasks):
                task = self._tasks[task_id]
                effective = self._effective_status(task)
                if status is not None and effective.value != status:
                    continue
                if reviewer is not None and (effective is not TaskStatus.EDITED
                                             or task.editor == reviewer):
                    continue
                out.append({
                    "task_id": task.task_id,
                    "status": effective.value,
                    "claimant": task.claimant if effective is not TaskStatus.PENDING else None,
                    "editor": task.editor,
                    "rejections": task.rejections,
                })
        return out

    def export(self, pair_positives: bool = False) -> list[EntailmentInstance]:
        """Entailment instances for every peer-verified task, ordered by
        task id: the edited caption as a Manual negative, optionally
        preceded by the original caption as its positive."""
        out: list[EntailmentInstance] = []
        with self._lock:
            for task_id in sorted(self._tasks):
                task = self._tasks[task_id]
                if task.status is not TaskStatus.PEER_VERIFIED:
                    continue
                image = ImageRef(image_id=task.image_id, uri=task.image_uri)
                source = task.source_record_id or task.task_id
                if pair_positives:
                    out.append(EntailmentInstance(
                        instance_id=f"{task.task_id}#pos",
                        image=image,
                        caption=task.caption,
                        context=task.context,
                        label=Label.ENTAILS,
                        neg_class=NegClass.P,
                        source_record_id=source,
                    ))
                out.append(EntailmentInstance(
                    instance_id=f"{task.task_id}#manual",
                    image=image,
                    caption=task.resulting_caption or task.caption,
                    context=task.context,
                    label=Label.NOT_ENTAILS,
                    neg_class=NegClass.MANUAL,
                    source_record_id=source,
                ))
        return out

    def state_snapshot(self) -> dict[str, dict[str, Any]]:
        """Stored state (raw statuses, no expiry view) for replay checks."""
        with self._lock:
            out = {}
            for task_id, task in self._tasks.items():
                out[task_id] = {
                    "task_id": task.task_id,
                    "image_uri": task.image_uri,
                    "image_id": task.image_id,
                    "caption": task.caption,
                    "context": task.context,
                    "source_record_id": task.source_record_id,
                    "status": task.status.value,
                    "claimant": task.claimant,
                    "claimed_at": task.claimed_at,
                    "editor": task.editor,
                    "edit": (
                        {"start": task.edit.start, "end": task.edit.end,
                         "replacement": task.edit.replacement}
                        if task.edit else None),
                    "resulting_caption": task.resulting_caption,
                    "verifier": task.verifier,
                    "rejections": task.rejections,
                }
            return out

    def events(self) -> list[dict[str, Any]]:
        with open(self._path, "r", encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]
