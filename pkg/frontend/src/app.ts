/**
 * DOM wiring for the annotation UI. All caption-index arithmetic lives
 * in offsets.ts/edit.ts; this file only moves data between the service
 * and the page. State is refetched after every mutation, and a 409
 * conflict just triggers a refresh (someone else got there first).
 */

import { AnnotationApi, ApiError, type Task } from "./api.js";
import { clampSpan, isNoopReplacement, previewEdit, type Span, wordAt } from "./edit.js";
import { spanDiff } from "./diff.js";
import { cpLength, cpSlice, utf16ToCp } from "./offsets.js";

type Mode = "annotate" | "review";

const api = new AnnotationApi("");

const state = {
  mode: "annotate" as Mode,
  annotator: localStorage.getItem("annotator_id") ?? "",
  tasks: [] as Task[],
  current: null as Task | null,
  selection: null as Span | null,
  anchor: 0,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function notify(text: string, isError = false): void {
  const box = el<HTMLElement>("notice");
  box.textContent = text;
  box.className = isError ? "notice error" : "notice";
}

async function guarded(action: () => Promise<void>): Promise<void> {
  try {
    await action();
  } catch (err) {
    if (err instanceof ApiError && err.isConflict) {
      notify("Task changed under you; refreshed.", true);
      await refresh();
      return;
    }
    notify(err instanceof Error ? err.message : String(err), true);
  }
}

// --- task list --------------------------------------------------------------

async function refresh(): Promise<void> {
  if (!state.annotator) {
    notify("Enter your annotator id to start.");
    return;
  }
  if (state.mode === "annotate") {
    const pending = await api.listTasks({ status: "pending" });
    const claimed = (await api.listTasks({ status: "claimed" })).filter(
      (t) => t.claimant === state.annotator,
    );
    state.tasks = [...claimed, ...pending];
  } else {
    state.tasks = await api.listTasks({ status: "edited", reviewer: state.annotator });
  }
  if (state.current) {
    const still = state.tasks.find((t) => t.task_id === state.current?.task_id);
    state.current = still ?? null;
    if (!still) clearSelection();
  }
  renderList();
  renderDetail();
}

function renderList(): void {
  const list = el<HTMLUListElement>("task-list");
  list.replaceChildren();
  for (const task of state.tasks) {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.type = "button";
    button.textContent = `[${task.status}] ${task.caption}`;
    button.addEventListener("click", () => void openTask(task.task_id));
    if (task.task_id === state.current?.task_id) item.className = "active";
    item.append(button);
    list.append(item);
  }
  el<HTMLElement>("list-empty").hidden = state.tasks.length > 0;
}

async function openTask(taskId: string): Promise<void> {
  await guarded(async () => {
    state.current = await api.getTask(taskId);
    clearSelection();
    renderList();
    renderDetail();
  });
}

// --- detail pane ------------------------------------------------------------

function clearSelection(): void {
  state.selection = null;
  state.anchor = 0;
}

function renderDetail(): void {
  const pane = el<HTMLElement>("detail");
  const task = state.current;
  pane.hidden = !task;
  if (!task) return;

  const image = el<HTMLImageElement>("task-image");
  image.src = task.image_uri;
  image.alt = task.image_uri ? "task image" : "";
  el<HTMLElement>("task-context").textContent = task.context;
  el<HTMLElement>("task-status").textContent =
    `${task.status}${task.claimant ? ` by ${task.claimant}` : ""}` +
    `${task.rejections ? ` (${task.rejections} rejected)` : ""}`;

  renderCaption(task);
  renderControls(task);
}

/** Caption as plain text plus an optional highlighted slice; the
 * highlight span boundaries are code points, converted on render. */
function renderCaption(task: Task): void {
  const box = el<HTMLElement>("task-caption");
  box.replaceChildren();
  const sel = state.selection;
  if (!sel) {
    box.textContent = task.caption;
    return;
  }
  const before = document.createTextNode(cpSlice(task.caption, 0, sel.start));
  const mark = document.createElement("mark");
  mark.textContent = cpSlice(task.caption, sel.start, sel.end);
  const after = document.createTextNode(cpSlice(task.caption, sel.end));
  box.append(before, mark, after);
}

function renderControls(task: Task): void {
  const mine = task.claimant === state.annotator && task.status === "claimed";
  el<HTMLElement>("claim-row").hidden = task.status !== "pending";
  el<HTMLElement>("edit-row").hidden = !mine;
  el<HTMLElement>("review-row").hidden = !(state.mode === "review" && task.status === "edited");

  if (mine) updatePreview(task);
  if (state.mode === "review" && task.resulting_caption !== null) {
    const target = el<HTMLElement>("review-diff");
    target.replaceChildren();
    for (const seg of spanDiff(task.caption, task.resulting_caption)) {
      const span = document.createElement("span");
      span.className = `diff-${seg.op}`;
      span.textContent = seg.text;
      target.append(span);
    }
  }
}

function updatePreview(task: Task): void {
  const replacement = el<HTMLInputElement>("replacement-input").value;
  const submit = el<HTMLButtonElement>("submit-btn");
  const preview = el<HTMLElement>("edit-preview");
  const sel = state.selection;
  if (!sel) {
    submit.disabled = true;
    preview.textContent = "select a span in the caption";
    return;
  }
  submit.disabled = replacement === "" || isNoopReplacement(task.caption, sel, replacement);
  preview.textContent = previewEdit(task.caption, sel.start, sel.end, replacement);
}

// --- selection: mouse + keyboard ---------------------------------------------

/** Map the DOM selection (UTF-16 offsets inside the caption element's
 * text nodes) to code point offsets on the caption string. */
function readDomSelection(task: Task): Span | null {
  const selection = window.getSelection();
  if (!selection || selection.rangeCount === 0) return null;
  const box = el<HTMLElement>("task-caption");
  const range = selection.getRangeAt(0);
  if (!box.contains(range.startContainer) || !box.contains(range.endContainer)) return null;

  // Re-rendering may split the caption across text nodes; accumulate
  // the UTF-16 offset of each endpoint from the element start.
  const offsetIn = (node: Node, offset: number): number => {
    let total = 0;
    const walker = document.createTreeWalker(box, NodeFilter.SHOW_TEXT);
    for (let text = walker.nextNode(); text; text = walker.nextNode()) {
      if (text === node) return total + offset;
      total += (text.textContent ?? "").length;
    }
    return total;
  };
  const start = utf16ToCp(task.caption, offsetIn(range.startContainer, range.startOffset));
  const end = utf16ToCp(task.caption, offsetIn(range.endContainer, range.endOffset));
  return clampSpan(start, end, task.caption);
}

function onCaptionMouseUp(event: MouseEvent): void {
  const task = state.current;
  if (!task) return;
  if (event.detail >= 2) {
    // Double click: snap to the word under the caret.
    const span = readDomSelection(task);
    const probe = span ? span.start : 0;
    state.selection = wordAt(task.caption, probe) ?? span;
  } else {
    state.selection = readDomSelection(task);
  }
  if (state.selection) state.anchor = state.selection.start;
  renderCaption(task);
  renderControls(task);
}

/** Keyboard flow: tab focuses the caption, shift+arrows grow or shrink
 * the selection one code point at a time from the anchor. */
function onCaptionKeyDown(event: KeyboardEvent): void {
  const task = state.current;
  if (!task) return;
  if (event.key !== "ArrowLeft" && event.key !== "ArrowRight") return;
  event.preventDefault();
  const limit = cpLength(task.caption);
  const sel = state.selection;
  let focus = sel ? (sel.start === state.anchor ? sel.end : sel.start) : state.anchor;
  focus += event.key === "ArrowRight" ? 1 : -1;
  focus = Math.max(0, Math.min(focus, limit));
  if (event.shiftKey) {
    state.selection = clampSpan(state.anchor, focus, task.caption);
  } else {
    state.anchor = focus;
    state.selection = null;
  }
  renderCaption(task);
  renderControls(task);
}

// --- actions ------------------------------------------------------------------

async function claimCurrent(): Promise<void> {
  const task = state.current;
  if (!task) return;
  await guarded(async () => {
    state.current = await api.claim(task.task_id, state.annotator);
    notify(`Claimed ${task.task_id}.`);
    await refresh();
  });
}

async function submitCurrent(): Promise<void> {
  const task = state.current;
  const sel = state.selection;
  if (!task || !sel) return;
  const replacement = el<HTMLInputElement>("replacement-input").value;
  await guarded(async () => {
    const updated = await api.submitEdit(
      task.task_id, state.annotator, sel.start, sel.end, replacement,
    );
    notify(`Submitted: ${updated.resulting_caption ?? ""}`);
    el<HTMLInputElement>("replacement-input").value = "";
    clearSelection();
    await refresh();
  });
}

async function reviewCurrent(verdict: "accept" | "reject"): Promise<void> {
  const task = state.current;
  if (!task) return;
  await guarded(async () => {
    await api.verify(task.task_id, state.annotator, verdict);
    notify(verdict === "accept" ? "Verified." : "Rejected; task returned to the pool.");
    state.current = null;
    await refresh();
  });
}

// --- boot ---------------------------------------------------------------------

function setMode(mode: Mode): void {
  state.mode = mode;
  state.current = null;
  clearSelection();
  el<HTMLButtonElement>("mode-annotate").classList.toggle("on", mode === "annotate");
  el<HTMLButtonElement>("mode-review").classList.toggle("on", mode === "review");
  void guarded(refresh);
}

export function boot(): void {
  const who = el<HTMLInputElement>("annotator-input");
  who.value = state.annotator;
  who.addEventListener("change", () => {
    state.annotator = who.value.trim();
    localStorage.setItem("annotator_id", state.annotator);
    void guarded(refresh);
  });

  el<HTMLButtonElement>("mode-annotate").addEventListener("click", () => setMode("annotate"));
  el<HTMLButtonElement>("mode-review").addEventListener("click", () => setMode("review"));
  el<HTMLButtonElement>("refresh-btn").addEventListener("click", () => void guarded(refresh));
  el<HTMLButtonElement>("claim-btn").addEventListener("click", () => void claimCurrent());
  el<HTMLButtonElement>("submit-btn").addEventListener("click", () => void submitCurrent());
  el<HTMLButtonElement>("accept-btn").addEventListener("click", () => void reviewCurrent("accept"));
  el<HTMLButtonElement>("reject-btn").addEventListener("click", () => void reviewCurrent("reject"));
  el<HTMLInputElement>("replacement-input").addEventListener("input", () => {
    if (state.current) updatePreview(state.current);
  });

  const caption = el<HTMLElement>("task-caption");
  caption.addEventListener("mouseup", onCaptionMouseUp);
  caption.addEventListener("keydown", onCaptionKeyDown);

  void guarded(refresh);
}

boot();
