/**
 * Span-edit semantics mirrored from the annotation service, so the UI
 * can preview exactly what the service will store before submitting.
 */

import { cpLength, cpSlice, nfc } from "./offsets.js";

export interface Span {
  start: number;
  end: number;
}

/** caption[:start] + replacement + caption[end:], in code points. This
 * is the service's splice verbatim; no normalization happens here. */
export function applyEdit(
  caption: string,
  start: number,
  end: number,
  replacement: string,
): string {
  return cpSlice(caption, 0, start) + replacement + cpSlice(caption, end);
}

/**
 * What the service will store for this submission: it NFC-normalizes
 * the replacement before splicing (the caption itself was normalized at
 * task creation). Use this, not applyEdit, for the on-screen preview.
 */
export function previewEdit(
  caption: string,
  start: number,
  end: number,
  replacement: string,
): string {
  return applyEdit(caption, start, end, nfc(replacement));
}

/**
 * Clamp a raw selection to the caption and order its ends. Returns null
 * for an empty result; the submit button stays disabled on null.
 */
export function clampSpan(start: number, end: number, caption: string): Span | null {
  const limit = cpLength(caption);
  let lo = Math.min(start, end);
  let hi = Math.max(start, end);
  lo = Math.max(0, Math.min(lo, limit));
  hi = Math.max(0, Math.min(hi, limit));
  return lo < hi ? { start: lo, end: hi } : null;
}

/**
 * The service rejects a replacement equal to the original span under
 * case folding; checking client-side keeps the submit button honest.
 * The service remains authoritative.
 */
export function isNoopReplacement(
  caption: string,
  span: Span,
  replacement: string,
): boolean {
  const original = cpSlice(caption, span.start, span.end);
  return nfc(replacement).toLowerCase() === original.toLowerCase();
}

/** Non-whitespace runs of the caption as code point spans, in order. */
export function wordSpans(caption: string): Span[] {
  const spans: Span[] = [];
  let index = 0;
  let start = -1;
  for (const ch of caption) {
    const blank = /\s/u.test(ch);
    if (!blank && start < 0) start = index;
    if (blank && start >= 0) {
      spans.push({ start, end: index });
      start = -1;
    }
    index++;
  }
  if (start >= 0) spans.push({ start, end: index });
  return spans;
}

/** The word containing the given code point, for double-click select.
 * Positions on whitespace (or past the end) return null. */
export function wordAt(caption: string, cpIndex: number): Span | null {
  for (const span of wordSpans(caption)) {
    if (cpIndex >= span.start && cpIndex < span.end) return span;
  }
  return null;
}
