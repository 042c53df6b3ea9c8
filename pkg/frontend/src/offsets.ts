/**
 * Offset conversion between UTF-16 code units and Unicode code points.
 *
 * The annotation service stores captions NFC-normalized and addresses
 * span edits in code points (caption[start:end]). JavaScript strings
 * are UTF-16, so a DOM selection offset is not a code point index once
 * the caption contains anything outside the BMP (emoji, some CJK).
 * Every offset crosses through this module exactly once on its way to
 * or from the wire; nothing else in the UI does its own arithmetic on
 * caption indices.
 */

/** The single normalization point: captions and replacements are
 * compared and spliced in NFC, exactly as the service stores them. */
export function nfc(text: string): string {
  return text.normalize("NFC");
}

/** Number of code points in the string. */
export function cpLength(text: string): number {
  let n = 0;
  for (let i = 0; i < text.length; i++) {
    n++;
    if (isHighSurrogate(text, i)) i++;
  }
  return n;
}

/**
 * Slice by code point indices, mirroring caption[start:end] on the
 * service side. Out-of-range indices clamp; an inverted range yields "".
 */
export function cpSlice(text: string, start: number, end?: number): string {
  const from = cpToUtf16(text, Math.max(0, start));
  const to = end === undefined ? text.length : cpToUtf16(text, Math.max(0, end));
  return from < to ? text.slice(from, to) : "";
}

/**
 * Convert a UTF-16 offset (e.g. from a DOM Range) to a code point
 * index. An offset landing between the halves of a surrogate pair
 * rounds down to the pair's start; offsets past the end clamp.
 */
export function utf16ToCp(text: string, utf16Offset: number): number {
  if (utf16Offset <= 0) return 0;
  let cp = 0;
  let unit = 0;
  while (unit < text.length) {
    const width = isHighSurrogate(text, unit) ? 2 : 1;
    if (unit + width > utf16Offset) return cp;
    unit += width;
    cp++;
  }
  return cp;
}

/** Convert a code point index back to a UTF-16 offset (clamped). */
export function cpToUtf16(text: string, cpIndex: number): number {
  if (cpIndex <= 0) return 0;
  let cp = 0;
  let unit = 0;
  while (unit < text.length && cp < cpIndex) {
    unit += isHighSurrogate(text, unit) ? 2 : 1;
    cp++;
  }
  return unit;
}

/** True when a full surrogate pair starts here; lone surrogates count
 * as one code point, matching how the service's language sees them. */
function isHighSurrogate(text: string, index: number): boolean {
  const code = text.charCodeAt(index);
  if (code < 0xd800 || code > 0xdbff) return false;
  const next = text.charCodeAt(index + 1);
  return next >= 0xdc00 && next <= 0xdfff;
}
