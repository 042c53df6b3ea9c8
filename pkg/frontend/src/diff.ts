/**
 * Highlight segments for a reviewed edit. The service only ever applies
 * single-span replacements, so common-prefix/common-suffix over code
 * points recovers the change exactly: at most one deletion and one
 * insertion between unchanged flanks.
 */

export type DiffOp = "same" | "del" | "ins";

export interface DiffSegment {
  op: DiffOp;
  text: string;
}

export function spanDiff(original: string, edited: string): DiffSegment[] {
  const a = Array.from(original);
  const b = Array.from(edited);

  let prefix = 0;
  while (prefix < a.length && prefix < b.length && a[prefix] === b[prefix]) {
    prefix++;
  }
  let suffix = 0;
  const room = Math.min(a.length, b.length) - prefix;
  while (suffix < room && a[a.length - 1 - suffix] === b[b.length - 1 - suffix]) {
    suffix++;
  }

  const segments: DiffSegment[] = [];
  const push = (op: DiffOp, chars: string[]) => {
    if (chars.length) segments.push({ op, text: chars.join("") });
  };
  push("same", a.slice(0, prefix));
  push("del", a.slice(prefix, a.length - suffix));
  push("ins", b.slice(prefix, b.length - suffix));
  push("same", a.slice(a.length - suffix));
  return segments;
}
