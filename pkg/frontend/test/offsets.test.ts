import { describe, expect, it } from "vitest";
import { cpLength, cpSlice, cpToUtf16, nfc, utf16ToCp } from "../src/offsets.js";

// Strings where UTF-16 and code point indexing disagree.
const FOX = "the \u{1F98A} runs"; // fox emoji: 1 code point, 2 UTF-16 units
const SCIENTIST = "\u{1F469}\u{200D}\u{1F52C} works"; // woman+ZWJ+microscope: 3 cps
const PLAIN = "supporters marched peacefully";

describe("cpLength", () => {
  it("matches string length for BMP text", () => {
    expect(cpLength(PLAIN)).toBe(PLAIN.length);
    expect(cpLength("")).toBe(0);
  });

  it("counts astral characters once", () => {
    expect(cpLength("\u{1F98A}")).toBe(1);
    expect(cpLength(FOX)).toBe(10);
    expect(cpLength(SCIENTIST)).toBe(3 + 6);
  });

  it("counts a lone surrogate as one code point", () => {
    expect(cpLength("a\ud83dz")).toBe(3);
  });
});

describe("cpSlice", () => {
  it("mirrors caption[start:end] semantics", () => {
    expect(cpSlice(FOX, 4, 5)).toBe("\u{1F98A}");
    expect(cpSlice(FOX, 0, 4)).toBe("the ");
    expect(cpSlice(FOX, 5)).toBe(" runs");
    expect(cpSlice(SCIENTIST, 0, 3)).toBe("\u{1F469}\u{200D}\u{1F52C}");
  });

  it("clamps out-of-range and inverted spans", () => {
    expect(cpSlice(PLAIN, -5, 3)).toBe("sup");
    expect(cpSlice(PLAIN, 0, 999)).toBe(PLAIN);
    expect(cpSlice(PLAIN, 7, 2)).toBe("");
  });
});

describe("utf16ToCp / cpToUtf16", () => {
  it("is the identity on BMP text", () => {
    for (const i of [0, 3, PLAIN.length]) {
      expect(utf16ToCp(PLAIN, i)).toBe(i);
      expect(cpToUtf16(PLAIN, i)).toBe(i);
    }
  });

  it("accounts for surrogate pairs", () => {
    // "the " = 4 units, fox = 2 units, so unit 6 is code point 5.
    expect(utf16ToCp(FOX, 6)).toBe(5);
    expect(cpToUtf16(FOX, 5)).toBe(6);
    expect(cpToUtf16(FOX, 4)).toBe(4);
  });

  it("rounds an offset inside a surrogate pair down to its start", () => {
    expect(utf16ToCp(FOX, 5)).toBe(4);
  });

  it("round-trips every code point boundary", () => {
    for (const text of [FOX, SCIENTIST, PLAIN, "\u{1D11E}\u{1D11E}\u{1D11E}"]) {
      const n = cpLength(text);
      for (let cp = 0; cp <= n; cp++) {
        expect(utf16ToCp(text, cpToUtf16(text, cp))).toBe(cp);
      }
    }
  });

  it("clamps offsets beyond either end", () => {
    expect(utf16ToCp(FOX, 999)).toBe(10);
    expect(utf16ToCp(FOX, -1)).toBe(0);
    expect(cpToUtf16(FOX, 999)).toBe(FOX.length);
  });
});

describe("nfc", () => {
  it("collapses combining sequences the way the service stores them", () => {
    const decomposed = "café";
    expect(nfc(decomposed)).toBe("café");
    expect(cpLength(nfc(decomposed))).toBe(4);
  });
});
