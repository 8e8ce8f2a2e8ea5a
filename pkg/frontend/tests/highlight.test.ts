import { describe, expect, it } from "vitest";

import { highlightSpan, highlightedText } from "../src/highlight";

const CONTEXT = "Weathering breaks rock apart. Wind carries sand away.";

describe("span highlighting", () => {
  it("highlighted slice is byte-exact", () => {
    const span: [number, number] = [11, 28]; // "breaks rock apart"
    const segments = highlightSpan(CONTEXT, span);
    expect(highlightedText(segments)).toBe(CONTEXT.slice(11, 28));
    expect(highlightedText(segments)).toBe("breaks rock apart");
  });

  it("segments reassemble the whole context", () => {
    const segments = highlightSpan(CONTEXT, [11, 28]);
    expect(segments.map((s) => s.text).join("")).toBe(CONTEXT);
  });

  it("span at the very start produces no empty prefix", () => {
    const segments = highlightSpan(CONTEXT, [0, 10]);
    expect(segments[0]).toEqual({ text: "Weathering", highlighted: true });
    expect(segments.map((s) => s.text).join("")).toBe(CONTEXT);
  });

  it("span at the very end produces no empty suffix", () => {
    const segments = highlightSpan(CONTEXT, [CONTEXT.length - 5, CONTEXT.length]);
    expect(segments[segments.length - 1].highlighted).toBe(true);
    expect(segments.map((s) => s.text).join("")).toBe(CONTEXT);
  });

  it("null span (generative/policy answers) highlights nothing", () => {
    const segments = highlightSpan(CONTEXT, null);
    expect(segments).toEqual([{ text: CONTEXT, highlighted: false }]);
  });

  it("out-of-range span degrades to no highlight", () => {
    expect(highlightedText(highlightSpan(CONTEXT, [40, 400]))).toBe("");
    expect(highlightedText(highlightSpan(CONTEXT, [-2, 5]))).toBe("");
  });

  it("randomized spans stay exact", () => {
    for (let start = 0; start < CONTEXT.length - 1; start += 7) {
      for (let end = start + 1; end <= CONTEXT.length; end += 11) {
        const segments = highlightSpan(CONTEXT, [start, end]);
        expect(highlightedText(segments)).toBe(CONTEXT.slice(start, end));
        expect(segments.map((s) => s.text).join("")).toBe(CONTEXT);
      }
    }
  });
});
