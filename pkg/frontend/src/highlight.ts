/** Split a context into segments so an extractive answer's span can be
 * highlighted. Segments reassemble the context exactly; the highlighted
 * slice is byte-for-byte the answer span. */

export interface Segment {
  text: string;
  highlighted: boolean;
}

export function highlightSpan(context: string, span: [number, number] | null): Segment[] {
  if (span === null) {
    return [{ text: context, highlighted: false }];
  }
  const [start, end] = span;
  if (start < 0 || end > context.length || start >= end) {
    return [{ text: context, highlighted: false }];
  }
  const segments: Segment[] = [];
  if (start > 0) segments.push({ text: context.slice(0, start), highlighted: false });
  segments.push({ text: context.slice(start, end), highlighted: true });
  if (end < context.length) segments.push({ text: context.slice(end), highlighted: false });
  return segments;
}

export function highlightedText(segments: Segment[]): string {
  return segments
    .filter((segment) => segment.highlighted)
    .map((segment) => segment.text)
    .join("");
}
