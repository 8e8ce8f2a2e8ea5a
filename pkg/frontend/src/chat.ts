/** Chat message view model. Every displayed value is lifted straight
 * from the ChatResponse payload; policy responses carry no intent row. */

import type { ChatResponsePayload, StageRecord } from "./types";

export interface IntentRow {
  name: string;
  probability: number;
  /** e.g. "82.0%" */
  display: string;
}

export interface TraceRow {
  stage: string;
  outputs: string;
  elapsedMs: number;
}

export interface ChatMessageVM {
  text: string;
  badge: "policy" | "model" | "fallback";
  mode: string;
  stale: boolean;
  intentRow: IntentRow | null;
  trace: TraceRow[];
  span: [number, number] | null;
}

export function chatMessage(response: ChatResponsePayload): ChatMessageVM {
  const intentRow =
    response.source === "policy" || response.intent === null
      ? null
      : {
          name: response.intent.name,
          probability: response.intent.probability,
          display: `${(response.intent.probability * 100).toFixed(1)}%`,
        };
  return {
    text: response.answer.text,
    badge: response.source,
    mode: response.answer.mode,
    stale: response.stale,
    intentRow,
    trace: response.trace.map((record: StageRecord) => ({
      stage: record.stage,
      outputs: record.outputs,
      elapsedMs: record.elapsed_ms,
    })),
    span: response.answer.span,
  };
}
