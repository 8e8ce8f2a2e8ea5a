/** Step-tile view model. The server's steps payload is authoritative:
 * tiles derive from it, and navigation re-checks it so a hand-typed URL
 * cannot reach a locked step. */

import type { StepsPayload } from "./types";

export type TileState = "completed" | "unlocked" | "locked";

export interface StepTile {
  step: number;
  title: string;
  state: TileState;
  blockers: string[];
}

export function stepTiles(payload: StepsPayload): StepTile[] {
  return payload.steps.map((info) => ({
    step: info.step,
    title: info.title,
    state: info.completed ? "completed" : info.unlocked ? "unlocked" : "locked",
    blockers: info.unsatisfied_gates,
  }));
}

/** A step screen may be opened iff the server says it is unlocked
 * (completed steps stay revisitable). */
export function canNavigate(payload: StepsPayload, step: number): boolean {
  const info = payload.steps.find((s) => s.step === step);
  return info !== undefined && (info.unlocked || info.completed);
}

export function nextActionable(payload: StepsPayload): number | null {
  return payload.next_step;
}
