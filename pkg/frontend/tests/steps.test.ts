import { describe, expect, it } from "vitest";

import { canNavigate, stepTiles } from "../src/steps";
import type { StepsPayload } from "../src/types";

function payload(completed: number[], gates: Record<number, string[]> = {}): StepsPayload {
  const done = new Set(completed);
  return {
    completed: [...completed].sort(),
    next_step: [1, 2, 3, 4, 5, 6, 7].find((s) => !done.has(s)) ?? null,
    steps: [1, 2, 3, 4, 5, 6, 7].map((step) => ({
      step,
      title: `step ${step}`,
      completed: done.has(step),
      unlocked: step === 1 || done.has(step - 1),
      unsatisfied_gates: gates[step] ?? [],
    })),
  };
}

describe("step tiles", () => {
  it("fresh project: only step 1 unlocked, rest locked", () => {
    const tiles = stepTiles(payload([]));
    expect(tiles.map((t) => t.state)).toEqual([
      "unlocked", "locked", "locked", "locked", "locked", "locked", "locked",
    ]);
  });

  it("tiles lock and unlock per step_progress", () => {
    const tiles = stepTiles(payload([1, 2, 3]));
    expect(tiles.map((t) => t.state)).toEqual([
      "completed", "completed", "completed", "unlocked", "locked", "locked", "locked",
    ]);
  });

  it("all gates passed: step 7 unlocked", () => {
    const tiles = stepTiles(payload([1, 2, 3, 4, 5, 6]));
    expect(tiles[6].state).toBe("unlocked");
  });

  it("completing everything marks every tile completed", () => {
    const tiles = stepTiles(payload([1, 2, 3, 4, 5, 6, 7]));
    expect(tiles.every((t) => t.state === "completed")).toBe(true);
  });

  it("gate explanations surface as blockers", () => {
    const tiles = stepTiles(payload([1, 2, 3], { 4: ["no trained model yet"] }));
    expect(tiles[3].blockers).toEqual(["no trained model yet"]);
  });
});

describe("navigation guard", () => {
  it("locked steps are unreachable even by direct URL", () => {
    const steps = payload([]);
    expect(canNavigate(steps, 1)).toBe(true);
    for (let step = 2; step <= 7; step += 1) {
      expect(canNavigate(steps, step)).toBe(false);
    }
  });

  it("completed steps stay revisitable", () => {
    const steps = payload([1, 2]);
    expect(canNavigate(steps, 1)).toBe(true);
    expect(canNavigate(steps, 2)).toBe(true);
    expect(canNavigate(steps, 3)).toBe(true);
    expect(canNavigate(steps, 4)).toBe(false);
  });

  it("unknown steps are rejected", () => {
    expect(canNavigate(payload([1, 2, 3, 4, 5, 6, 7]), 8)).toBe(false);
  });
});
