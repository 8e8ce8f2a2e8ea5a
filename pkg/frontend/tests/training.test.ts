import { describe, expect, it } from "vitest";

import { TrainingTracker, lossCurvePoints, progressPercent, toPolylineAttr } from "../src/training";
import type { JobPayload } from "../src/types";

function job(completed: number, total: number, state: JobPayload["state"]): JobPayload {
  return {
    job_id: "j1",
    project: "p",
    state,
    progress: { completed_epochs: completed, total_epochs: total },
    metrics: Array.from({ length: completed }, (_, i) => ({
      epoch: i + 1,
      loss: 1.6 / (i + 1),
      accuracy: Math.min(1, 0.3 + 0.1 * i),
    })),
    error: null,
  };
}

describe("training progress", () => {
  it("percent is clamped to [0, 100]", () => {
    expect(progressPercent(0, 100)).toBe(0);
    expect(progressPercent(50, 100)).toBe(50);
    expect(progressPercent(120, 100)).toBe(100);
    expect(progressPercent(1, 0)).toBe(0);
  });

  it("progress is monotone across ordered polls", () => {
    const tracker = new TrainingTracker();
    tracker.reset(100);
    const seen: number[] = [];
    for (const completed of [10, 25, 60, 100]) {
      seen.push(tracker.update(job(completed, 100, completed === 100 ? "succeeded" : "running")).percent);
    }
    expect(seen).toEqual([...seen].sort((a, b) => a - b));
    expect(seen[seen.length - 1]).toBe(100);
  });

  it("a stale out-of-order poll never moves the bar backwards", () => {
    const tracker = new TrainingTracker();
    tracker.reset(100);
    tracker.update(job(60, 100, "running"));
    const view = tracker.update(job(25, 100, "running")); // delayed response
    expect(view.completedEpochs).toBe(60);
    expect(view.percent).toBe(60);
  });

  it("terminal states are absorbing", () => {
    const tracker = new TrainingTracker();
    tracker.reset(10);
    tracker.update(job(10, 10, "succeeded"));
    const view = tracker.update(job(3, 10, "running"));
    expect(view.state).toBe("succeeded");
    expect(view.percent).toBe(100);
  });

  it("failure carries the error message", () => {
    const tracker = new TrainingTracker();
    tracker.reset(10);
    const failed = job(2, 10, "failed");
    failed.error = "training requires at least 2 intents";
    expect(tracker.update(failed).error).toMatch("at least 2 intents");
  });
});

describe("loss curve", () => {
  it("maps losses into the viewport with falling y", () => {
    const points = lossCurvePoints(job(5, 5, "succeeded").metrics, 300, 80);
    expect(points).toHaveLength(5);
    expect(points[0].x).toBe(0);
    expect(points[points.length - 1].x).toBe(300);
    // loss decreases -> y grows toward the bottom edge mapping of min loss
    expect(points[0].y).toBe(0);
    expect(points[points.length - 1].y).toBe(80);
  });

  it("single metric centers one point", () => {
    const points = lossCurvePoints(job(1, 1, "succeeded").metrics, 300, 80);
    expect(points).toEqual([{ x: 150, y: 80 }]);
  });

  it("empty metrics produce no points", () => {
    expect(lossCurvePoints([], 300, 80)).toEqual([]);
  });

  it("polyline attribute is well-formed", () => {
    const attr = toPolylineAttr(lossCurvePoints(job(3, 3, "succeeded").metrics, 300, 80));
    expect(attr).toMatch(/^(\d+(\.\d)?,\d+(\.\d)?)( \d+(\.\d)?,\d+(\.\d)?)*$/);
  });
});
