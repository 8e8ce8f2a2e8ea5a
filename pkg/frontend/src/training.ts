/** Training-panel state machine fed by job polls.
 *
 * Progress shown to the student never goes backwards even if poll
 * responses arrive out of order, and terminal states are absorbing. The
 * loss curve is rendered from the per-epoch metrics in the job payload.
 */

import type { EpochMetric, JobPayload } from "./types";

export interface TrainingView {
  state: "idle" | "queued" | "running" | "succeeded" | "failed";
  completedEpochs: number;
  totalEpochs: number;
  percent: number;
  metrics: EpochMetric[];
  error: string | null;
}

export function progressPercent(completed: number, total: number): number {
  if (total <= 0) return 0;
  return Math.max(0, Math.min(100, (completed / total) * 100));
}

const TERMINAL = new Set(["succeeded", "failed"]);

export class TrainingTracker {
  private view: TrainingView = {
    state: "idle",
    completedEpochs: 0,
    totalEpochs: 0,
    percent: 0,
    metrics: [],
    error: null,
  };

  get current(): TrainingView {
    return this.view;
  }

  reset(totalEpochs: number): TrainingView {
    this.view = {
      state: "queued",
      completedEpochs: 0,
      totalEpochs,
      percent: 0,
      metrics: [],
      error: null,
    };
    return this.view;
  }

  update(job: JobPayload): TrainingView {
    if (TERMINAL.has(this.view.state)) {
      return this.view;
    }
    const completed = Math.max(this.view.completedEpochs, job.progress.completed_epochs);
    const metrics =
      job.metrics.length >= this.view.metrics.length ? job.metrics : this.view.metrics;
    this.view = {
      state: job.state,
      completedEpochs: completed,
      totalEpochs: job.progress.total_epochs,
      percent: Math.max(
        this.view.percent,
        progressPercent(completed, job.progress.total_epochs),
      ),
      metrics,
      error: job.error,
    };
    return this.view;
  }
}

export interface CurvePoint {
  x: number;
  y: number;
}

/** Map per-epoch losses into an SVG polyline within width x height. */
export function lossCurvePoints(
  metrics: EpochMetric[],
  width: number,
  height: number,
): CurvePoint[] {
  if (metrics.length === 0) return [];
  const losses = metrics.map((m) => m.loss);
  const maxLoss = Math.max(...losses);
  const minLoss = Math.min(...losses);
  const spread = maxLoss - minLoss || 1;
  const lastEpoch = metrics[metrics.length - 1].epoch;
  const step = lastEpoch > 1 ? width / (lastEpoch - 1) : 0;
  return metrics.map((m) => ({
    x: metrics.length === 1 ? width / 2 : (m.epoch - 1) * step,
    y: height - ((m.loss - minLoss) / spread) * height,
  }));
}

export function toPolylineAttr(points: CurvePoint[]): string {
  return points.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(" ");
}
