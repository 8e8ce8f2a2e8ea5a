/** In-memory /v1 stand-in for tests: enough of the service semantics to
 * walk the whole UI flow without a backend. */

import type { FetchLike } from "../src/api";
import type {
  ChatResponsePayload,
  JobPayload,
  StepInfo,
  StepsPayload,
} from "../src/types";

const STEP_TITLES: Record<number, string> = {
  1: "data collection",
  2: "data augmentation",
  3: "policy filtering",
  4: "intent recognition",
  5: "extractive question answering",
  6: "generative question answering",
  7: "deployment",
};

export const MOCK_CONTEXT =
  "Weathering breaks rock apart. Wind carries sand from place to place.";

interface MockProject {
  name: string;
  completed: Set<number>;
  trained: boolean;
  chatTurns: number;
  rules: { id: string; keywords: string[]; match_mode: string; response: string }[];
}

export class MockService {
  projects = new Map<string, MockProject>();
  jobs = new Map<string, JobPayload>();
  /** polls needed before a training job finishes */
  pollsUntilDone = 3;
  private jobCounter = 0;

  fetch: FetchLike = async (input, init) => {
    const url = new URL(input, "http://mock");
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    const [, v1, ...rest] = url.pathname.split("/");
    if (v1 !== "v1") return json(404, { detail: { error: "not found" } });
    return this.route(method, rest, body);
  };

  private route(method: string, parts: string[], body: any): Response {
    if (parts[0] === "projects" && parts.length === 1) {
      if (method === "POST") {
        if (this.projects.has(body.name)) {
          return json(409, { detail: { error: `project '${body.name}' already exists` } });
        }
        this.projects.set(body.name, {
          name: body.name,
          completed: new Set(),
          trained: false,
          chatTurns: 0,
          rules: [],
        });
        return json(201, { name: body.name });
      }
      return json(200, { projects: [...this.projects.values()].map(info) });
    }

    if (parts[0] === "jobs" && parts.length === 2) {
      const job = this.jobs.get(parts[1]);
      if (!job) return json(404, { detail: { error: "no job" } });
      this.advance(job);
      return json(200, { job: structuredClone(job) });
    }

    const project = this.projects.get(decodeURIComponent(parts[1] ?? ""));
    if (!project) return json(404, { detail: { error: "no such project" } });

    const tail = parts.slice(2);
    if (tail[0] === "steps" && tail.length === 1) {
      return json(200, stepsPayload(project));
    }
    if (tail[0] === "steps" && tail[2] === "complete") {
      const step = Number(tail[1]);
      if (step > 1 && !project.completed.has(step - 1)) {
        return json(409, { detail: { error: `step ${step} requires step ${step - 1}` } });
      }
      if (step === 4 && !project.trained) {
        return json(409, { detail: { error: "no trained model yet" } });
      }
      if (step === 7 && project.chatTurns < 1) {
        return json(409, { detail: { error: "no successful chat turn recorded yet" } });
      }
      project.completed.add(step);
      return json(200, stepsPayload(project));
    }
    if (tail[0] === "rules") {
      if (method === "PUT") project.rules = body.rules;
      return json(200, { rules: project.rules });
    }
    if (tail[0] === "train") {
      this.jobCounter += 1;
      const job: JobPayload = {
        job_id: `job${this.jobCounter}`,
        project: project.name,
        state: "queued",
        progress: { completed_epochs: 0, total_epochs: body.epochs },
        metrics: [],
        error: null,
      };
      this.jobs.set(job.job_id, job);
      return json(202, { job: structuredClone(job) });
    }
    if (tail[0] === "chat") {
      const question: string = body.question;
      const rule = project.rules.find((r) =>
        r.keywords.some((k) => question.toLowerCase().includes(k.toLowerCase())),
      );
      if (rule) {
        project.chatTurns += 1;
        return json(200, policyResponse(rule.response));
      }
      if (!project.trained) return json(409, { detail: { error: "no model trained yet" } });
      project.chatTurns += 1;
      return json(200, modelResponse());
    }
    if (tail[0] === "dataset" && tail[1] === "contexts") {
      return json(200, { content: `# Weathering and Erosion\n${MOCK_CONTEXT}\n` });
    }
    if (tail[0] === "dataset") {
      return json(200, { intents: ["Weathering and Erosion"], question_count: 15,
                         validation: { ok: true, errors: [], warnings: [] } });
    }
    return json(404, { detail: { error: "unhandled mock route" } });
  }

  private advance(job: JobPayload): void {
    if (job.state === "succeeded" || job.state === "failed") return;
    job.state = "running";
    const total = job.progress.total_epochs;
    const step = Math.ceil(total / this.pollsUntilDone);
    const next = Math.min(total, job.progress.completed_epochs + step);
    job.progress.completed_epochs = next;
    while (job.metrics.length < next) {
      const epoch = job.metrics.length + 1;
      job.metrics.push({ epoch, loss: 1.6 / epoch, accuracy: Math.min(1, 0.3 + epoch * 0.1) });
    }
    if (next >= total) {
      job.state = "succeeded";
      const project = this.projects.get(job.project);
      if (project) project.trained = true;
    }
  }
}

function info(project: MockProject) {
  return {
    name: project.name,
    intents: ["Weathering and Erosion"],
    question_count: 15,
    human_questions: 15,
    synthetic_questions: 0,
    rule_count: project.rules.length,
    model_trained: project.trained,
    model_stale: false,
    chat_turns: project.chatTurns,
    steps_completed: [...project.completed].sort(),
    load_problems: [],
    read_only: false,
  };
}

function stepsPayload(project: MockProject): StepsPayload {
  const steps: StepInfo[] = [];
  for (let step = 1; step <= 7; step += 1) {
    steps.push({
      step,
      title: STEP_TITLES[step],
      completed: project.completed.has(step),
      unlocked: step === 1 || project.completed.has(step - 1),
      unsatisfied_gates:
        step === 4 && !project.trained
          ? ["no trained model yet"]
          : step === 7 && project.chatTurns < 1
            ? ["no successful chat turn recorded yet"]
            : [],
    });
  }
  const next = steps.find((s) => !s.completed);
  return {
    completed: [...project.completed].sort(),
    next_step: next ? next.step : null,
    steps,
  };
}

function policyResponse(text: string): ChatResponsePayload {
  return {
    answer: { text, mode: "policy", span: null, score: 1.0, intent_name: null },
    source: "policy",
    intent: null,
    stale: false,
    trace: [{ stage: "filter", inputs: "q", outputs: "hit rule", elapsed_ms: 0.1 }],
  };
}

function modelResponse(): ChatResponsePayload {
  const start = MOCK_CONTEXT.indexOf("breaks rock apart");
  return {
    answer: {
      text: "breaks rock apart",
      mode: "extractive",
      span: [start, start + "breaks rock apart".length],
      score: 2.4,
      intent_name: "Weathering and Erosion",
    },
    source: "model",
    intent: { name: "Weathering and Erosion", probability: 0.82 },
    stale: false,
    trace: [
      { stage: "filter", inputs: "q", outputs: "no rule matched", elapsed_ms: 0.1 },
      { stage: "intent", inputs: "q", outputs: "Weathering and Erosion (p=0.8200)", elapsed_ms: 0.4 },
      { stage: "qa", inputs: "q", outputs: "breaks rock apart", elapsed_ms: 1.2 },
    ],
  };
}

function json(status: number, payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
