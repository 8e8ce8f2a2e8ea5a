/** Typed client for the /v1 API. The whole UI talks to the service
 * through this module; nothing is computed client-side. */

import type {
  AugmentPayload,
  ChatResponsePayload,
  ComparePayload,
  ConfigPayload,
  DatasetSummary,
  JobPayload,
  PolicyRule,
  ProjectInfo,
  StepsPayload,
} from "./types";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Service answered with an error status; message comes from the body. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly problems: string[] = [],
  ) {
    super(message);
  }
}

/** Could not reach the service at all (drives the banner). */
export class ServiceUnreachableError extends Error {
  constructor(readonly baseUrl: string) {
    super(`service unreachable at ${baseUrl}`);
  }
}

function extractErrorMessage(body: unknown, status: number): { message: string; problems: string[] } {
  if (body && typeof body === "object" && "detail" in body) {
    const detail = (body as { detail: unknown }).detail;
    if (typeof detail === "string") return { message: detail, problems: [] };
    if (detail && typeof detail === "object") {
      const d = detail as { error?: string; problems?: string[] };
      return { message: d.error ?? `request failed (${status})`, problems: d.problems ?? [] };
    }
  }
  return { message: `request failed (${status})`, problems: [] };
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        method,
        headers: body === undefined ? {} : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch {
      throw new ServiceUnreachableError(this.baseUrl);
    }
    if (response.status === 204) return undefined as T;
    const payload = await response.json().catch(() => undefined);
    if (!response.ok) {
      const { message, problems } = extractErrorMessage(payload, response.status);
      throw new ApiError(response.status, message, problems);
    }
    return payload as T;
  }

  listProjects(): Promise<{ projects: ProjectInfo[] }> {
    return this.request("GET", "/v1/projects");
  }

  createProject(name: string): Promise<ProjectInfo> {
    return this.request("POST", "/v1/projects", { name });
  }

  getProject(name: string): Promise<ProjectInfo> {
    return this.request("GET", `/v1/projects/${encodeURIComponent(name)}`);
  }

  deleteProject(name: string): Promise<void> {
    return this.request("DELETE", `/v1/projects/${encodeURIComponent(name)}`);
  }

  getSteps(project: string): Promise<StepsPayload> {
    return this.request("GET", `/v1/projects/${encodeURIComponent(project)}/steps`);
  }

  completeStep(project: string, step: number): Promise<StepsPayload> {
    return this.request(
      "POST",
      `/v1/projects/${encodeURIComponent(project)}/steps/${step}/complete`,
    );
  }

  getDataset(project: string): Promise<DatasetSummary> {
    return this.request("GET", `/v1/projects/${encodeURIComponent(project)}/dataset`);
  }

  putDataset(
    project: string,
    parts: { intents?: string; contexts?: string; questions?: string },
  ): Promise<DatasetSummary> {
    return this.request("PUT", `/v1/projects/${encodeURIComponent(project)}/dataset`, parts);
  }

  getDatasetPart(
    project: string,
    part: "intents" | "contexts" | "questions",
  ): Promise<{ content: string }> {
    return this.request("GET", `/v1/projects/${encodeURIComponent(project)}/dataset/${part}`);
  }

  getRules(project: string): Promise<{ rules: PolicyRule[] }> {
    return this.request("GET", `/v1/projects/${encodeURIComponent(project)}/rules`);
  }

  putRules(project: string, rules: PolicyRule[]): Promise<{ rules: PolicyRule[] }> {
    return this.request("PUT", `/v1/projects/${encodeURIComponent(project)}/rules`, { rules });
  }

  getConfig(project: string): Promise<ConfigPayload> {
    return this.request("GET", `/v1/projects/${encodeURIComponent(project)}/config`);
  }

  putConfig(project: string, config: Partial<ConfigPayload>): Promise<ConfigPayload> {
    return this.request("PUT", `/v1/projects/${encodeURIComponent(project)}/config`, config);
  }

  augment(project: string): Promise<AugmentPayload> {
    return this.request("POST", `/v1/projects/${encodeURIComponent(project)}/augment`);
  }

  startTraining(
    project: string,
    options: { epochs: number; learning_rate?: number; batch_size?: number; seed?: number },
  ): Promise<{ job: JobPayload }> {
    return this.request("POST", `/v1/projects/${encodeURIComponent(project)}/train`, options);
  }

  getJob(jobId: string): Promise<{ job: JobPayload }> {
    return this.request("GET", `/v1/jobs/${encodeURIComponent(jobId)}`);
  }

  chat(
    project: string,
    question: string,
    mode?: "extractive" | "generative",
  ): Promise<ChatResponsePayload> {
    return this.request("POST", `/v1/projects/${encodeURIComponent(project)}/chat`, {
      question,
      ...(mode ? { mode } : {}),
    });
  }

  compare(project: string, question: string): Promise<ComparePayload> {
    return this.request("POST", `/v1/projects/${encodeURIComponent(project)}/compare`, {
      question,
    });
  }
}
