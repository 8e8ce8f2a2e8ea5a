/** Wire types for the /v1 API. Field names mirror the JSON exactly. */

export interface ProjectInfo {
  name: string;
  intents: string[];
  question_count: number;
  human_questions: number;
  synthetic_questions: number;
  rule_count: number;
  model_trained: boolean;
  model_stale: boolean;
  chat_turns: number;
  steps_completed: number[];
  load_problems: string[];
  read_only: boolean;
}

export interface StepInfo {
  step: number;
  title: string;
  completed: boolean;
  unlocked: boolean;
  unsatisfied_gates: string[];
}

export interface StepsPayload {
  completed: number[];
  next_step: number | null;
  steps: StepInfo[];
}

export interface ValidationIssue {
  location: string;
  message: string;
  severity: string;
}

export interface ValidationReport {
  ok: boolean;
  errors: ValidationIssue[];
  warnings: ValidationIssue[];
}

export interface DatasetSummary {
  intents: string[];
  question_count: number;
  validation: ValidationReport;
}

export interface PolicyRule {
  id: string;
  keywords: string[];
  match_mode: string;
  response: string;
}

export interface EpochMetric {
  epoch: number;
  loss: number;
  accuracy: number;
}

export interface JobPayload {
  job_id: string;
  project: string;
  state: "queued" | "running" | "succeeded" | "failed";
  progress: { completed_epochs: number; total_epochs: number };
  metrics: EpochMetric[];
  error: string | null;
}

export interface AnswerPayload {
  text: string;
  mode: "extractive" | "generative" | "policy";
  span: [number, number] | null;
  score: number;
  intent_name: string | null;
}

export interface StageRecord {
  stage: "filter" | "intent" | "qa";
  inputs: string;
  outputs: string;
  elapsed_ms: number;
}

export interface ChatResponsePayload {
  answer: AnswerPayload;
  source: "policy" | "model" | "fallback";
  intent: { name: string; probability: number } | null;
  stale: boolean;
  trace: StageRecord[];
}

export interface ComparePayload {
  intent: { name: string; probability: number };
  extractive: AnswerPayload | null;
  generative: AnswerPayload | null;
  errors: Record<string, string>;
}

export interface AugmentPayload {
  report: {
    total_added: number;
    total_dropped: number;
    per_intent: Record<
      string,
      { added: number; dropped_duplicates: number; dropped_cap: number }
    >;
  };
  question_count: number;
  validation: ValidationReport;
}

export interface PipelineConfigPayload {
  qa_mode: "extractive" | "generative";
  confidence_threshold: number;
  fallback_response: string;
  extractive_config: {
    max_span_tokens: number;
    window_tokens: number;
    length_penalty: number;
  };
}

export interface AugmentationConfigPayload {
  pivot_language: string;
  rounds_per_question: number;
  max_synthetic_per_question: number;
  dedup: boolean;
  seed: number;
}

export interface ConfigPayload {
  pipeline: PipelineConfigPayload;
  augmentation: AugmentationConfigPayload;
}
