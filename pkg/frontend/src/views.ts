/** Screen renderers. Every number and string shown here comes from an
 * API payload; the views only arrange them. */

import { ApiClient, ApiError } from "./api";
import { chatMessage } from "./chat";
import { STEP_COPY } from "./copy";
import { clear, el, svgPolyline } from "./dom";
import { highlightSpan } from "./highlight";
import { stepTiles } from "./steps";
import { TrainingTracker, lossCurvePoints, toPolylineAttr } from "./training";
import type { StepsPayload } from "./types";

export interface ScreenContext {
  api: ApiClient;
  project: string;
  steps: StepsPayload;
  navigate: (hash: string) => void;
  refresh: () => Promise<void>;
}

function errorBox(err: unknown): HTMLElement {
  const message = err instanceof Error ? err.message : String(err);
  const problems = err instanceof ApiError ? err.problems : [];
  return el(
    "div",
    { class: "error-box" },
    el("p", {}, message),
    problems.length ? el("ul", {}, ...problems.map((p) => el("li", {}, p))) : null,
  );
}

function stepShell(context: ScreenContext, step: number, ...body: (Node | null)[]): HTMLElement {
  const copy = STEP_COPY[step];
  const info = context.steps.steps.find((s) => s.step === step);
  const completeButton = el(
    "button",
    {
      class: "primary",
      onclick: async () => {
        try {
          await context.api.completeStep(context.project, step);
          context.navigate(`#/project/${context.project}`);
        } catch (err) {
          const slot = document.getElementById("step-error");
          if (slot) {
            clear(slot as HTMLElement);
            slot.append(errorBox(err));
          }
        }
      },
    },
    info?.completed ? "mark complete again" : `finish step ${step}`,
  );
  return el(
    "section",
    { class: "step-screen" },
    el("h2", {}, `Step ${step}: ${copy.heading}`),
    el("p", { class: "blurb" }, copy.blurb),
    ...body.filter((n): n is Node => n !== null),
    el("div", { id: "step-error" }),
    el("footer", {}, completeButton),
  );
}

export function renderHome(context: ScreenContext): HTMLElement {
  const tiles = stepTiles(context.steps).map((tile) => {
    const button = el(
      "button",
      {
        class: `tile ${tile.state}`,
        onclick: () => {
          if (tile.state !== "locked") {
            context.navigate(`#/project/${context.project}/step/${tile.step}`);
          }
        },
      },
      el("span", { class: "tile-number" }, String(tile.step)),
      el("span", { class: "tile-title" }, tile.title),
      el("span", { class: "tile-state" }, tile.state),
      tile.state !== "locked" && tile.blockers.length
        ? el("span", { class: "tile-blockers" }, tile.blockers.join("; "))
        : null,
    );
    if (tile.state === "locked") button.setAttribute("disabled", "disabled");
    return button;
  });
  return el(
    "section",
    { class: "home" },
    el("h2", {}, `Project: ${context.project}`),
    el("p", { class: "blurb" }, "Finish each step to unlock the next one."),
    el("div", { class: "tiles" }, ...tiles),
  );
}

export function renderDatasetStep(context: ScreenContext): HTMLElement {
  const intents = el("textarea", { rows: "6", placeholder: "one intent per line" });
  const contexts = el("textarea", {
    rows: "10",
    placeholder: "# intent name\npassage text ...",
  });
  const questions = el("textarea", { rows: "10", placeholder: "question,intent" });
  const status = el("div", { class: "status" });
  void (async () => {
    intents.value = (await context.api.getDatasetPart(context.project, "intents")).content;
    contexts.value = (await context.api.getDatasetPart(context.project, "contexts")).content;
    questions.value = (await context.api.getDatasetPart(context.project, "questions")).content;
  })();
  const save = el(
    "button",
    {
      onclick: async () => {
        clear(status);
        try {
          const summary = await context.api.putDataset(context.project, {
            intents: intents.value,
            contexts: contexts.value,
            questions: questions.value,
          });
          status.append(
            el(
              "p",
              { class: "ok" },
              `saved: ${summary.intents.length} intents, ${summary.question_count} questions, ` +
                `validation ${summary.validation.ok ? "ok" : "failed"}`,
            ),
          );
          await context.refresh();
        } catch (err) {
          status.append(errorBox(err));
        }
      },
    },
    "save dataset",
  );
  return stepShell(
    context,
    1,
    el("label", {}, "Intents (one per line)"),
    intents,
    el("label", {}, "Contexts (# headers)"),
    contexts,
    el("label", {}, "Questions (CSV)"),
    questions,
    save,
    status,
  );
}

export function renderAugmentStep(context: ScreenContext): HTMLElement {
  const status = el("div", { class: "status" });
  const run = el(
    "button",
    {
      onclick: async () => {
        clear(status);
        status.append(el("p", {}, "running backtranslation..."));
        try {
          const result = await context.api.augment(context.project);
          clear(status);
          status.append(
            el(
              "p",
              { class: "ok" },
              `added ${result.report.total_added} paraphrases ` +
                `(dropped ${result.report.total_dropped}); ` +
                `dataset now has ${result.question_count} questions`,
            ),
            el(
              "ul",
              {},
              ...Object.entries(result.report.per_intent).map(([intent, counts]) =>
                el("li", {}, `${intent}: +${counts.added}`),
              ),
            ),
          );
        } catch (err) {
          clear(status);
          status.append(errorBox(err));
        }
      },
    },
    "run augmentation",
  );
  return stepShell(context, 2, run, status);
}

export function renderRulesStep(context: ScreenContext): HTMLElement {
  const list = el("ul", { class: "rule-list" });
  const keyword = el("input", { placeholder: "keyword (single word)" });
  const response = el("input", { placeholder: "prewritten response" });
  const status = el("div", { class: "status" });
  const tester = el("input", { placeholder: "try a question against the rules" });
  const testOut = el("div", { class: "status" });

  async function reload(): Promise<void> {
    const payload = await context.api.getRules(context.project);
    clear(list);
    for (const rule of payload.rules) {
      list.append(
        el(
          "li",
          {},
          el("code", {}, rule.keywords.join(", ")),
          ` (${rule.match_mode}) → ${rule.response}`,
        ),
      );
    }
  }
  void reload();

  const add = el(
    "button",
    {
      onclick: async () => {
        clear(status);
        try {
          const current = await context.api.getRules(context.project);
          const next = current.rules.concat({
            id: `rule${current.rules.length + 1}`,
            keywords: [keyword.value],
            match_mode: "any",
            response: response.value,
          });
          await context.api.putRules(context.project, next);
          keyword.value = "";
          response.value = "";
          await reload();
        } catch (err) {
          status.append(errorBox(err));
        }
      },
    },
    "add rule",
  );
  const test = el(
    "button",
    {
      onclick: async () => {
        clear(testOut);
        try {
          const reply = await context.api.chat(context.project, tester.value);
          const vm = chatMessage(reply);
          testOut.append(
            el(
              "p",
              {},
              el("span", { class: `badge ${vm.badge}` }, vm.badge),
              ` ${vm.text}`,
            ),
          );
        } catch (err) {
          testOut.append(errorBox(err));
        }
      },
    },
    "test",
  );
  return stepShell(
    context,
    3,
    list,
    el("div", { class: "row" }, keyword, response, add),
    status,
    el("h3", {}, "Live tester (needs a trained model for non-rule questions)"),
    el("div", { class: "row" }, tester, test),
    testOut,
  );
}

export function renderTrainingStep(context: ScreenContext): HTMLElement {
  const epochs = el("input", { type: "number", value: "200", min: "1" });
  const status = el("div", { class: "status" });
  const bar = el("div", { class: "progress-fill" });
  const barWrap = el("div", { class: "progress" }, bar);
  const curveSlot = el("div", { class: "curve-slot" });
  const tracker = new TrainingTracker();

  function paint(): void {
    const view = tracker.current;
    bar.style.width = `${view.percent}%`;
    clear(curveSlot);
    if (view.metrics.length) {
      curveSlot.append(
        svgPolyline(toPolylineAttr(lossCurvePoints(view.metrics, 300, 80)), 300, 80),
      );
      const last = view.metrics[view.metrics.length - 1];
      curveSlot.append(
        el(
          "p",
          {},
          `epoch ${last.epoch}: loss ${last.loss.toFixed(4)}, ` +
            `accuracy ${(last.accuracy * 100).toFixed(1)}%`,
        ),
      );
    }
  }

  const start = el(
    "button",
    {
      class: "primary",
      onclick: async () => {
        clear(status);
        try {
          const total = Number(epochs.value);
          const { job } = await context.api.startTraining(context.project, { epochs: total });
          tracker.reset(total);
          status.append(el("p", {}, `training job ${job.job_id} started`));
          const poll = window.setInterval(async () => {
            try {
              const { job: latest } = await context.api.getJob(job.job_id);
              const view = tracker.update(latest);
              paint();
              if (view.state === "succeeded" || view.state === "failed") {
                window.clearInterval(poll);
                status.append(
                  view.state === "succeeded"
                    ? el("p", { class: "ok" }, "training finished")
                    : errorBox(new Error(view.error ?? "training failed")),
                );
                await context.refresh();
              }
            } catch (err) {
              window.clearInterval(poll);
              status.append(errorBox(err));
            }
          }, 300);
        } catch (err) {
          status.append(errorBox(err));
        }
      },
    },
    "start training",
  );
  return stepShell(
    context,
    4,
    el("div", { class: "row" }, el("label", {}, "epochs"), epochs, start),
    barWrap,
    curveSlot,
    status,
  );
}

function answerCard(
  title: string,
  body: Node | null,
  error: string | undefined,
): HTMLElement {
  return el(
    "div",
    { class: "answer-card" },
    el("h4", {}, title),
    body,
    error ? el("p", { class: "error-text" }, error) : null,
  );
}

function highlightedContext(contextText: string, span: [number, number] | null): HTMLElement {
  const holder = el("p", { class: "context-text" });
  for (const segment of highlightSpan(contextText, span)) {
    holder.append(
      segment.highlighted
        ? el("mark", {}, segment.text)
        : document.createTextNode(segment.text),
    );
  }
  return holder;
}

export function renderQaStep(context: ScreenContext, step: 5 | 6): HTMLElement {
  const question = el("input", { placeholder: "ask about your material" });
  const out = el("div", { class: "status" });
  const mode = step === 5 ? "extractive" : "generative";

  const ask = el(
    "button",
    {
      onclick: async () => {
        clear(out);
        try {
          const reply = await context.api.chat(context.project, question.value, mode);
          const vm = chatMessage(reply);
          out.append(el("p", {}, el("span", { class: `badge ${vm.badge}` }, vm.badge), ` ${vm.text}`));
          if (vm.intentRow) {
            out.append(el("p", {}, `topic: ${vm.intentRow.name} (${vm.intentRow.display})`));
          }
          if (vm.span && vm.intentRow) {
            out.append(
              answerCard(
                "where the answer came from",
                highlightedContext(await contextFor(context, vm.intentRow.name), vm.span),
                undefined,
              ),
            );
          }
        } catch (err) {
          out.append(errorBox(err));
        }
      },
    },
    `ask (${mode})`,
  );

  const compareOut = el("div", { class: "compare-row" });
  const compareButton = el(
    "button",
    {
      onclick: async () => {
        clear(compareOut);
        try {
          const payload = await context.api.compare(context.project, question.value);
          const ctxText = await contextFor(context, payload.intent.name);
          compareOut.append(
            answerCard(
              "extractive (highlighter)",
              payload.extractive
                ? highlightedContext(ctxText, payload.extractive.span)
                : null,
              payload.errors["extractive"],
            ),
            answerCard(
              "generative (storyteller)",
              payload.generative ? el("p", {}, payload.generative.text) : null,
              payload.errors["generative"],
            ),
          );
        } catch (err) {
          compareOut.append(errorBox(err));
        }
      },
    },
    "compare both answerers",
  );

  return stepShell(
    context,
    step,
    el("div", { class: "row" }, question, ask, compareButton),
    out,
    compareOut,
  );
}

async function contextFor(context: ScreenContext, intentName: string): Promise<string> {
  const { content } = await context.api.getDatasetPart(context.project, "contexts");
  const lines = content.split("\n");
  const collected: string[] = [];
  let inside = false;
  for (const line of lines) {
    if (line.startsWith("#")) {
      inside = line.slice(1).trim() === intentName;
      continue;
    }
    if (inside) collected.push(line);
  }
  return collected.join("\n").trim();
}

export function renderChatStep(context: ScreenContext): HTMLElement {
  const thread = el("div", { class: "thread" });
  const input = el("input", { placeholder: "say something to your bot" });
  const status = el("div", { class: "status" });

  async function send(): Promise<void> {
    const text = input.value.trim();
    if (!text) return;
    input.value = "";
    thread.append(el("div", { class: "msg user" }, text));
    try {
      const reply = await context.api.chat(context.project, text);
      const vm = chatMessage(reply);
      const bubble = el(
        "div",
        { class: "msg bot" },
        el("span", { class: `badge ${vm.badge}` }, vm.badge),
        vm.stale ? el("span", { class: "badge stale" }, "stale model") : null,
        el("p", {}, vm.text),
      );
      if (vm.intentRow) {
        bubble.append(
          el("p", { class: "intent-row" }, `topic: ${vm.intentRow.name} (${vm.intentRow.display})`),
        );
      }
      const traceList = el(
        "ul",
        { class: "trace" },
        ...vm.trace.map((row) =>
          el("li", {}, `${row.stage}: ${row.outputs} (${row.elapsedMs.toFixed(1)} ms)`),
        ),
      );
      const details = el("details", {}, el("summary", {}, "trace"), traceList);
      bubble.append(details);
      if (vm.span && vm.intentRow) {
        bubble.append(
          highlightedContext(await contextFor(context, vm.intentRow.name), vm.span),
        );
      }
      thread.append(bubble);
      thread.scrollTop = thread.scrollHeight;
    } catch (err) {
      thread.append(el("div", { class: "msg bot" }, errorBox(err)));
    }
  }

  const sendButton = el("button", { class: "primary", onclick: () => void send() }, "send");
  input.addEventListener("keydown", (event) => {
    if ((event as KeyboardEvent).key === "Enter") void send();
  });
  return stepShell(
    context,
    7,
    thread,
    el("div", { class: "row" }, input, sendButton),
    status,
  );
}
