/** Hash-routed single-page app. Routes:
 *   #/                         project picker
 *   #/project/NAME             home screen with the 7 step tiles
 *   #/project/NAME/step/N      one step screen (server lock re-checked)
 *
 * The service base URL comes from ?api=... or defaults to same origin.
 */

import { ApiClient, ServiceUnreachableError } from "./api";
import { clear, el } from "./dom";
import { canNavigate } from "./steps";
import {
  renderAugmentStep,
  renderChatStep,
  renderDatasetStep,
  renderHome,
  renderQaStep,
  renderRulesStep,
  renderTrainingStep,
  type ScreenContext,
} from "./views";

const apiBase =
  new URLSearchParams(window.location.search).get("api") ?? window.location.origin;
const api = new ApiClient(apiBase);

const root = document.getElementById("app") as HTMLElement;
const banner = document.getElementById("banner") as HTMLElement;

function showBanner(message: string | null): void {
  clear(banner);
  if (message) {
    banner.append(el("p", {}, message));
    banner.classList.add("visible");
  } else {
    banner.classList.remove("visible");
  }
}

function navigate(hash: string): void {
  if (window.location.hash === hash) {
    void route();
  } else {
    window.location.hash = hash;
  }
}

async function renderPicker(): Promise<void> {
  const { projects } = await api.listProjects();
  const nameInput = el("input", { placeholder: "new project name" });
  const createButton = el(
    "button",
    {
      class: "primary",
      onclick: async () => {
        try {
          const info = await api.createProject(nameInput.value.trim());
          navigate(`#/project/${info.name}`);
        } catch (err) {
          showBanner(err instanceof Error ? err.message : String(err));
        }
      },
    },
    "create project",
  );
  clear(root);
  root.append(
    el(
      "section",
      { class: "picker" },
      el("h2", {}, "Pick a project"),
      el(
        "ul",
        { class: "project-list" },
        ...projects.map((project) =>
          el(
            "li",
            {},
            el(
              "button",
              { onclick: () => navigate(`#/project/${project.name}`) },
              `${project.name} — ${project.intents.length} topics, ` +
                `${project.question_count} questions` +
                (project.model_trained ? ", trained" : ""),
            ),
          ),
        ),
      ),
      el("div", { class: "row" }, nameInput, createButton),
    ),
  );
}

const STEP_SCREENS: Record<number, (context: ScreenContext) => HTMLElement> = {
  1: renderDatasetStep,
  2: renderAugmentStep,
  3: renderRulesStep,
  4: renderTrainingStep,
  5: (context) => renderQaStep(context, 5),
  6: (context) => renderQaStep(context, 6),
  7: renderChatStep,
};

async function renderProject(project: string, step: number | null): Promise<void> {
  const steps = await api.getSteps(project);
  const context: ScreenContext = {
    api,
    project,
    steps,
    navigate,
    refresh: async () => {
      context.steps = await api.getSteps(project);
    },
  };
  clear(root);
  root.append(
    el(
      "nav",
      { class: "crumbs" },
      el("button", { onclick: () => navigate("#/") }, "projects"),
      el("button", { onclick: () => navigate(`#/project/${project}`) }, project),
    ),
  );
  if (step === null) {
    root.append(renderHome(context));
    return;
  }
  // the server decides what is reachable; a hand-typed URL to a locked
  // step lands back on the home screen
  if (!canNavigate(steps, step)) {
    root.append(
      el("p", { class: "error-text" }, `step ${step} is locked; finish the earlier steps first`),
      renderHome(context),
    );
    return;
  }
  const screen = STEP_SCREENS[step];
  root.append(screen(context));
}

async function route(): Promise<void> {
  showBanner(null);
  const hash = window.location.hash || "#/";
  const parts = hash.replace(/^#\//, "").split("/").filter(Boolean);
  try {
    if (parts.length === 0) {
      await renderPicker();
    } else if (parts[0] === "project" && parts.length === 2) {
      await renderProject(decodeURIComponent(parts[1]), null);
    } else if (parts[0] === "project" && parts[2] === "step" && parts.length === 4) {
      await renderProject(decodeURIComponent(parts[1]), Number(parts[3]));
    } else {
      navigate("#/");
    }
  } catch (err) {
    if (err instanceof ServiceUnreachableError) {
      showBanner(`Cannot reach the classbot service at ${apiBase}. Is it running?`);
    } else {
      showBanner(err instanceof Error ? err.message : String(err));
    }
  }
}

window.addEventListener("hashchange", () => void route());
void route();
