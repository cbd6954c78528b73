/** Browser entry point: wires the static page to the controller.
 *
 * All interaction is event delegation over server-confirmed renders; no
 * state lives in the DOM beyond the input fields themselves.
 */

import { ApiClient, type BranchStatus } from "./api.js";
import { ConsoleController } from "./controller.js";
import { parseActionText } from "./format.js";
import { SAMPLES } from "./samples.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function parseOutcomesText(
  text: string,
): Record<number, BranchStatus> | null {
  const out: Record<number, BranchStatus> = {};
  const trimmed = text.trim();
  if (trimmed === "") {
    return out;
  }
  for (const item of trimmed.split(",")) {
    const sep = item.includes("=") ? "=" : ":";
    const [branch, status] = item.split(sep, 2);
    if (branch === undefined || status === undefined) {
      return null;
    }
    const idx = Number(branch.trim());
    if (!Number.isInteger(idx)) {
      return null;
    }
    out[idx] = status.trim() as BranchStatus;
  }
  return out;
}

function start(): void {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "/api";
  const controller = new ConsoleController(new ApiClient(base));

  const screen = el<HTMLDivElement>("screen");
  const scenarioText = el<HTMLTextAreaElement>("scenario-text");
  const whatifAction = el<HTMLInputElement>("whatif-action");
  const whatifOutcomes = el<HTMLInputElement>("whatif-outcomes");

  const paint = () => {
    screen.innerHTML = controller.renderAll();
  };

  const samplesBox = el<HTMLDivElement>("samples");
  for (const name of Object.keys(SAMPLES)) {
    const btn = document.createElement("button");
    btn.type = "button";
    btn.textContent = name;
    btn.addEventListener("click", () => {
      scenarioText.value = JSON.stringify(SAMPLES[name], null, 2);
    });
    samplesBox.appendChild(btn);
  }

  el<HTMLButtonElement>("load-btn").addEventListener("click", async () => {
    await controller.loadScenario(scenarioText.value);
    paint();
  });

  el<HTMLButtonElement>("refresh-btn").addEventListener("click", async () => {
    await controller.refresh();
    paint();
  });

  el<HTMLButtonElement>("whatif-btn").addEventListener("click", async () => {
    const action = parseActionText(whatifAction.value);
    const outcomes = parseOutcomesText(whatifOutcomes.value);
    if (action === null || outcomes === null) {
      controller.lastError =
        "could not parse the hypothetical (action like 1,4; outcomes like 1=E,4=D)";
      paint();
      return;
    }
    await controller.exploreWhatIf(action, outcomes);
    paint();
  });

  screen.addEventListener("click", async (ev) => {
    const target = (ev.target as HTMLElement).closest("[data-act]");
    if (!(target instanceof HTMLElement)) {
      return;
    }
    const act = target.dataset.act;
    if (act === "toggle") {
      const branch = Number(target.dataset.branch);
      const status = target.dataset.status as "E" | "D";
      controller.setToggle(branch, status);
      paint();
    } else if (act === "submit") {
      await controller.submitOutcomes();
      paint();
    } else if (act === "set-action") {
      const input = document.getElementById("action-input");
      const text = input instanceof HTMLInputElement ? input.value : "";
      const action = parseActionText(text);
      if (action === null) {
        controller.lastError = `could not parse action ${JSON.stringify(text)}`;
      } else {
        controller.setAction(action);
      }
      paint();
    }
  });

  paint();
}

window.addEventListener("DOMContentLoaded", start);
