/** Pure renderers: view state in, HTML/SVG strings out.
 *
 * Everything here is a string-building function with no DOM or network
 * access, so the exact markup the operator sees is assertable from plain
 * node tests. All numbers and statuses passed in originate from service
 * responses; the renderers only format them.
 */

import type { NetworkDoc, SessionBody } from "./api.js";
import { layoutNetwork } from "./layout.js";
import { fmtAction, fmtOutcomes, fmtSteps } from "./format.js";
import type { TimelineStep, WhatIfView } from "./controller.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function badgeFor(kind: string): string {
  switch (kind) {
    case "transmission_source":
      return "transmission";
    case "der_source":
      return "DER";
    case "load":
      return "load";
    default:
      return kind;
  }
}

/** Buses connected to any source through energized branches.
 *
 * Pure presentation semantics of the state string (which buses light up,
 * and whether a terminal state is a completed restoration or a dead end);
 * no probabilities or expected values are derived here.
 */
export function energizedBuses(net: NetworkDoc, state: string): Set<string> {
  const adjacency = new Map<string, string[]>();
  for (const br of net.branches) {
    if (state[br.index] !== "E") {
      continue;
    }
    const [a, b] = br.endpoints;
    adjacency.set(a, [...(adjacency.get(a) ?? []), b]);
    adjacency.set(b, [...(adjacency.get(b) ?? []), a]);
  }
  const live = new Set<string>();
  const queue: string[] = [];
  for (const bus of net.buses) {
    if (bus.kind === "transmission_source" || bus.kind === "der_source") {
      live.add(bus.id);
      queue.push(bus.id);
    }
  }
  while (queue.length > 0) {
    const bus = queue.pop()!;
    for (const next of adjacency.get(bus) ?? []) {
      if (!live.has(next)) {
        live.add(next);
        queue.push(next);
      }
    }
  }
  return live;
}

/** Whether a state satisfies the session's goal: the target bus energized,
 * or with no target, every bus energized. */
function goalReached(
  net: NetworkDoc,
  state: string,
  targetBus: string | null,
): boolean {
  const live = energizedBuses(net, state);
  if (targetBus !== null) {
    return live.has(targetBus);
  }
  return net.buses.every((b) => live.has(b.id));
}

/** Network diagram as an SVG string.
 *
 * Branch edges carry `st-U` / `st-E` / `st-D` classes mirroring the
 * session state string, plus `rec` for members of the highlighted
 * (recommended) action and `tie` for normally-open branches. Bus nodes
 * carry a kind badge. Layout is deterministic per network document.
 */
export function renderNetwork(
  net: NetworkDoc,
  state: string,
  highlight: ReadonlySet<number>,
): string {
  const layout = layoutNetwork(net);
  const pos = (id: string) => layout.positions.get(id) ?? { x: 0, y: 0 };

  // Parallel branches between the same bus pair bow outward so each stays
  // visible and clickable.
  const groups = new Map<string, number[]>();
  for (const br of net.branches) {
    const key = [...br.endpoints].sort().join("|");
    const list = groups.get(key) ?? [];
    list.push(br.index);
    groups.set(key, list);
  }

  const parts: string[] = [];
  parts.push(
    `<svg class="network" viewBox="0 0 ${layout.width} ${layout.height}" ` +
      `role="img" data-seed="${layout.seed}">`,
  );

  for (const br of net.branches) {
    const a = pos(br.endpoints[0]);
    const b = pos(br.endpoints[1]);
    const status = state[br.index] ?? "U";
    const key = [...br.endpoints].sort().join("|");
    const siblings = groups.get(key) ?? [br.index];
    const ordinal = siblings.indexOf(br.index);
    const bow = (ordinal - (siblings.length - 1) / 2) * 28;
    const mx = (a.x + b.x) / 2;
    const my = (a.y + b.y) / 2;
    const len = Math.max(1e-6, Math.hypot(b.x - a.x, b.y - a.y));
    const nx = -(b.y - a.y) / len;
    const ny = (b.x - a.x) / len;
    const cx = mx + nx * bow;
    const cy = my + ny * bow;
    const lx = mx + nx * (bow * 0.75 + 14);
    const ly = my + ny * (bow * 0.75 + 14);
    const classes = ["branch", `st-${status}`];
    if (highlight.has(br.index)) {
      classes.push("rec");
    }
    if (br.normally_open) {
      classes.push("tie");
    }
    const title =
      `branch ${br.index} (${br.endpoints[0]}–${br.endpoints[1]})` +
      ` — ${status === "U" ? "unknown" : status === "E" ? "energized" : "damaged"}`;
    parts.push(
      `<g class="${classes.join(" ")}" data-branch="${br.index}">` +
        `<title>${escapeHtml(title)}</title>` +
        `<path d="M ${a.x} ${a.y} Q ${cx} ${cy} ${b.x} ${b.y}" fill="none"/>` +
        `<text class="branch-label" x="${Math.round(lx)}" y="${Math.round(ly)}">${br.index}</text>` +
        `</g>`,
    );
  }

  const live = energizedBuses(net, state);
  for (const bus of net.buses) {
    const p = pos(bus.id);
    const badge = badgeFor(bus.kind);
    const busClasses = ["bus", `kind-${bus.kind}`];
    if (live.has(bus.id)) {
      busClasses.push("live");
    }
    parts.push(
      `<g class="${busClasses.map(escapeHtml).join(" ")}" data-bus="${escapeHtml(bus.id)}">` +
        `<title>${escapeHtml(`${bus.id} — ${badge}`)}</title>` +
        `<circle cx="${p.x}" cy="${p.y}" r="16"/>` +
        `<text class="bus-id" x="${p.x}" y="${p.y + 4}">${escapeHtml(bus.id)}</text>` +
        `<text class="bus-badge" x="${p.x}" y="${p.y + 32}">${escapeHtml(badge)}</text>` +
        `</g>`,
    );
  }

  parts.push("</svg>");
  return parts.join("");
}

/** One-line session status strip above the diagram. */
export function renderStatusLine(body: SessionBody): string {
  const name = body.name ? escapeHtml(body.name) : "(unnamed)";
  const target =
    body.target_bus === null
      ? "full restoration"
      : `target bus ${escapeHtml(body.target_bus)}`;
  return (
    `<div class="status-line" data-state="${escapeHtml(body.state)}">` +
    `<span class="session-name">${name}</span>` +
    ` <span class="goal">[${target}]</span>` +
    ` <code class="state-string">${escapeHtml(body.state)}</code>` +
    `</div>`
  );
}

export function renderRecommendation(body: SessionBody): string {
  if (body.terminal) {
    const note = goalReached(body.network, body.state, body.target_bus)
      ? "Session complete — no action available."
      : "Dead end — no feasible action restores the remaining buses.";
    return (
      `<div class="recommendation terminal">` +
      `<span class="rec-note">${note}</span>` +
      ` <span class="remaining">Expected steps remaining: ` +
      `<b>${fmtSteps(body.value)}</b></span>` +
      `</div>`
    );
  }
  const rec =
    body.recommendation === null
      ? "(none)"
      : `<code class="rec-action">${fmtAction(body.recommendation)}</code>`;
  return (
    `<div class="recommendation">` +
    `<span class="rec-label">Recommended action:</span> ${rec}` +
    ` <span class="remaining">Expected steps remaining: ` +
    `<b>${fmtSteps(body.value)}</b></span>` +
    `</div>`
  );
}

/** Per-branch E/D toggles for the action being recorded.
 *
 * The submit button stays disabled until every branch of the action has
 * an outcome selected — outcomes must cover the action exactly.
 */
export function renderOutcomeForm(
  pendingAction: number[],
  toggles: Record<number, "E" | "D">,
  canSubmit: boolean,
  terminal: boolean,
): string {
  if (terminal) {
    return `<div class="outcome-form terminal">No further outcomes to record.</div>`;
  }
  const rows = pendingAction
    .map((branch) => {
      const chosen = toggles[branch];
      const btn = (status: "E" | "D", label: string) =>
        `<button type="button" data-act="toggle" data-branch="${branch}" ` +
        `data-status="${status}" class="toggle${chosen === status ? " on" : ""}">` +
        `${label}</button>`;
      return (
        `<div class="outcome-row" data-branch="${branch}">` +
        `<span class="branch-name">branch ${branch}</span>` +
        btn("E", "energized") +
        btn("D", "damaged") +
        `</div>`
      );
    })
    .join("");
  const actionText = pendingAction.join(",");
  return (
    `<div class="outcome-form">` +
    `<div class="action-picker">` +
    `<label>Action to record: <input id="action-input" value="${actionText}"/></label>` +
    `<button type="button" data-act="set-action">apply</button>` +
    `</div>` +
    rows +
    `<button type="button" data-act="submit" class="submit"` +
    `${canSubmit ? "" : " disabled"}>Record outcomes</button>` +
    `</div>`
  );
}

export function renderTimeline(steps: TimelineStep[]): string {
  if (steps.length === 0) {
    return `<div class="timeline empty">No steps recorded yet.</div>`;
  }
  const rows = steps
    .map((step, i) => {
      const remaining =
        step.remaining === null ? "—" : fmtSteps(step.remaining);
      return (
        `<tr data-step="${i}">` +
        `<td class="tl-num">${i + 1}</td>` +
        `<td class="tl-action">${fmtAction(step.action)}</td>` +
        `<td class="tl-outcomes">${escapeHtml(fmtOutcomes(step.outcomes))}</td>` +
        `<td class="tl-remaining">${remaining}</td>` +
        `</tr>`
      );
    })
    .join("");
  return (
    `<table class="timeline">` +
    `<thead><tr><th>#</th><th>action</th><th>outcomes</th>` +
    `<th>steps remaining after</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

/** Read-only what-if panel body. Labels values as expected steps
 * remaining; a terminal successor is annotated as restored or dead end
 * according to which buses its energized branches reach.
 */
export function renderWhatIf(
  view: WhatIfView | null,
  net: NetworkDoc,
  targetBus: string | null,
): string {
  if (view === null) {
    return `<div class="whatif-result empty">No hypothesis explored yet.</div>`;
  }
  if (view.kind === "notice") {
    return `<div class="whatif-result notice">${escapeHtml(view.message)}</div>`;
  }
  let suffix = "";
  if (view.nextAction === null) {
    if (goalReached(net, view.successor, targetBus)) {
      suffix = targetBus === null ? " (restored)" : " (target restored)";
    } else {
      suffix = " (dead end)";
    }
  }
  const followUp =
    view.nextAction === null
      ? ""
      : `<div class="wi-next">next action there: ` +
        `<code>${fmtAction(view.nextAction)}</code></div>`;
  return (
    `<div class="whatif-result">` +
    `<div class="wi-successor">successor state: ` +
    `<code>${escapeHtml(view.successor)}</code></div>` +
    `<div class="wi-remaining">${fmtSteps(view.remaining)} steps remaining${suffix}</div>` +
    followUp +
    `</div>`
  );
}

export function renderError(message: string | null): string {
  if (message === null) {
    return "";
  }
  return `<div class="error-banner">${escapeHtml(message)}</div>`;
}
