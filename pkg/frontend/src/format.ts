/** Display formatting. Purely cosmetic: every value formatted here was
 * produced by the service; nothing is derived or recomputed client-side.
 */

import type { BranchStatus } from "./api.js";

/** Action set in brace notation, e.g. [1,4] -> "{1,4}". */
export function fmtAction(action: number[]): string {
  return `{${action.join(",")}}`;
}

/** Expected-steps value trimmed of float noise: 2.9048000000000003 -> "2.9048". */
export function fmtSteps(value: number): string {
  if (!Number.isFinite(value)) {
    return String(value);
  }
  return String(parseFloat(value.toPrecision(10)));
}

/** Outcome map in stable branch order, e.g. {1:"D",4:"E"} -> "1:D, 4:E". */
export function fmtOutcomes(outcomes: Record<string, string>): string {
  return Object.keys(outcomes)
    .map((k) => Number(k))
    .sort((a, b) => a - b)
    .map((k) => `${k}:${outcomes[String(k)]}`)
    .join(", ");
}

/** Parse "1,4" or "{1,4}" into an action, or null when unparseable. */
export function parseActionText(text: string): number[] | null {
  const trimmed = text.trim().replace(/^\{/, "").replace(/\}$/, "");
  if (trimmed === "") {
    return [];
  }
  const parts = trimmed.split(",").map((p) => p.trim());
  const out: number[] = [];
  for (const part of parts) {
    if (!/^-?\d+$/.test(part)) {
      return null;
    }
    out.push(Number(part));
  }
  return out;
}

export function statusLabel(status: BranchStatus): string {
  switch (status) {
    case "U":
      return "unknown";
    case "E":
      return "energized";
    case "D":
      return "damaged";
  }
}
