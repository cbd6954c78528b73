/** Console state machine.
 *
 * One controller drives one session (single session per tab). There is no
 * optimistic UI: every mutation round-trips to the service and the screen
 * re-renders from the response, so the rendered state always equals what
 * GET /sessions/{id} would return. The controller never computes
 * probabilities or expected steps itself — the timeline's
 * "steps remaining" column is filled from the `value` field of the
 * service response that produced each step.
 */

import {
  ApiClient,
  ApiError,
  type BranchStatus,
  type SessionBody,
} from "./api.js";
import {
  renderError,
  renderNetwork,
  renderOutcomeForm,
  renderRecommendation,
  renderStatusLine,
  renderTimeline,
  renderWhatIf,
} from "./render.js";

export interface TimelineStep {
  action: number[];
  outcomes: Record<string, string>;
  /** Expected steps remaining after this step, as reported by the service
   * response that carried it; null for steps imported with the scenario
   * whose post-step value was never part of any response we saw. */
  remaining: number | null;
}

export type WhatIfView =
  | { kind: "result"; successor: string; remaining: number; nextAction: number[] | null }
  | { kind: "notice"; message: string };

export class ConsoleController {
  session: SessionBody | null = null;
  pendingAction: number[] = [];
  toggles: Record<number, "E" | "D"> = {};
  whatIfView: WhatIfView | null = null;
  lastError: string | null = null;

  private remainingByStep = new Map<number, number>();

  constructor(public readonly api: ApiClient) {}

  /** Adopt a session body returned by the service as the rendered truth. */
  private adopt(body: SessionBody): void {
    this.session = body;
    if (body.history.length > 0) {
      // The body's value is the expected steps remaining after the last
      // recorded step, so that row of the timeline is known exactly.
      this.remainingByStep.set(body.history.length - 1, body.value);
    }
    this.pendingAction = body.recommendation === null ? [] : [...body.recommendation];
    this.toggles = {};
    this.whatIfView = null;
    this.lastError = null;
  }

  async loadScenario(scenarioText: string): Promise<void> {
    try {
      const body = await this.api.createSession(scenarioText);
      this.remainingByStep = new Map();
      this.adopt(body);
    } catch (exc) {
      this.noteError(exc);
    }
  }

  /** Re-read the session from the service without touching anything else. */
  async refresh(): Promise<void> {
    if (this.session === null) {
      return;
    }
    try {
      this.session = await this.api.getSession(this.session.id);
    } catch (exc) {
      this.noteError(exc);
    }
  }

  setAction(action: number[]): void {
    this.pendingAction = [...action];
    const kept: Record<number, "E" | "D"> = {};
    for (const b of action) {
      const t = this.toggles[b];
      if (t !== undefined) {
        kept[b] = t;
      }
    }
    this.toggles = kept;
  }

  setToggle(branch: number, status: "E" | "D"): void {
    if (!this.pendingAction.includes(branch)) {
      return;
    }
    this.toggles[branch] = status;
  }

  /** Outcomes must cover the pending action exactly before submit enables. */
  canSubmit(): boolean {
    if (this.session === null || this.session.terminal) {
      return false;
    }
    if (this.pendingAction.length === 0) {
      return false;
    }
    return this.pendingAction.every((b) => this.toggles[b] !== undefined);
  }

  async submitOutcomes(): Promise<void> {
    if (this.session === null) {
      this.lastError = "no active session";
      return;
    }
    if (!this.canSubmit()) {
      this.lastError = "every branch of the action needs an outcome before submitting";
      return;
    }
    const outcomes: Record<number, BranchStatus> = {};
    for (const b of this.pendingAction) {
      outcomes[b] = this.toggles[b]!;
    }
    try {
      const body = await this.api.postObservation(
        this.session.id,
        this.pendingAction,
        outcomes,
      );
      this.adopt(body);
    } catch (exc) {
      // A rejected observation (infeasible action, contradictory outcome)
      // leaves both the service session and the rendered state untouched.
      this.noteError(exc);
    }
  }

  /** Read-only exploration; never mutates the session. */
  async exploreWhatIf(
    action: number[],
    outcomes: Record<number, BranchStatus>,
  ): Promise<void> {
    if (this.session === null) {
      this.lastError = "no active session";
      return;
    }
    try {
      const body = await this.api.whatIf(this.session.id, action, outcomes);
      this.whatIfView = {
        kind: "result",
        successor: body.successor,
        remaining: body.remaining,
        nextAction: body.next_action,
      };
    } catch (exc) {
      if (exc instanceof ApiError && (exc.status === 409 || exc.status === 422)) {
        this.whatIfView = {
          kind: "notice",
          message: `infeasible hypothetical: ${exc.message}`,
        };
        return;
      }
      this.noteError(exc);
    }
  }

  private noteError(exc: unknown): void {
    if (exc instanceof ApiError) {
      this.lastError = `${exc.code}: ${exc.message}`;
    } else {
      this.lastError = String(exc);
    }
  }

  /** Timeline rows derived from the service history verbatim, with the
   * steps-remaining column filled from recorded response values. */
  timeline(): TimelineStep[] {
    if (this.session === null) {
      return [];
    }
    return this.session.history.map((entry, i) => ({
      action: [...entry.action],
      outcomes: { ...entry.outcomes },
      remaining: this.remainingByStep.get(i) ?? null,
    }));
  }

  /** Branch indices highlighted in the diagram: exactly the service's
   * current recommendation. */
  highlight(): Set<number> {
    if (this.session === null || this.session.recommendation === null) {
      return new Set();
    }
    return new Set(this.session.recommendation);
  }

  /** Full screen as one HTML string. */
  renderAll(): string {
    const error = renderError(this.lastError);
    if (this.session === null) {
      return error + `<div class="placeholder">No session loaded.</div>`;
    }
    const s = this.session;
    return (
      error +
      renderStatusLine(s) +
      renderNetwork(s.network, s.state, this.highlight()) +
      renderRecommendation(s) +
      renderOutcomeForm(
        this.pendingAction,
        this.toggles,
        this.canSubmit(),
        s.terminal,
      ) +
      renderTimeline(this.timeline()) +
      renderWhatIf(this.whatIfView, s.network, s.target_bus)
    );
  }
}
