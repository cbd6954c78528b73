/** Built-in sample scenarios with inline networks, so the console works
 * against a bare service with no shared filesystem. These mirror the
 * repository fixtures byte-for-byte in content.
 */

import type { NetworkDoc } from "./api.js";

export interface ScenarioDoc {
  name: string;
  comment?: string;
  network: NetworkDoc;
  fragility: object;
  initial_history?: Array<{ action: number[]; outcomes: Record<string, string> }>;
  forbid_source_island_merge?: boolean;
}

export const RING_SCENARIO_1: ScenarioDoc = {
  name: "scenario_1",
  comment:
    "Ring drill: the supply branch is intact and already closed; per-branch damage probabilities from the shake-map table.",
  network: {
    name: "ring_6bus",
    comment: "Six-bus ring fed from the grid at b1; every other bus is a load tap.",
    buses: [
      { id: "b1", kind: "transmission_source" },
      { id: "b2", kind: "load" },
      { id: "b3", kind: "load" },
      { id: "b4", kind: "load" },
      { id: "b5", kind: "load" },
      { id: "b6", kind: "load" },
    ],
    branches: [
      { index: 0, endpoints: ["b1", "b2"], normally_open: false },
      { index: 1, endpoints: ["b2", "b3"], normally_open: false },
      { index: 2, endpoints: ["b2", "b4"], normally_open: false },
      { index: 3, endpoints: ["b3", "b5"], normally_open: false },
      { index: 4, endpoints: ["b4", "b6"], normally_open: false },
      { index: 5, endpoints: ["b5", "b6"], normally_open: false },
    ],
  },
  fragility: {
    overrides: { "0": 0.0, "1": 0.7, "2": 0.4, "3": 0.4, "4": 0.4, "5": 0.4 },
  },
  initial_history: [{ action: [0], outcomes: { "0": "E" } }],
};

export const TWO_SOURCE_SCENARIO: ScenarioDoc = {
  name: "scenario_two_source",
  comment:
    "Uniform damage probability 0.2 on the two-source network; island interconnection disabled.",
  network: {
    name: "two_source_6bus",
    comment:
      "Six-bus feeder pair: grid supply at b1, DER at b6, normally-open tie between b4 and b5.",
    buses: [
      { id: "b1", kind: "transmission_source" },
      { id: "b2", kind: "load" },
      { id: "b3", kind: "load" },
      { id: "b4", kind: "load" },
      { id: "b5", kind: "load" },
      { id: "b6", kind: "der_source" },
    ],
    branches: [
      { index: 0, endpoints: ["b1", "b2"], normally_open: false },
      { index: 1, endpoints: ["b2", "b3"], normally_open: false },
      { index: 2, endpoints: ["b2", "b4"], normally_open: false },
      { index: 3, endpoints: ["b3", "b5"], normally_open: false },
      { index: 4, endpoints: ["b4", "b5"], normally_open: true },
      { index: 5, endpoints: ["b3", "b6"], normally_open: false },
    ],
  },
  fragility: {
    overrides: { "0": 0.2, "1": 0.2, "2": 0.2, "3": 0.2, "4": 0.2, "5": 0.2 },
  },
  forbid_source_island_merge: true,
};

export const SAMPLES: Record<string, ScenarioDoc> = {
  "ring scenario 1": RING_SCENARIO_1,
  "two-source 0.2": TWO_SOURCE_SCENARIO,
};
