/** Deterministic force-directed layout for the network diagram.
 *
 * The RNG seed is a hash of the network document itself, so the same
 * network always lands in the same positions (reproducible screenshots)
 * while different networks get visibly different arrangements. The
 * embedder is a plain spring model run for a fixed number of rounds —
 * no randomness after seeding, no dependence on iteration timing.
 */

import type { NetworkDoc } from "./api.js";

export interface Point {
  x: number;
  y: number;
}

export interface Layout {
  /** Bus id -> position within the [0,width]x[0,height] box. */
  positions: Map<string, Point>;
  width: number;
  height: number;
  seed: number;
}

/** FNV-1a over the UTF-8 bytes of a string, as an unsigned 32-bit int. */
export function fnv1a(text: string): number {
  const bytes = new TextEncoder().encode(text);
  let hash = 0x811c9dc5;
  for (const b of bytes) {
    hash ^= b;
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

export function networkSeed(net: NetworkDoc): number {
  return fnv1a(JSON.stringify(net));
}

/** mulberry32: tiny deterministic PRNG over a 32-bit state. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = 48;
const ROUNDS = 300;

export function layoutNetwork(net: NetworkDoc): Layout {
  const seed = networkSeed(net);
  const rng = mulberry32(seed);
  const n = net.buses.length;
  const ids = net.buses.map((b) => b.id);
  const index = new Map(ids.map((id, i) => [id, i]));

  // Start on a circle with seeded jitter so symmetric networks still
  // break symmetry the same way every run.
  const xs = new Array<number>(n);
  const ys = new Array<number>(n);
  const cx = WIDTH / 2;
  const cy = HEIGHT / 2;
  const r0 = Math.min(WIDTH, HEIGHT) / 2 - MARGIN;
  for (let i = 0; i < n; i++) {
    const angle = (2 * Math.PI * i) / Math.max(n, 1) + (rng() - 0.5) * 0.5;
    const radius = r0 * (0.6 + 0.4 * rng());
    xs[i] = cx + radius * Math.cos(angle);
    ys[i] = cy + radius * Math.sin(angle);
  }

  const edges: Array<[number, number]> = [];
  for (const br of net.branches) {
    const a = index.get(br.endpoints[0]);
    const b = index.get(br.endpoints[1]);
    if (a !== undefined && b !== undefined && a !== b) {
      edges.push([a, b]);
    }
  }

  const rest = Math.max(80, (2 * r0) / Math.max(1, Math.sqrt(n)));
  const repulse = rest * rest;
  for (let round = 0; round < ROUNDS; round++) {
    const cool = 1 - round / ROUNDS;
    const fx = new Array<number>(n).fill(0);
    const fy = new Array<number>(n).fill(0);
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let dx = xs[i]! - xs[j]!;
        let dy = ys[i]! - ys[j]!;
        let d2 = dx * dx + dy * dy;
        if (d2 < 1e-6) {
          dx = 0.01 * (i - j);
          dy = 0.01;
          d2 = dx * dx + dy * dy;
        }
        const f = repulse / d2;
        const d = Math.sqrt(d2);
        fx[i]! += (dx / d) * f;
        fy[i]! += (dy / d) * f;
        fx[j]! -= (dx / d) * f;
        fy[j]! -= (dy / d) * f;
      }
    }
    for (const [a, b] of edges) {
      const dx = xs[b]! - xs[a]!;
      const dy = ys[b]! - ys[a]!;
      const d = Math.max(1e-3, Math.hypot(dx, dy));
      const f = (d - rest) * 0.08;
      fx[a]! += (dx / d) * f;
      fy[a]! += (dy / d) * f;
      fx[b]! -= (dx / d) * f;
      fy[b]! -= (dy / d) * f;
    }
    for (let i = 0; i < n; i++) {
      fx[i]! += (cx - xs[i]!) * 0.01;
      fy[i]! += (cy - ys[i]!) * 0.01;
      const step = Math.min(12, Math.hypot(fx[i]!, fy[i]!)) * cool;
      const norm = Math.max(1e-9, Math.hypot(fx[i]!, fy[i]!));
      xs[i] = xs[i]! + (fx[i]! / norm) * step;
      ys[i] = ys[i]! + (fy[i]! / norm) * step;
      xs[i] = Math.min(WIDTH - MARGIN, Math.max(MARGIN, xs[i]!));
      ys[i] = Math.min(HEIGHT - MARGIN, Math.max(MARGIN, ys[i]!));
    }
  }

  const positions = new Map<string, Point>();
  for (let i = 0; i < n; i++) {
    positions.set(ids[i]!, {
      x: Math.round(xs[i]! * 100) / 100,
      y: Math.round(ys[i]! * 100) / 100,
    });
  }
  return { positions, width: WIDTH, height: HEIGHT, seed };
}
