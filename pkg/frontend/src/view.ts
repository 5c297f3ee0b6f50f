/** Pure view-model builders; everything here is unit-testable without a DOM.
 *
 * All displayed numbers originate from service responses. The only client
 * arithmetic is chart decoration (the max-price band position); schedule
 * optimality is never re-judged here.
 */

import type { GatewayVerdict, IterationRecord, RunTraceDoc, ScheduleDoc } from "./types.js";

export const SLOTS_PER_DAY = 96;
export const EXPENSIVE_WINDOW_SLOTS = 12;

export function slotToTime(slot: number): string {
  const hours = Math.floor(slot / 4);
  const minutes = (slot % 4) * 15;
  return `${String(hours).padStart(2, "0")}:${String(minutes).padStart(2, "0")}`;
}

export interface WindowSpan {
  startSlot: number;
  endSlot: number; // exclusive
  sum: number;
}

/** Start of the most expensive consecutive window (earliest on ties). */
export function maxWindow(prices: number[], windowSize = EXPENSIVE_WINDOW_SLOTS): WindowSpan {
  if (prices.length < windowSize || windowSize < 1) {
    throw new Error(`need at least ${windowSize} prices`);
  }
  let sum = 0;
  for (let i = 0; i < windowSize; i += 1) sum += prices[i]!;
  let best = sum;
  let bestStart = 0;
  for (let start = 1; start + windowSize <= prices.length; start += 1) {
    sum += prices[start + windowSize - 1]! - prices[start - 1]!;
    if (sum > best) {
      best = sum;
      bestStart = start;
    }
  }
  return { startSlot: bestStart, endSlot: bestStart + windowSize, sum: best };
}

export interface ScheduleOverlay {
  applianceId: string;
  startSlot: number;
  endSlot: number; // exclusive
  lane: number;
  label: string;
  costEur: number;
}

const LANE_ORDER = ["washing_machine", "dishwasher", "ev_charger"];

export function buildOverlays(schedules: ScheduleDoc[]): ScheduleOverlay[] {
  const sorted = [...schedules].sort(
    (a, b) => LANE_ORDER.indexOf(a.appliance_id) - LANE_ORDER.indexOf(b.appliance_id),
  );
  return sorted.map((doc, index) => ({
    applianceId: doc.appliance_id,
    startSlot: doc.start_slot,
    endSlot: doc.start_slot + doc.duration_slots,
    lane: index,
    label: `${doc.appliance_id} ${slotToTime(doc.start_slot)} (${doc.estimated_cost_eur.toFixed(2)} EUR)`,
    costEur: doc.estimated_cost_eur,
  }));
}

export interface ChartModel {
  width: number;
  height: number;
  /** Step-line path over the 96 prices. */
  pricePath: string;
  /** Shaded most-expensive-window band, in pixels. */
  band: { x: number; width: number; startSlot: number; endSlot: number };
  /** One bar per schedule, in its own lane. */
  bars: Array<{ x: number; y: number; width: number; height: number; overlay: ScheduleOverlay }>;
  yLabels: Array<{ y: number; text: string }>;
  xLabels: Array<{ x: number; text: string }>;
}

const PRICE_AREA_HEIGHT = 180;
const LANE_HEIGHT = 16;
const LANE_GAP = 4;

export function buildChartModel(
  prices: number[],
  schedules: ScheduleDoc[],
  width = 960,
): ChartModel {
  if (prices.length !== SLOTS_PER_DAY) {
    throw new Error(`expected ${SLOTS_PER_DAY} prices, got ${prices.length}`);
  }
  const overlays = buildOverlays(schedules);
  const slotWidth = width / SLOTS_PER_DAY;
  const lo = Math.min(...prices);
  const hi = Math.max(...prices);
  const span = hi - lo || 1;
  const yOf = (price: number) => PRICE_AREA_HEIGHT - ((price - lo) / span) * (PRICE_AREA_HEIGHT - 10);

  const segments: string[] = [];
  prices.forEach((price, slot) => {
    const x0 = slot * slotWidth;
    const y = yOf(price);
    segments.push(`${slot === 0 ? "M" : "L"}${x0.toFixed(1)},${y.toFixed(1)}`);
    segments.push(`L${(x0 + slotWidth).toFixed(1)},${y.toFixed(1)}`);
  });

  const band = maxWindow(prices);
  const bars = overlays.map((overlay) => ({
    x: overlay.startSlot * slotWidth,
    y: PRICE_AREA_HEIGHT + 8 + overlay.lane * (LANE_HEIGHT + LANE_GAP),
    width: (overlay.endSlot - overlay.startSlot) * slotWidth,
    height: LANE_HEIGHT,
    overlay,
  }));
  const height = PRICE_AREA_HEIGHT + 8 + 3 * (LANE_HEIGHT + LANE_GAP) + 24;

  return {
    width,
    height,
    pricePath: segments.join(" "),
    band: {
      x: band.startSlot * slotWidth,
      width: (band.endSlot - band.startSlot) * slotWidth,
      startSlot: band.startSlot,
      endSlot: band.endSlot,
    },
    bars,
    yLabels: [
      { y: yOf(hi), text: hi.toFixed(0) },
      { y: yOf(lo), text: lo.toFixed(0) },
    ],
    xLabels: [0, 24, 48, 72, 95].map((slot) => ({
      x: slot * slotWidth,
      text: slotToTime(slot),
    })),
  };
}

export interface UiRunView {
  runId: string;
  requestText: string;
  status: string;
  finished: boolean;
  iterations: IterationRecord[];
  overlays: ScheduleOverlay[];
  totalCostEur: number;
  costSummary: string;
  summary: string;
  totalTokens: number;
}

/** Renders exactly what the service returned; no optimality re-checks. */
export function buildRunView(trace: RunTraceDoc): UiRunView {
  const overlays = buildOverlays(trace.schedules);
  const totalCostEur = overlays.reduce((acc, o) => acc + o.costEur, 0);
  const status = trace.complete ? trace.outcome : "running";
  return {
    runId: trace.run_id,
    requestText: extractRequest(trace.request ?? ""),
    status,
    finished: trace.outcome === "finished",
    iterations: trace.iterations,
    overlays,
    totalCostEur,
    costSummary:
      overlays.length > 0
        ? `${overlays.length} schedule(s), total estimated cost ${totalCostEur.toFixed(2)} EUR`
        : "no schedules committed",
    summary: trace.summary,
    totalTokens: trace.total_tokens,
  };
}

/** Show the user's own words, not the privilege envelope around them. */
export function extractRequest(wrappedOrPlain: string): string {
  const match = /<user_input>([\s\S]*)<\/user_input>/.exec(wrappedOrPlain);
  return match ? match[1]! : wrappedOrPlain;
}

export function formatVerdict(verdict: GatewayVerdict, status: number): string[] {
  const lines = [
    `Request rejected (HTTP ${status})`,
    `decision: ${verdict.decision}`,
    `reason: ${verdict.reason}`,
    `risk: ${verdict.risk}`,
  ];
  if (verdict.matched_categories.length > 0) {
    lines.push(`categories: ${verdict.matched_categories.join(", ")}`);
  }
  if (verdict.matched_pattern_ids.length > 0) {
    lines.push(`patterns: ${verdict.matched_pattern_ids.join(", ")}`);
  }
  return lines;
}

export interface ExampleGroup {
  title: string;
  prompts: string[];
}

/** Example prompts grouped by complexity. */
export const EXAMPLE_GROUPS: ExampleGroup[] = [
  {
    title: "Single Appliance",
    prompts: [
      "Schedule my washing machine at the cheapest time",
      "Please run the dishwasher overnight",
      "Charge my car so it is ready by 7am",
    ],
  },
  {
    title: "Multiple Appliances",
    prompts: [
      "Schedule all flexible loads for tomorrow",
      "Schedule the dishwasher and the washing machine",
    ],
  },
  {
    title: "Natural Language Variations",
    prompts: [
      "I need the car charged before my morning meeting",
      "When is electricity cheapest tonight?",
      "What is the most expensive 3-hour window today?",
    ],
  },
];

export interface AnalyticsRow {
  label: string;
  value: string;
}

export function analyticsRows(doc: import("./types.js").AnalyticsDoc): AnalyticsRow[] {
  const rows: AnalyticsRow[] = [
    { label: "Runs", value: String(doc.runs) },
    { label: "Avg Iter.", value: doc.avg_iterations.toFixed(1) },
    { label: "Avg Tokens", value: Math.round(doc.avg_tokens).toLocaleString("en-US") },
    { label: "Avg Time (s)", value: (doc.avg_wall_ms / 1000).toFixed(1) },
    { label: "Schedules", value: String(doc.schedules_committed) },
  ];
  for (const [applianceId, stats] of Object.entries(doc.appliances)) {
    const ratio =
      stats.scheduled > 0
        ? `${stats.optimal}/${stats.scheduled} (${Math.round((100 * stats.optimal) / stats.scheduled)}%)`
        : "0/0 (---)";
    rows.push({ label: `${applianceId} optimal`, value: ratio });
  }
  return rows;
}
