/** Wire types mirroring the service's JSON bodies. */

export interface IterationRecord {
  index: number;
  thought: string;
  action_verb: string;
  action_args: Record<string, string>;
  action_raw: string;
  observation: string;
  prompt_tokens: number;
  completion_tokens: number;
  warnings: string[];
}

export interface ScheduleDoc {
  appliance_id: string;
  market_date: string;
  start_slot: number;
  duration_slots: number;
  states: number[];
  price_sum_eur_mwh: number;
  estimated_cost_eur: number;
  reasoning: string;
  run_id?: string;
}

export interface RunTraceDoc {
  run_id: string;
  request?: string;
  scenario?: string;
  stage?: string;
  market_date?: string;
  iterations: IterationRecord[];
  schedules: ScheduleDoc[];
  outcome: string;
  summary: string;
  prompt_tokens: number;
  completion_tokens: number;
  total_tokens: number;
  wall_ms: number;
  complete: boolean;
}

export interface GatewayVerdict {
  decision: string;
  risk: string;
  matched_pattern_ids: string[];
  matched_categories: string[];
  reason: string;
}

export interface PriceCurveDoc {
  market_date: string;
  zone: string;
  unit: string;
  source: string;
  prices: number[];
}

export interface RunSummaryDoc {
  run_id: string;
  scenario: string;
  stage: string;
  outcome: string;
  iterations: number;
  total_tokens: number;
  created_at: string;
}

export interface RunListDoc {
  runs: RunSummaryDoc[];
  total: number;
  offset: number;
  limit: number;
}

export interface AnalyticsDoc {
  runs: number;
  outcomes: Record<string, number>;
  avg_iterations: number;
  avg_tokens: number;
  avg_wall_ms: number;
  schedules_committed: number;
  appliances: Record<string, { scheduled: number; optimal: number }>;
}
