/** Wire types mirroring the service's request and response documents. */

export interface DemandGroupDoc {
  activities: string[];
  lower_bound: number;
}

export interface ScenarioDoc {
  name: string;
  magnitudes: Record<string, number>;
  receptor_limits: Record<string, number>;
  costs?: Record<string, number> | null;
  budget?: number | null;
  demand_groups?: DemandGroupDoc[];
}

export interface StoredScenario {
  id: string;
  version: number;
  scenario: ScenarioDoc;
}

export interface ActivityInfo {
  id: string;
  name: string;
  category: string;
  unit: string;
}

export interface EntityInfo {
  id: string;
  name: string;
}

export interface MatrixSummary {
  loaded: boolean;
  nope?: number;
  npre?: number;
  nric?: number;
  activities?: ActivityInfo[];
  impacts?: (EntityInfo & { polarity: string })[];
  receptors?: EntityInfo[];
}

export interface FootprintResponse {
  scenario_name: string;
  impacts: Record<string, number>;
  receptors: Record<string, number>;
}

export interface CausalResponse {
  target: string;
  target_kind: "impact" | "receptor";
  probability: number;
  elapsed_ms: number;
}

export interface ConstraintSensitivityDoc {
  index: number;
  name: string;
  dual: number;
  slack: number;
  binding: boolean;
  degenerate: boolean;
}

export interface VariableSensitivityDoc {
  id: string;
  value: number;
  reduced_cost: number;
  at_lower: boolean;
  at_upper: boolean;
}

export interface SensitivityDoc {
  degenerate: boolean;
  dual_source: string;
  constraints: ConstraintSensitivityDoc[];
  variables: VariableSensitivityDoc[];
}

export interface OptimizeResponse {
  status: string;
  kind: string;
  objective_value?: number;
  primal?: Record<string, number>;
  duals?: Record<string, number>;
  reduced_costs?: Record<string, number>;
  dual_source?: string;
  sensitivity?: SensitivityDoc | null;
  chosen_activity?: string;
  enumeration_value?: number;
  scenario?: ScenarioDoc;
  footprint?: FootprintResponse;
}

/** Structured non-optimal outcome (HTTP 422 body). */
export interface OptimizeStatus {
  status: string;
  kind?: string;
}

export interface ScatterRow {
  linear: number;
  probability: number;
  activity: string;
  receptor: string;
}

export interface DivergenceEntry {
  activity: string;
  receptor: string;
  linear: number;
  probability: number;
  fitted: number;
  residual: number;
}

export interface ValidationDetail {
  path: string;
  message: string;
}
