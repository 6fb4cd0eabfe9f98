/** Client-side scenario draft: server payload plus dirty flags, version
 * counter, and conflict state for optimistic concurrency. */

import type {
  DemandGroupDoc,
  MatrixSummary,
  ScenarioDoc,
  StoredScenario,
} from "./types.js";

export interface DraftValidationIssue {
  path: string;
  message: string;
}

export interface ScenarioDraft {
  id: string | null; // null until first save
  name: string;
  version: number | null; // server version this draft is based on
  magnitudes: Record<string, number>;
  receptorLimits: Record<string, number>;
  costs: Record<string, number>;
  budget: number | null;
  demandGroups: DemandGroupDoc[];
  dirtyFields: string[];
  conflictVersion: number | null; // set when a save was rejected as stale
}

export function emptyDraft(name = "untitled"): ScenarioDraft {
  return {
    id: null,
    name,
    version: null,
    magnitudes: {},
    receptorLimits: {},
    costs: {},
    budget: null,
    demandGroups: [],
    dirtyFields: [],
    conflictVersion: null,
  };
}

export function draftFromStored(stored: StoredScenario): ScenarioDraft {
  return {
    id: stored.id,
    name: stored.scenario.name,
    version: stored.version,
    magnitudes: { ...stored.scenario.magnitudes },
    receptorLimits: { ...stored.scenario.receptor_limits },
    costs: { ...(stored.scenario.costs ?? {}) },
    budget: stored.scenario.budget ?? null,
    demandGroups: (stored.scenario.demand_groups ?? []).map((g) => ({
      activities: [...g.activities],
      lower_bound: g.lower_bound,
    })),
    dirtyFields: [],
    conflictVersion: null,
  };
}

function withDirty(draft: ScenarioDraft, field: string): string[] {
  return draft.dirtyFields.includes(field)
    ? draft.dirtyFields
    : [...draft.dirtyFields, field];
}

export function setMagnitude(
  draft: ScenarioDraft,
  activityId: string,
  value: number,
): ScenarioDraft {
  return {
    ...draft,
    magnitudes: { ...draft.magnitudes, [activityId]: value },
    dirtyFields: withDirty(draft, `magnitudes.${activityId}`),
  };
}

export function setReceptorLimit(
  draft: ScenarioDraft,
  receptorId: string,
  value: number,
): ScenarioDraft {
  return {
    ...draft,
    receptorLimits: { ...draft.receptorLimits, [receptorId]: value },
    dirtyFields: withDirty(draft, `receptor_limits.${receptorId}`),
  };
}

/** Local validation; a draft with issues must never be submitted. */
export function validateDraft(
  draft: ScenarioDraft,
  summary: MatrixSummary,
): DraftValidationIssue[] {
  const issues: DraftValidationIssue[] = [];
  const knownActivities = new Set((summary.activities ?? []).map((a) => a.id));
  const knownReceptors = new Set((summary.receptors ?? []).map((r) => r.id));

  for (const [id, value] of Object.entries(draft.magnitudes)) {
    if (!knownActivities.has(id)) {
      issues.push({ path: `magnitudes.${id}`, message: `unknown activity ${id}` });
    }
    if (!Number.isFinite(value) || value < 0) {
      issues.push({ path: `magnitudes.${id}`, message: "magnitude must be >= 0" });
    }
  }
  for (const [id, value] of Object.entries(draft.receptorLimits)) {
    if (!knownReceptors.has(id)) {
      issues.push({
        path: `receptor_limits.${id}`,
        message: `unknown receptor ${id}`,
      });
    }
    if (!Number.isFinite(value)) {
      issues.push({ path: `receptor_limits.${id}`, message: "limit must be a number" });
    }
  }
  if (draft.budget !== null && draft.budget < 0) {
    issues.push({ path: "budget", message: "budget must be >= 0" });
  }
  return issues;
}

export function draftToDoc(draft: ScenarioDraft): ScenarioDoc {
  const doc: ScenarioDoc = {
    name: draft.name,
    magnitudes: { ...draft.magnitudes },
    receptor_limits: { ...draft.receptorLimits },
  };
  if (Object.keys(draft.costs).length) doc.costs = { ...draft.costs };
  if (draft.budget !== null) doc.budget = draft.budget;
  if (draft.demandGroups.length) {
    doc.demand_groups = draft.demandGroups.map((g) => ({
      activities: [...g.activities],
      lower_bound: g.lower_bound,
    }));
  }
  return doc;
}

/** Payload for PUT: always carries the version the edit started from so a
 * concurrent save in another tab surfaces as a 409 conflict. */
export function buildSavePayload(draft: ScenarioDraft): {
  scenario: ScenarioDoc;
  expected_version: number | null;
} {
  return { scenario: draftToDoc(draft), expected_version: draft.version };
}

export function applySaveResponse(
  draft: ScenarioDraft,
  stored: StoredScenario,
): ScenarioDraft {
  return {
    ...draftFromStored(stored),
    // keep any fields the user touched while the request was in flight
    dirtyFields: [],
    conflictVersion: null,
  };
}

export function applyConflict(
  draft: ScenarioDraft,
  currentVersion: number | null,
): ScenarioDraft {
  return { ...draft, conflictVersion: currentVersion ?? -1 };
}

export function isDirty(draft: ScenarioDraft): boolean {
  return draft.dirtyFields.length > 0;
}

export function hasConflict(draft: ScenarioDraft): boolean {
  return draft.conflictVersion !== null;
}
