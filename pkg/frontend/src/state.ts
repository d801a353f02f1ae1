/** Selection state for one document task.
 *
 *  Three mutually exclusive submission shapes, mirroring the service
 *  contract: an explicit non-empty selection, the select-all marker, or the
 *  none marker. Manual checks always clear an armed marker; arming a marker
 *  always clears manual checks. An untouched state can never submit. */

import type { AnnotationPayload, CandidateEntry, CandidatePreview } from './types'

export type Marker = 'none' | 'select_all' | null

export interface PendingEntity {
  surface: string
  preview: CandidatePreview
}

export interface SelectionState {
  checked: ReadonlySet<string>
  marker: Marker
  added: readonly PendingEntity[]
  rationale: string
}

export function emptySelection(): SelectionState {
  return { checked: new Set(), marker: null, added: [], rationale: '' }
}

/** Checklist rows: server candidates plus locally added new entities.
 *  Additions that merged into an existing candidate do not add rows. */
export function checklistEntries(
  candidates: readonly CandidateEntry[],
  state: SelectionState,
): CandidateEntry[] {
  const entries = [...candidates]
  const known = new Set(candidates.map((c) => c.key))
  for (const pending of state.added) {
    const { canonical_key, outcome, display_name } = pending.preview
    if (outcome === 'new' && !known.has(canonical_key)) {
      known.add(canonical_key)
      entries.push({
        key: canonical_key,
        display_name,
        aliases: [pending.surface],
        provenance: 'annotator_added',
      })
    }
  }
  return entries
}

export function isChecked(state: SelectionState, key: string): boolean {
  return state.marker === 'select_all' || state.checked.has(key)
}

/** A manual toggle clears any armed marker. Under select-all the visible
 *  checks are materialized first, so unchecking one box keeps the rest. */
export function toggleCandidate(
  state: SelectionState,
  key: string,
  allKeys: readonly string[],
): SelectionState {
  const checked = new Set(state.marker === 'select_all' ? allKeys : state.checked)
  if (checked.has(key)) {
    checked.delete(key)
  } else {
    checked.add(key)
  }
  return { ...state, marker: null, checked }
}

export function armMarker(state: SelectionState, marker: 'none' | 'select_all'): SelectionState {
  return { ...state, marker, checked: new Set() }
}

export function addEntity(
  state: SelectionState,
  surface: string,
  preview: CandidatePreview,
): SelectionState {
  if (state.added.some((p) => p.preview.canonical_key === preview.canonical_key)) {
    return state
  }
  return { ...state, added: [...state.added, { surface, preview }] }
}

export function setRationale(state: SelectionState, rationale: string): SelectionState {
  return { ...state, rationale }
}

/** Every submission must be explicit; an untouched checklist is blocked. */
export function canSubmit(state: SelectionState): boolean {
  return state.marker !== null || state.checked.size > 0
}

export function submitPayload(
  state: SelectionState,
  annotatorId: string,
  docId: string,
): AnnotationPayload {
  return {
    annotator_id: annotatorId,
    doc_id: docId,
    selected: state.marker === null ? [...state.checked].sort() : [],
    none_marker: state.marker === 'none',
    select_all_marker: state.marker === 'select_all',
    added_entities: state.added.map((p) => p.surface),
    rationale: state.rationale,
  }
}
