/** Mirrors of the annotation service's JSON payloads. Field names match the
 *  server exactly (snake_case); nothing here is re-derived client-side. */

export interface MentionSpan {
  surface: string
  start: number
  end: number
  ner_type: string
  provenance: string
}

export interface CandidateEntry {
  key: string
  display_name: string
  aliases: string[]
  provenance: string
}

export interface Progress {
  annotator: string
  submitted: number
  total: number
}

export interface AnnotationTask {
  done: false
  doc_id: string
  headline: string
  text: string
  mentions: MentionSpan[]
  candidates: CandidateEntry[]
  progress: Progress
}

export interface SessionDone {
  done: true
  progress: Progress
}

export type NextResponse = AnnotationTask | SessionDone

export interface DocumentView {
  doc_id: string
  headline: string
  text: string
  corpus_tag: string
  mentions: MentionSpan[]
  candidates: CandidateEntry[]
}

export interface GuidelineExample {
  excerpt: string
  candidate_names: string[]
  gold: string[]
  rationale: string
  kind: string
}

export interface Guidelines {
  text: string
  examples: GuidelineExample[]
}

export interface AnnotationPayload {
  annotator_id: string
  doc_id: string
  selected: string[]
  none_marker: boolean
  select_all_marker: boolean
  added_entities: string[]
  rationale: string
}

export interface AddedOutcome {
  surface: string
  canonical_key: string
  outcome: 'merged' | 'new'
}

export interface SubmitResponse {
  record_id: number
  doc_id: string
  annotator_id: string
  selected: string[]
  added: AddedOutcome[]
  progress: Progress
}

export interface StoredRecord {
  doc_id: string
  annotator_id: string
  selected: string[]
  added_entities: string[]
  rationale: string
  status: string
  created_at: string
}

export interface CandidatePreview {
  canonical_key: string
  outcome: 'merged' | 'new'
  display_name: string
}
