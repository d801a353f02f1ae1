/** Screen orchestration: session gate, guidelines gate, task loop.
 *
 *  - The annotation screens are unreachable until the guidelines confirmation
 *    is clicked; deep links are redirected back to the guidelines.
 *  - Submission is single-flight (the button is disabled while a POST is in
 *    flight) and a failed submission keeps the selection state untouched so
 *    a retry loses nothing.
 */

import { ApiError } from './api'
import type { AnnotationApi } from './api'
import {
  addEntity,
  armMarker,
  canSubmit,
  checklistEntries,
  emptySelection,
  setRationale,
  submitPayload,
  toggleCandidate,
} from './state'
import type { SelectionState } from './state'
import type { AnnotationTask, Guidelines, Progress } from './types'
import {
  renderAnnotatorGate,
  renderDone,
  renderGuidelines,
  renderLoadError,
  renderLoading,
  renderTask,
} from './views'

const STORAGE_KEY = 'protag.annotator'

const ROUTE_GUIDELINES = '#/guidelines'
const ROUTE_TASK = '#/task'
const ROUTE_DOC_PREFIX = '#/doc/'

export class App {
  private api: AnnotationApi | null = null
  private confirmed = false
  private guidelines: Guidelines | null = null
  private task: AnnotationTask | null = null
  private donePr: Progress | null = null
  private state: SelectionState = emptySelection()
  private inFlight = false
  private error = ''
  private addNote = ''
  private loadFailure = ''

  constructor(
    private readonly root: HTMLElement,
    private readonly makeClient: (annotatorId: string) => AnnotationApi,
  ) {}

  private readonly onHashChange = (): void => {
    void this.handleRoute()
  }

  start(): void {
    window.addEventListener('hashchange', this.onHashChange)
    const storedId = window.sessionStorage.getItem(STORAGE_KEY)
    if (storedId) {
      this.api = this.makeClient(storedId)
      void this.loadGuidelines()
    } else {
      this.render()
    }
  }

  stop(): void {
    window.removeEventListener('hashchange', this.onHashChange)
  }

  // -- session and routing -------------------------------------------------------

  private beginSession(annotatorId: string): void {
    window.sessionStorage.setItem(STORAGE_KEY, annotatorId)
    this.api = this.makeClient(annotatorId)
    void this.loadGuidelines()
  }

  private async handleRoute(): Promise<void> {
    if (!this.api) {
      this.render()
      return
    }
    // Guidelines gate: every route is redirected until confirmation.
    if (!this.confirmed) {
      if (window.location.hash !== ROUTE_GUIDELINES) {
        window.location.hash = ROUTE_GUIDELINES
        return
      }
      this.render()
      return
    }
    const hash = window.location.hash
    if (hash.startsWith(ROUTE_DOC_PREFIX)) {
      await this.loadDocument(decodeURIComponent(hash.slice(ROUTE_DOC_PREFIX.length)))
    } else {
      this.render()
    }
  }

  private async loadGuidelines(): Promise<void> {
    if (!this.api) return
    this.loadFailure = ''
    renderLoading(this.root)
    try {
      this.guidelines = await this.api.guidelines()
    } catch (err) {
      this.loadFailure = describeFailure(err)
    }
    if (window.location.hash !== ROUTE_GUIDELINES) {
      window.location.hash = ROUTE_GUIDELINES
    }
    this.render()
  }

  private confirmGuidelines(): void {
    this.confirmed = true
    window.location.hash = ROUTE_TASK
    void this.loadNext()
  }

  private async loadNext(): Promise<void> {
    if (!this.api) return
    try {
      const next = await this.api.nextTask()
      if (next.done) {
        this.task = null
        this.donePr = next.progress
      } else {
        this.task = next
        this.donePr = null
      }
      this.loadFailure = ''
    } catch (err) {
      this.loadFailure = describeFailure(err)
    }
    this.render()
  }

  private async loadDocument(docId: string): Promise<void> {
    if (!this.api) return
    renderLoading(this.root)
    try {
      const [doc, progress] = await Promise.all([this.api.document(docId), this.api.progress()])
      this.task = { done: false, ...doc, progress }
      this.donePr = null
      this.state = emptySelection()
      this.error = ''
      this.addNote = ''
      this.loadFailure = ''
    } catch (err) {
      this.loadFailure = describeFailure(err)
    }
    this.render()
  }

  // -- task interactions ------------------------------------------------------------

  private onToggle(key: string): void {
    if (!this.task) return
    const allKeys = checklistEntries(this.task.candidates, this.state).map((c) => c.key)
    this.state = toggleCandidate(this.state, key, allKeys)
    this.error = ''
    this.render()
  }

  private onMarker(marker: 'none' | 'select_all'): void {
    this.state = armMarker(this.state, marker)
    this.error = ''
    this.render()
  }

  private async onAddEntity(surface: string): Promise<void> {
    if (!this.api || !this.task) return
    try {
      const preview = await this.api.previewCandidate(this.task.doc_id, surface)
      this.state = addEntity(this.state, surface, preview)
      this.addNote =
        preview.outcome === 'merged'
          ? `"${surface}" merged into the existing candidate ${preview.display_name}`
          : `"${surface}" added as a new candidate`
    } catch (err) {
      this.addNote = describeFailure(err)
    }
    this.render()
  }

  private onRationale(text: string): void {
    // No re-render: the textarea keeps focus while the state tracks it.
    this.state = setRationale(this.state, text)
  }

  private async onSubmit(): Promise<void> {
    if (!this.api || !this.task || this.inFlight) return
    if (!canSubmit(this.state)) {
      this.error =
        'Nothing to submit yet: check at least one organization, or use Select All / None are protagonists.'
      this.render()
      return
    }
    this.inFlight = true
    this.render()
    try {
      await this.api.submit(submitPayload(this.state, this.api.annotatorId, this.task.doc_id))
      this.state = emptySelection()
      this.error = ''
      this.addNote = ''
      this.inFlight = false
      if (window.location.hash !== ROUTE_TASK) {
        window.location.hash = ROUTE_TASK
      }
      await this.loadNext()
      return
    } catch (err) {
      // Selection state is retained on any failure; nothing advances.
      this.inFlight = false
      this.error =
        err instanceof ApiError
          ? `${err.code}: ${err.message}`
          : 'Network failure — your selection was kept locally. Press Submit & Continue to retry.'
      this.render()
    }
  }

  // -- rendering ----------------------------------------------------------------------

  private render(): void {
    if (!this.api) {
      renderAnnotatorGate(this.root, (id) => this.beginSession(id))
      return
    }
    if (!this.confirmed) {
      if (this.loadFailure || !this.guidelines) {
        renderLoadError(this.root, this.loadFailure || 'Guidelines not loaded.', () => {
          void this.loadGuidelines()
        })
        return
      }
      renderGuidelines(this.root, this.guidelines, () => this.confirmGuidelines())
      return
    }
    if (this.loadFailure) {
      renderLoadError(this.root, this.loadFailure, () => {
        void this.loadNext()
      })
      return
    }
    if (this.donePr) {
      renderDone(this.root, this.donePr)
      return
    }
    if (!this.task) {
      renderLoading(this.root)
      return
    }
    renderTask(this.root, {
      task: this.task,
      state: this.state,
      inFlight: this.inFlight,
      error: this.error,
      addNote: this.addNote,
      handlers: {
        onToggle: (key) => this.onToggle(key),
        onMarker: (marker) => this.onMarker(marker),
        onAddEntity: (surface) => {
          void this.onAddEntity(surface)
        },
        onRationale: (text) => this.onRationale(text),
        onSubmit: () => {
          void this.onSubmit()
        },
      },
    })
  }
}

function describeFailure(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`
  if (err instanceof Error) return err.message
  return String(err)
}
