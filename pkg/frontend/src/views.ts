/** DOM rendering for the annotation screens. Views are pure functions of
 *  their props; the app re-renders a screen whenever its state changes. */

import { segmentText } from './highlight'
import { canSubmit, checklistEntries, isChecked } from './state'
import type { SelectionState } from './state'
import type { AnnotationTask, Guidelines, Progress } from './types'

type Child = Node | string

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag)
  for (const [name, value] of Object.entries(attrs)) {
    node.setAttribute(name, value)
  }
  node.append(...children)
  return node
}

function screen(root: HTMLElement, name: string, ...children: Child[]): void {
  root.replaceChildren(el('main', { 'data-screen': name, class: `screen screen-${name}` }, ...children))
}

// -- session start -----------------------------------------------------------------

export function renderAnnotatorGate(root: HTMLElement, onStart: (annotatorId: string) => void): void {
  const input = el('input', {
    'data-role': 'annotator-input',
    type: 'text',
    placeholder: 'e.g. A1',
    autocomplete: 'off',
  })
  const start = el('button', { 'data-role': 'start', type: 'button' }, 'Start session')
  start.addEventListener('click', () => {
    const id = input.value.trim()
    if (id) onStart(id)
  })
  screen(
    root,
    'gate',
    el('h1', {}, 'Protagonist Annotation'),
    el('p', {}, 'Enter your annotator id to begin. One annotator per browser session.'),
    el('div', { class: 'gate-row' }, input, start),
  )
}

// -- guidelines --------------------------------------------------------------------

export function renderGuidelines(root: HTMLElement, guidelines: Guidelines, onConfirm: () => void): void {
  const confirm = el(
    'button',
    { 'data-role': 'confirm', type: 'button' },
    'I have read the guidelines — start annotating',
  )
  confirm.addEventListener('click', onConfirm)

  const examples = guidelines.examples.map((ex) =>
    el(
      'section',
      { class: 'example' },
      el('span', { class: `badge badge-${ex.kind}` }, ex.kind.replace(/_/g, ' ')),
      el('blockquote', {}, ex.excerpt),
      el('p', {}, el('strong', {}, 'Candidates: '), ex.candidate_names.join(', ')),
      el('p', {}, el('strong', {}, 'Protagonists: '), ex.gold.length ? ex.gold.join(', ') : 'none'),
      el('p', { class: 'rationale' }, ex.rationale),
    ),
  )

  screen(
    root,
    'guidelines',
    el('h1', {}, 'Annotation guidelines'),
    el('div', { class: 'guidelines-text' }, guidelines.text),
    el('h2', {}, 'Worked examples'),
    ...examples,
    el('footer', {}, confirm),
  )
}

// -- document task -----------------------------------------------------------------

export interface TaskHandlers {
  onToggle(key: string): void
  onMarker(marker: 'none' | 'select_all'): void
  onAddEntity(surface: string): void
  onRationale(text: string): void
  onSubmit(): void
}

export interface TaskProps {
  task: AnnotationTask
  state: SelectionState
  inFlight: boolean
  error: string
  addNote: string
  handlers: TaskHandlers
}

function renderArticle(task: AnnotationTask): HTMLElement {
  const article = el('div', { class: 'article', 'data-role': 'article' })
  for (const segment of segmentText(task.text, task.mentions)) {
    article.append(
      segment.mention
        ? el('span', { class: 'mention', 'data-role': 'mention' }, segment.text)
        : document.createTextNode(segment.text),
    )
  }
  return article
}

function renderChecklist(props: TaskProps): HTMLElement {
  const { task, state, handlers } = props
  const list = el('ul', { class: 'checklist', 'data-role': 'checklist' })
  for (const entry of checklistEntries(task.candidates, state)) {
    const box = el('input', { type: 'checkbox', 'data-key': entry.key })
    box.checked = isChecked(state, entry.key)
    box.addEventListener('change', () => handlers.onToggle(entry.key))
    const label = el('label', {}, box, el('span', { class: 'display-name' }, entry.display_name))
    if (entry.provenance === 'annotator_added') {
      label.append(el('span', { class: 'badge badge-added' }, 'added'))
    }
    const aliases = entry.aliases.filter((a) => a !== entry.display_name)
    if (aliases.length) {
      label.append(el('span', { class: 'aliases' }, `also: ${aliases.join(', ')}`))
    }
    list.append(el('li', {}, label))
  }
  return list
}

export function renderTask(root: HTMLElement, props: TaskProps): void {
  const { task, state, inFlight, error, addNote, handlers } = props

  const selectAll = el(
    'button',
    {
      'data-role': 'select-all',
      type: 'button',
      'aria-pressed': String(state.marker === 'select_all'),
    },
    'Select All',
  )
  selectAll.addEventListener('click', () => handlers.onMarker('select_all'))

  const none = el(
    'button',
    {
      'data-role': 'none',
      type: 'button',
      'aria-pressed': String(state.marker === 'none'),
    },
    'None are protagonists',
  )
  none.addEventListener('click', () => handlers.onMarker('none'))

  const addInput = el('input', {
    'data-role': 'add-input',
    type: 'text',
    placeholder: 'Add a missed organization',
  })
  const addButton = el('button', { 'data-role': 'add-button', type: 'button' }, 'Add entity')
  addButton.addEventListener('click', () => {
    const surface = addInput.value.trim()
    if (surface) handlers.onAddEntity(surface)
  })

  const rationale = el('textarea', {
    'data-role': 'rationale',
    placeholder: 'Optional rationale',
  })
  rationale.value = state.rationale
  rationale.addEventListener('input', () => handlers.onRationale(rationale.value))

  const submittable = canSubmit(state)
  const submit = el('button', { 'data-role': 'submit', type: 'button' }, 'Submit & Continue')
  submit.disabled = !submittable || inFlight
  submit.addEventListener('click', handlers.onSubmit)

  const hint = el(
    'p',
    { 'data-role': 'submit-hint', class: 'hint' },
    'To submit, check at least one organization, use Select All, or confirm None are protagonists.',
  )
  hint.hidden = submittable

  const progressLine = el(
    'p',
    { 'data-role': 'progress', class: 'progress' },
    `Progress: ${task.progress.submitted} / ${task.progress.total}`,
  )

  const children: Child[] = [
    el('header', {}, el('h1', { 'data-role': 'doc-id' }, task.doc_id), progressLine),
    renderArticle(task),
    el('h2', {}, 'Candidate organizations'),
    renderChecklist(props),
    el('div', { class: 'markers' }, selectAll, none),
    el('div', { class: 'add-entity' }, addInput, addButton),
  ]
  if (addNote) {
    children.push(el('p', { 'data-role': 'add-note', class: 'note' }, addNote))
  }
  children.push(rationale)
  if (error) {
    children.push(el('p', { 'data-role': 'error', class: 'error' }, error))
  }
  children.push(el('footer', {}, submit, hint))
  screen(root, 'task', ...children)
}

// -- terminal and error screens -------------------------------------------------------

export function renderDone(root: HTMLElement, progress: Progress): void {
  screen(
    root,
    'done',
    el('h1', {}, 'All documents annotated'),
    el(
      'p',
      { 'data-role': 'progress' },
      `Progress: ${progress.submitted} / ${progress.total}`,
    ),
  )
}

export function renderLoadError(root: HTMLElement, message: string, onRetry: () => void): void {
  const retry = el('button', { 'data-role': 'retry', type: 'button' }, 'Retry')
  retry.addEventListener('click', onRetry)
  screen(
    root,
    'error',
    el('h1', {}, 'Service unavailable'),
    el('p', { 'data-role': 'error' }, message),
    retry,
  )
}

export function renderLoading(root: HTMLElement): void {
  screen(root, 'loading', el('p', {}, 'Loading…'))
}
