// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from 'vitest'

import { ApiError } from '../src/api'
import type { AnnotationApi } from '../src/api'
import { App } from '../src/app'
import { $, checkbox, maybe, until } from './dom'
import type {
  AnnotationPayload,
  AnnotationTask,
  CandidatePreview,
  Guidelines,
  NextResponse,
  SubmitResponse,
} from '../src/types'

const GUIDELINES: Guidelines = {
  text: 'Select the organizations the story is about.',
  examples: [
    {
      excerpt: 'Acme expands.',
      candidate_names: ['Acme'],
      gold: ['Acme'],
      rationale: 'Acme drives the story.',
      kind: 'single_protagonist',
    },
  ],
}

const TASK: AnnotationTask = {
  done: false,
  doc_id: 'news-0000',
  headline: 'TechCorp Expands',
  text: 'TechCorp Expands\nTechCorp opened offices.',
  mentions: [
    { surface: 'TechCorp', start: 0, end: 8, ner_type: 'ORG', provenance: 'ner' },
    { surface: 'TechCorp', start: 17, end: 25, ner_type: 'ORG', provenance: 'ner' },
  ],
  candidates: [
    { key: 'techcorp', display_name: 'TechCorp', aliases: ['TechCorp'], provenance: 'ner' },
    { key: 'globalsoft', display_name: 'GlobalSoft', aliases: ['GlobalSoft'], provenance: 'ner' },
  ],
  progress: { annotator: 'A1', submitted: 0, total: 2 },
}

class StubApi implements AnnotationApi {
  annotatorId = 'A1'
  guidelinesImpl: () => Promise<Guidelines> = () => Promise.resolve(GUIDELINES)
  nextImpl: () => Promise<NextResponse> = () => Promise.resolve(TASK)
  submitImpl: (payload: AnnotationPayload) => Promise<SubmitResponse> = () =>
    Promise.reject(new Error('submit not stubbed'))
  previewImpl: (surface: string) => Promise<CandidatePreview> = () =>
    Promise.reject(new Error('preview not stubbed'))
  submissions: AnnotationPayload[] = []

  guidelines() {
    return this.guidelinesImpl()
  }
  nextTask() {
    return this.nextImpl()
  }
  document(): never {
    throw new Error('document not stubbed')
  }
  progress(): never {
    throw new Error('progress not stubbed')
  }
  submit(payload: AnnotationPayload) {
    this.submissions.push(payload)
    return this.submitImpl(payload)
  }
  previewCandidate(_docId: string, surface: string) {
    return this.previewImpl(surface)
  }
  storedRecords(): never {
    throw new Error('storedRecords not stubbed')
  }
}

const liveApps: App[] = []

function startApp(api: StubApi): App {
  const app = new App($('#app'), () => api)
  liveApps.push(app)
  app.start()
  return app
}

async function enterSession(api: StubApi): Promise<void> {
  startApp(api)
  const input = $('[data-role=annotator-input]') as HTMLInputElement
  input.value = 'A1'
  $('[data-role=start]').click()
  await until(() => maybe('[data-screen=guidelines]') !== null, 'guidelines screen')
}

async function toTaskScreen(api: StubApi): Promise<void> {
  await enterSession(api)
  $('[data-role=confirm]').click()
  await until(() => maybe('[data-screen=task]') !== null, 'task screen')
}

beforeEach(() => {
  // Detach the previous test's app so its hashchange routing cannot
  // interfere; each test builds a fresh DOM root and session.
  for (const app of liveApps.splice(0)) {
    app.stop()
  }
  document.body.innerHTML = '<div id="app"></div>'
  window.sessionStorage.clear()
  window.location.hash = ''
})

describe('guidelines gating', () => {
  it('a fresh session shows the gate, then guidelines before any task', async () => {
    const api = new StubApi()
    startApp(api)
    expect(maybe('[data-screen=gate]')).not.toBeNull()
    expect(maybe('[data-screen=task]')).toBeNull()

    const input = $('[data-role=annotator-input]') as HTMLInputElement
    input.value = 'A1'
    $('[data-role=start]').click()
    await until(() => maybe('[data-screen=guidelines]') !== null, 'guidelines screen')
    expect(maybe('[data-screen=task]')).toBeNull()
  })

  it('guidelines API failure shows a retry prompt with no silent bypass', async () => {
    const api = new StubApi()
    api.guidelinesImpl = () => Promise.reject(new TypeError('fetch failed'))
    startApp(api)
    const input = $('[data-role=annotator-input]') as HTMLInputElement
    input.value = 'A1'
    $('[data-role=start]').click()
    await until(() => maybe('[data-screen=error]') !== null, 'error screen')
    expect(maybe('[data-role=confirm]')).toBeNull()

    api.guidelinesImpl = () => Promise.resolve(GUIDELINES)
    $('[data-role=retry]').click()
    await until(() => maybe('[data-screen=guidelines]') !== null, 'guidelines after retry')
  })

  it('deep links are redirected to the guidelines until confirmed', async () => {
    window.location.hash = '#/doc/news-0000'
    const api = new StubApi()
    await enterSession(api)
    await until(() => window.location.hash === '#/guidelines', 'redirect to guidelines')
    expect(maybe('[data-screen=task]')).toBeNull()
  })
})

describe('submission flow', () => {
  it('blocks untouched submissions client-side', async () => {
    const api = new StubApi()
    await toTaskScreen(api)
    const submit = $('[data-role=submit]') as HTMLButtonElement
    expect(submit.disabled).toBe(true)
    expect($('[data-role=submit-hint]').hidden).toBe(false)
    submit.click()
    await new Promise((resolve) => setTimeout(resolve, 30))
    expect(api.submissions).toHaveLength(0)
    expect(maybe('[data-screen=task]')).not.toBeNull()
  })

  it('shows the field-level error on 422 and advances nothing', async () => {
    const api = new StubApi()
    api.submitImpl = () =>
      Promise.reject(new ApiError(422, 'unknown_key', 'selection references unknown keys: x'))
    await toTaskScreen(api)
    checkbox('techcorp').click()
    await until(() => !($('[data-role=submit]') as HTMLButtonElement).disabled, 'submit enabled')
    $('[data-role=submit]').click()
    await until(() => maybe('[data-role=error]') !== null, 'error banner')
    expect($('[data-role=error]').textContent).toContain('unknown_key')
    expect($('[data-role=doc-id]').textContent).toBe('news-0000')
    expect(checkbox('techcorp').checked).toBe(true)
  })

  it('keeps the selection on network failure and retries cleanly', async () => {
    const api = new StubApi()
    api.submitImpl = () => Promise.reject(new TypeError('fetch failed'))
    await toTaskScreen(api)
    checkbox('techcorp').click()
    await until(() => !($('[data-role=submit]') as HTMLButtonElement).disabled, 'submit enabled')
    $('[data-role=submit]').click()
    await until(() => maybe('[data-role=error]') !== null, 'error banner')
    expect($('[data-role=error]').textContent).toContain('kept locally')
    expect(checkbox('techcorp').checked).toBe(true)

    api.submitImpl = () =>
      Promise.resolve({
        record_id: 1,
        doc_id: 'news-0000',
        annotator_id: 'A1',
        selected: ['techcorp'],
        added: [],
        progress: { annotator: 'A1', submitted: 2, total: 2 },
      })
    api.nextImpl = () =>
      Promise.resolve({ done: true, progress: { annotator: 'A1', submitted: 2, total: 2 } })
    $('[data-role=submit]').click()
    await until(() => maybe('[data-screen=done]') !== null, 'completion screen')
    expect(api.submissions).toHaveLength(2)
    expect(api.submissions[1].selected).toEqual(['techcorp'])
    expect($('[data-role=progress]').textContent).toBe('Progress: 2 / 2')
  })

  it('submission is single-flight: the button is disabled while a POST is pending', async () => {
    const api = new StubApi()
    let release: (value: SubmitResponse) => void = () => undefined
    api.submitImpl = () =>
      new Promise<SubmitResponse>((resolve) => {
        release = resolve
      })
    await toTaskScreen(api)
    api.nextImpl = () =>
      Promise.resolve({ done: true, progress: { annotator: 'A1', submitted: 2, total: 2 } })
    checkbox('techcorp').click()
    await until(() => !($('[data-role=submit]') as HTMLButtonElement).disabled, 'submit enabled')
    $('[data-role=submit]').click()
    await until(
      () => ($('[data-role=submit]') as HTMLButtonElement).disabled,
      'submit disabled in flight',
    )
    $('[data-role=submit]').click()
    $('[data-role=submit]').click()
    expect(api.submissions).toHaveLength(1)

    release({
      record_id: 1,
      doc_id: 'news-0000',
      annotator_id: 'A1',
      selected: ['techcorp'],
      added: [],
      progress: { annotator: 'A1', submitted: 2, total: 2 },
    })
    await until(() => maybe('[data-screen=done]') !== null, 'completion screen')
    expect(api.submissions).toHaveLength(1)
  })
})

describe('add-entity feedback', () => {
  it('shows the merged-vs-new outcome and grows the checklist for new keys', async () => {
    const api = new StubApi()
    api.previewImpl = (surface) =>
      Promise.resolve(
        surface === 'TechCorp Inc'
          ? { canonical_key: 'techcorp', outcome: 'merged' as const, display_name: 'TechCorp' }
          : { canonical_key: 'acme robotics', outcome: 'new' as const, display_name: surface },
      )
    await toTaskScreen(api)

    const input = $('[data-role=add-input]') as HTMLInputElement
    input.value = 'TechCorp Inc'
    $('[data-role=add-button]').click()
    await until(() => maybe('[data-role=add-note]') !== null, 'merge note')
    expect($('[data-role=add-note]').textContent).toContain('merged into')
    expect(document.querySelectorAll('[data-role=checklist] input')).toHaveLength(2)

    const input2 = $('[data-role=add-input]') as HTMLInputElement
    input2.value = 'Acme Robotics'
    $('[data-role=add-button]').click()
    await until(
      () => document.querySelectorAll('[data-role=checklist] input').length === 3,
      'new checklist row',
    )
    expect($('[data-role=add-note]').textContent).toContain('new candidate')
  })
})
