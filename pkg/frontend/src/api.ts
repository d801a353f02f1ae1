/** Typed client for the annotation service HTTP API.
 *
 *  The annotator id is fixed at construction (one annotator per browser
 *  session) and sent on every request as the X-Annotator-Id header, in
 *  addition to the path/payload fields the API itself requires. */

import type {
  AnnotationPayload,
  CandidatePreview,
  DocumentView,
  Guidelines,
  NextResponse,
  Progress,
  StoredRecord,
  SubmitResponse,
} from './types'

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message)
    this.name = 'ApiError'
  }
}

/** The slice of the client the app depends on; tests stub this interface. */
export interface AnnotationApi {
  readonly annotatorId: string
  guidelines(): Promise<Guidelines>
  nextTask(): Promise<NextResponse>
  document(docId: string): Promise<DocumentView>
  progress(): Promise<Progress>
  submit(payload: AnnotationPayload): Promise<SubmitResponse>
  previewCandidate(docId: string, surface: string): Promise<CandidatePreview>
  storedRecords(docId?: string): Promise<{ records: StoredRecord[] }>
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

export class ApiClient implements AnnotationApi {
  constructor(
    readonly annotatorId: string,
    private readonly baseUrl = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      ...init,
      headers: {
        'Content-Type': 'application/json',
        'X-Annotator-Id': this.annotatorId,
        ...(init?.headers ?? {}),
      },
    })
    if (!response.ok) {
      let code = 'http_error'
      let message = `${response.status} ${response.statusText}`
      try {
        const body = (await response.json()) as { detail?: { code?: string; message?: string } }
        if (body.detail?.code) {
          code = body.detail.code
          message = body.detail.message ?? message
        }
      } catch {
        // Non-JSON error body; keep the status line as the message.
      }
      throw new ApiError(response.status, code, message)
    }
    return response.json() as Promise<T>
  }

  guidelines(): Promise<Guidelines> {
    return this.request('/api/guidelines')
  }

  nextTask(): Promise<NextResponse> {
    return this.request(`/api/annotators/${encodeURIComponent(this.annotatorId)}/next`)
  }

  document(docId: string): Promise<DocumentView> {
    return this.request(`/api/documents/${encodeURIComponent(docId)}`)
  }

  progress(): Promise<Progress> {
    const params = new URLSearchParams({ annotator: this.annotatorId })
    return this.request(`/api/progress?${params}`)
  }

  submit(payload: AnnotationPayload): Promise<SubmitResponse> {
    return this.request('/api/annotations', {
      method: 'POST',
      body: JSON.stringify(payload),
    })
  }

  previewCandidate(docId: string, surface: string): Promise<CandidatePreview> {
    return this.request('/api/candidates/resolve', {
      method: 'POST',
      body: JSON.stringify({ doc_id: docId, surface }),
    })
  }

  storedRecords(docId?: string): Promise<{ records: StoredRecord[] }> {
    const params = new URLSearchParams({ annotator: this.annotatorId })
    if (docId) params.set('doc_id', docId)
    return this.request(`/api/annotations?${params}`)
  }
}
