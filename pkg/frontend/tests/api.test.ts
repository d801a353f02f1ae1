import { describe, expect, it } from 'vitest'

import { ApiClient, ApiError } from '../src/api'

interface Captured {
  url: string
  init?: RequestInit
}

function clientWith(
  responder: (url: string) => Response,
): { client: ApiClient; calls: Captured[] } {
  const calls: Captured[] = []
  const client = new ApiClient('A1', 'http://svc', (url, init) => {
    calls.push({ url, init })
    return Promise.resolve(responder(url))
  })
  return { client, calls }
}

const ok = (body: unknown) =>
  new Response(JSON.stringify(body), { status: 200, headers: { 'Content-Type': 'application/json' } })

describe('ApiClient', () => {
  it('sends the annotator id header on every request', async () => {
    const { client, calls } = clientWith(() => ok({ records: [] }))
    await client.guidelines().catch(() => undefined)
    await client.nextTask().catch(() => undefined)
    await client.progress().catch(() => undefined)
    await client.storedRecords()
    await client.submit({
      annotator_id: 'A1',
      doc_id: 'd1',
      selected: [],
      none_marker: true,
      select_all_marker: false,
      added_entities: [],
      rationale: '',
    })
    await client.previewCandidate('d1', 'Acme').catch(() => undefined)
    expect(calls).toHaveLength(6)
    for (const call of calls) {
      expect((call.init?.headers as Record<string, string>)['X-Annotator-Id']).toBe('A1')
      expect((call.init?.headers as Record<string, string>)['Content-Type']).toBe('application/json')
    }
  })

  it('builds paths from the base url and encodes the annotator id', async () => {
    const calls: Captured[] = []
    const client = new ApiClient('team a/1', 'http://svc', (url, init) => {
      calls.push({ url, init })
      return Promise.resolve(ok({}))
    })
    await client.nextTask()
    expect(calls[0].url).toBe('http://svc/api/annotators/team%20a%2F1/next')
  })

  it('filters stored records by annotator and optionally by document', async () => {
    const { client, calls } = clientWith(() => ok({ records: [] }))
    await client.storedRecords()
    await client.storedRecords('news-0000')
    expect(calls[0].url).toBe('http://svc/api/annotations?annotator=A1')
    expect(calls[1].url).toBe('http://svc/api/annotations?annotator=A1&doc_id=news-0000')
  })

  it('POSTs the submission payload verbatim', async () => {
    const { client, calls } = clientWith(() => ok({ record_id: 1 }))
    const payload = {
      annotator_id: 'A1',
      doc_id: 'd1',
      selected: ['techcorp'],
      none_marker: false,
      select_all_marker: false,
      added_entities: ['InfoDynamics GmbH'],
      rationale: 'lead org',
    }
    await client.submit(payload)
    expect(calls[0].init?.method).toBe('POST')
    expect(JSON.parse(String(calls[0].init?.body))).toEqual(payload)
  })

  it('surfaces machine-readable error codes as ApiError', async () => {
    const { client } = clientWith(
      () =>
        new Response(
          JSON.stringify({ detail: { code: 'unknown_key', message: 'selection references unknown keys: nope' } }),
          { status: 422 },
        ),
    )
    const failure = await client
      .submit({
        annotator_id: 'A1',
        doc_id: 'd1',
        selected: ['nope'],
        none_marker: false,
        select_all_marker: false,
        added_entities: [],
        rationale: '',
      })
      .catch((err: unknown) => err)
    expect(failure).toBeInstanceOf(ApiError)
    expect((failure as ApiError).status).toBe(422)
    expect((failure as ApiError).code).toBe('unknown_key')
    expect((failure as ApiError).message).toContain('unknown keys')
  })

  it('keeps the status line for non-JSON error bodies', async () => {
    const { client } = clientWith(
      () => new Response('gateway exploded', { status: 502, statusText: 'Bad Gateway' }),
    )
    const failure = await client.guidelines().catch((err: unknown) => err)
    expect(failure).toBeInstanceOf(ApiError)
    expect((failure as ApiError).code).toBe('http_error')
    expect((failure as ApiError).message).toContain('502')
  })

  it('lets network failures propagate untouched', async () => {
    const boom = new TypeError('fetch failed')
    const client = new ApiClient('A1', 'http://svc', () => Promise.reject(boom))
    await expect(client.guidelines()).rejects.toBe(boom)
  })
})
