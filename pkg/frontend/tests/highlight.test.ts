import { describe, expect, it } from 'vitest'

import { segmentText } from '../src/highlight'

const TEXT = 'TechCorp Expands\nTechCorp opened offices near the European Commission.'

describe('segmentText', () => {
  it('splits text into alternating plain and mention segments', () => {
    const spans = [
      { start: 0, end: 8 },
      { start: 17, end: 25 },
      { start: 50, end: 69 },
    ]
    const segments = segmentText(TEXT, spans)
    expect(segments.map((s) => s.mention)).toEqual([true, false, true, false, true, false])
    expect(segments[0].text).toBe('TechCorp')
    expect(segments[2].text).toBe('TechCorp')
    expect(segments[4].text).toBe('European Commission')
  })

  it('reassembles the exact original text', () => {
    const spans = [
      { start: 17, end: 25 },
      { start: 0, end: 8 },
    ]
    const segments = segmentText(TEXT, spans)
    expect(segments.map((s) => s.text).join('')).toBe(TEXT)
  })

  it('sorts spans; input order does not matter', () => {
    const sorted = segmentText(TEXT, [
      { start: 0, end: 8 },
      { start: 17, end: 25 },
    ])
    const shuffled = segmentText(TEXT, [
      { start: 17, end: 25 },
      { start: 0, end: 8 },
    ])
    expect(shuffled).toEqual(sorted)
  })

  it('handles spans at the very start and very end', () => {
    const text = 'Acme beats Globex'
    const segments = segmentText(text, [
      { start: 0, end: 4 },
      { start: 11, end: 17 },
    ])
    expect(segments).toEqual([
      { text: 'Acme', mention: true },
      { text: ' beats ', mention: false },
      { text: 'Globex', mention: true },
    ])
  })

  it('handles adjacent spans without inventing separators', () => {
    const text = 'AcmeGlobex after'
    const segments = segmentText(text, [
      { start: 0, end: 4 },
      { start: 4, end: 10 },
    ])
    expect(segments.map((s) => s.text)).toEqual(['Acme', 'Globex', ' after'])
    expect(segments.map((s) => s.mention)).toEqual([true, true, false])
  })

  it('returns a single plain segment when there are no mentions', () => {
    expect(segmentText('no orgs here', [])).toEqual([{ text: 'no orgs here', mention: false }])
    expect(segmentText('', [])).toEqual([])
  })

  it('rejects spans that do not fit the text', () => {
    expect(() => segmentText('short', [{ start: 2, end: 99 }])).toThrow(/does not fit/)
    expect(() => segmentText('short', [{ start: 3, end: 3 }])).toThrow(/does not fit/)
    expect(() =>
      segmentText('overlap', [
        { start: 0, end: 4 },
        { start: 2, end: 6 },
      ]),
    ).toThrow(/does not fit/)
  })

  it('keeps the mention count equal to the span count across many layouts', () => {
    const text = 'x'.repeat(200)
    for (let n = 1; n <= 20; n++) {
      const spans = Array.from({ length: n }, (_, i) => ({ start: i * 10, end: i * 10 + 3 }))
      const segments = segmentText(text, spans)
      expect(segments.filter((s) => s.mention)).toHaveLength(n)
      expect(segments.map((s) => s.text).join('')).toBe(text)
    }
  })
})
