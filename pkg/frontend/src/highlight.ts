/** Inline mention highlighting.
 *
 *  Spans come straight from the server as character offsets into the
 *  document text and are treated as authoritative: the client never
 *  re-tokenizes, and a span that does not fit the text is an error, not
 *  something to patch over. */

export interface TextSegment {
  text: string
  mention: boolean
}

export function segmentText(
  text: string,
  spans: readonly { start: number; end: number }[],
): TextSegment[] {
  const ordered = [...spans].sort((a, b) => a.start - b.start)
  const segments: TextSegment[] = []
  let cursor = 0
  for (const span of ordered) {
    if (span.end <= span.start || span.start < cursor || span.end > text.length) {
      throw new Error(`mention span ${span.start}..${span.end} does not fit the document text`)
    }
    if (span.start > cursor) {
      segments.push({ text: text.slice(cursor, span.start), mention: false })
    }
    segments.push({ text: text.slice(span.start, span.end), mention: true })
    cursor = span.end
  }
  if (cursor < text.length) {
    segments.push({ text: text.slice(cursor), mention: false })
  }
  return segments
}
