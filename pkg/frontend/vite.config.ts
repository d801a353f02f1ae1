/// <reference types="vitest/config" />
import { defineConfig } from 'vite'

export default defineConfig({
  server: {
    // During development the annotation service runs separately:
    //   protag serve --corpus cand.jsonl --store store.jsonl
    proxy: { '/api': 'http://127.0.0.1:8765' },
  },
  test: {
    environment: 'node',
    // The scripted session test spawns the real service process.
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
})
