import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the server flow test boots a real backend process
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
