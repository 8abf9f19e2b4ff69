import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // the live-service test boots a real backend; give it room
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
