import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
    // each integration suite boots a real control service subprocess
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
