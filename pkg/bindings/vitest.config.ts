import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    testTimeout: 180_000,
    hookTimeout: 60_000,
    // Env tests spawn real server processes; keep them serial.
    pool: "forks",
    poolOptions: { forks: { singleFork: true } },
  },
});
