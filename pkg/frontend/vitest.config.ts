import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    // the e2e test boots a real audit service (python) and drives a full
    // 50-tuple session against it
    testTimeout: 180_000,
    hookTimeout: 180_000,
  },
});
