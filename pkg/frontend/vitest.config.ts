import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    environmentOptions: {
      happyDOM: {
        // same-origin with the live service in e2e runs, so bearer headers
        // survive; cross-origin reads stay possible for the unit fakes
        url: process.env.CARBONLEDGER_E2E_URL || "http://localhost:8547",
        settings: { fetch: { disableSameOriginPolicy: true } },
      },
    },
    include: ["tests/**/*.test.ts"],
    testTimeout: 30_000,
  },
});
