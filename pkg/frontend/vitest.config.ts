import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // The round-trip suite boots the Python service and walks hundreds
    // of claim/edit/verify cycles over real HTTP.
    testTimeout: 180_000,
    hookTimeout: 60_000,
  },
});
