import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
    // the scripted-session test boots the annotation service in a
    // subprocess, which needs a generous startup allowance
    testTimeout: 60000,
    hookTimeout: 60000,
  },
});
