import { defineConfig } from "vite";

export default defineConfig({
  // Assets are served under /ui by the review service; keep paths relative.
  base: "./",
  build: {
    outDir: "dist",
  },
  server: {
    proxy: {
      "/projects": "http://127.0.0.1:8080",
      "/health": "http://127.0.0.1:8080",
    },
  },
});
