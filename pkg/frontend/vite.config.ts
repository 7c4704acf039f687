import { defineConfig } from 'vitest/config';

export default defineConfig({
  server: {
    port: 5173,
    // Same-origin development against a locally running service:
    //   imzregistry serve --config config/service.sample.json
    // then sign in with Service URL http://127.0.0.1:5173/api
    proxy: {
      '/api': {
        target: 'http://127.0.0.1:8000',
        changeOrigin: true,
        rewrite: (path) => path.replace(/^\/api/, ''),
      },
    },
  },
  test: {
    environment: 'happy-dom',
    include: ['tests/**/*.test.ts'],
    testTimeout: 30_000,
    hookTimeout: 60_000,
  },
});
