/**
 * Entry point. The only configuration is the service base address, taken
 * from the `?api=` query parameter, a `TUTORKIT_BASE_URL` global set in
 * index.html, or the default local service port.
 */

import { ApiClient } from "./api.js";
import { App } from "./app.js";

declare global {
  interface Window {
    TUTORKIT_BASE_URL?: string;
  }
}

function baseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  if (fromQuery) return fromQuery.replace(/\/$/, "");
  if (window.TUTORKIT_BASE_URL) return window.TUTORKIT_BASE_URL.replace(/\/$/, "");
  return "http://127.0.0.1:8000";
}

const mount = document.getElementById("app");
if (mount) {
  const app = new App(mount, new ApiClient(baseUrl()));
  void app.boot();
}
