// Browser entry point. Configure the server with ?api=http://host:port
// (defaults to the same origin, falling back to the dev server port).

import { App } from "./app.js";

function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  if (fromQuery) return fromQuery.replace(/\/$/, "");
  if (window.location.port && window.location.port !== "8000") {
    return "http://127.0.0.1:8000";
  }
  return window.location.origin;
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const app = new App(root, { baseUrl: apiBase(), panAnimationMs: 250 });
  await app.store.loadMaps();
  const maps = app.store.getState().maps;
  if (maps.length > 0) {
    await app.store.selectMap(maps[0]!.mapId);
  } else {
    await app.store.createMapAndSelect("my map");
  }
}

void boot();
