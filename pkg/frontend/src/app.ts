// DOM shell: canvas map, type-on-map input, outline sidebar, toolbar.
// All state lives in the AppStore; this class renders it and forwards events.

import { ApiClient, type FetchLike } from "./api.js";
import { Camera, MAX_ZOOM } from "./camera.js";
import { buildOutline } from "./outline.js";
import { CanvasRenderer, type Renderer } from "./renderer.js";
import { buildScene, type Scene } from "./scene.js";
import { AppStore } from "./store.js";
import type { KindFilter, OutlineNode, Point2 } from "./types.js";

export interface AppOptions {
  baseUrl: string;
  fetchImpl?: FetchLike;
  renderer?: Renderer;
  width?: number;
  height?: number;
  /** ms for the outline-click pan animation; 0 jumps (default in tests) */
  panAnimationMs?: number;
  openUrl?: (url: string) => void;
}

const ENTITY_HIT_RADIUS = 12;
const RESULT_HIT_RADIUS = 8;

export class App {
  readonly store: AppStore;
  readonly client: ApiClient;
  readonly canvas: HTMLCanvasElement;
  private readonly renderer: Renderer;
  private readonly width: number;
  private readonly height: number;
  private readonly outlineList: HTMLUListElement;
  private readonly errorBox: HTMLElement;
  private readonly typeBox: HTMLInputElement;
  private readonly openUrl: (url: string) => void;
  private scene: Scene = { entities: [], edges: [], results: [], clusters: [] };
  private dragging: { last: Point2 } | null = null;
  private draggedOutlineId: string | null = null;

  constructor(root: HTMLElement, options: AppOptions) {
    this.width = options.width ?? 960;
    this.height = options.height ?? 640;
    this.openUrl = options.openUrl ?? ((url) => window.open(url, "_blank"));
    this.client = new ApiClient(options.baseUrl, options.fetchImpl ?? fetch.bind(globalThis));
    this.store = new AppStore({
      client: this.client,
      animateCenter: this.makeAnimator(options.panAnimationMs ?? 0),
    });

    root.innerHTML = `
      <div class="cm-shell">
        <aside class="cm-sidebar">
          <div class="cm-toolbar">
            <select data-role="kind-filter" title="result kinds">
              <option value="">documents + entities</option>
              <option value="document">documents only</option>
              <option value="entity">entities only</option>
            </select>
            <button data-role="group-search" title="find more like the selection">group search</button>
          </div>
          <div class="cm-error" data-role="error" hidden></div>
          <ul class="cm-outline" data-role="outline"></ul>
        </aside>
        <main class="cm-map">
          <canvas data-role="map" width="${this.width}" height="${this.height}"></canvas>
          <input data-role="type-box" class="cm-typebox" hidden
                 placeholder="type to search here" />
        </main>
      </div>`;

    this.canvas = root.querySelector<HTMLCanvasElement>("[data-role=map]")!;
    this.outlineList = root.querySelector<HTMLUListElement>("[data-role=outline]")!;
    this.errorBox = root.querySelector<HTMLElement>("[data-role=error]")!;
    this.typeBox = root.querySelector<HTMLInputElement>("[data-role=type-box]")!;
    this.renderer = options.renderer ?? new CanvasRenderer(this.canvas.getContext("2d")!);

    this.bindCanvas();
    this.bindSidebar(root);
    this.store.subscribe(() => this.render());
    this.render();
  }

  private makeAnimator(durationMs: number) {
    if (durationMs <= 0) {
      return (_from: Point2, to: Point2, apply: (p: Point2) => void) => apply(to);
    }
    return (from: Point2, to: Point2, apply: (p: Point2) => void) => {
      const start = performance.now();
      const step = (now: number) => {
        const t = Math.min(1, (now - start) / durationMs);
        const ease = t * (2 - t);
        apply([from[0] + (to[0] - from[0]) * ease, from[1] + (to[1] - from[1]) * ease]);
        if (t < 1) requestAnimationFrame(step);
      };
      requestAnimationFrame(step);
    };
  }

  private camera(): Camera {
    const view = this.store.getState().view;
    return new Camera(view.center, view.zoom);
  }

  private viewport() {
    return { width: this.width, height: this.height };
  }

  // -- canvas events -------------------------------------------------------

  private bindCanvas(): void {
    this.canvas.addEventListener("mousedown", (event) => {
      this.dragging = { last: [event.offsetX, event.offsetY] };
    });
    this.canvas.addEventListener("mousemove", (event) => {
      if (!this.dragging) return;
      const camera = this.camera();
      const scale = camera.scale();
      const [lx, ly] = this.dragging.last;
      const center = this.store.getState().view.center;
      this.store.setCenter([
        center[0] - (event.offsetX - lx) / scale,
        center[1] + (event.offsetY - ly) / scale,
      ]);
      this.dragging = { last: [event.offsetX, event.offsetY] };
    });
    this.canvas.addEventListener("mouseup", (event) => {
      this.dragging = null;
      this.handleClick([event.offsetX, event.offsetY], event.shiftKey);
    });
    this.canvas.addEventListener("wheel", (event) => {
      event.preventDefault();
      const zoom = this.store.getState().view.zoom + (event.deltaY < 0 ? 1 : -1);
      void this.store.setZoom(zoom);
    });
  }

  handleClick(screen: Point2, additive: boolean): void {
    const camera = this.camera();
    const viewport = this.viewport();
    for (const entity of this.scene.entities) {
      const p = camera.worldToScreen(entity.position, viewport);
      if (Math.hypot(p[0] - screen[0], p[1] - screen[1]) <= ENTITY_HIT_RADIUS) {
        this.store.toggleSelect(entity.entityId, additive);
        return;
      }
    }
    for (const result of this.scene.results) {
      const p = camera.worldToScreen(result.position, viewport);
      if (Math.hypot(p[0] - screen[0], p[1] - screen[1]) <= RESULT_HIT_RADIUS) {
        if (result.kind === "document") {
          void this.client.getDocument(result.itemId).then((doc) => {
            if (doc.url) this.openUrl(doc.url);
          });
        }
        return;
      }
    }
    this.showTypeBox(screen);
  }

  private showTypeBox(screen: Point2): void {
    this.typeBox.hidden = false;
    this.typeBox.style.left = `${screen[0]}px`;
    this.typeBox.style.top = `${screen[1]}px`;
    this.typeBox.dataset.worldX = String(this.camera().screenToWorld(screen, this.viewport())[0]);
    this.typeBox.dataset.worldY = String(this.camera().screenToWorld(screen, this.viewport())[1]);
    this.typeBox.value = "";
    this.typeBox.focus();
  }

  /** Commit the type box: creates the entity and issues the context query. */
  async commitTypeBox(): Promise<void> {
    const world: Point2 = [
      Number(this.typeBox.dataset.worldX ?? 0),
      Number(this.typeBox.dataset.worldY ?? 0),
    ];
    const text = this.typeBox.value;
    await this.store.typeOnMap(world, text);
    if (text.trim()) this.typeBox.hidden = true;
  }

  // -- sidebar ---------------------------------------------------------------

  private bindSidebar(root: HTMLElement): void {
    this.typeBox.addEventListener("keydown", (event) => {
      if (event.key === "Enter") void this.commitTypeBox();
      if (event.key === "Escape") this.typeBox.hidden = true;
    });
    root
      .querySelector<HTMLSelectElement>("[data-role=kind-filter]")!
      .addEventListener("change", (event) => {
        const value = (event.target as HTMLSelectElement).value;
        this.store.setKindFilter((value || null) as KindFilter);
      });
    root
      .querySelector<HTMLButtonElement>("[data-role=group-search]")!
      .addEventListener("click", () => void this.store.groupSearchSelection());
  }

  private renderOutline(): void {
    const state = this.store.getState();
    const centerId = this.scene.entities.find((e) => e.isCurrent)?.entityId ?? null;
    const nodes = buildOutline(state.entities, state.entityOrder, centerId);
    this.outlineList.replaceChildren(...nodes.map((node) => this.outlineItem(node)));
  }

  private outlineItem(node: OutlineNode): HTMLLIElement {
    const item = document.createElement("li");
    item.dataset.entityId = node.entityId;
    const label = document.createElement("span");
    label.textContent = node.text;
    label.className = node.isCurrent ? "cm-outline-current" : "";
    label.draggable = true;
    label.addEventListener("click", () => this.store.centerOnEntity(node.entityId));
    label.addEventListener("dragstart", () => {
      this.draggedOutlineId = node.entityId;
    });
    label.addEventListener("dragover", (event) => event.preventDefault());
    label.addEventListener("drop", (event) => {
      event.preventDefault();
      if (this.draggedOutlineId && this.draggedOutlineId !== node.entityId) {
        void this.store.reparent(this.draggedOutlineId, node.entityId);
      }
      this.draggedOutlineId = null;
    });
    item.appendChild(label);
    if (node.children.length) {
      const list = document.createElement("ul");
      list.replaceChildren(...node.children.map((child) => this.outlineItem(child)));
      item.appendChild(list);
    }
    return item;
  }

  // -- painting ---------------------------------------------------------------

  render(): void {
    const state = this.store.getState();
    this.scene = buildScene(state);
    const camera = this.camera();
    const viewport = this.viewport();
    const scale = camera.scale();

    this.renderer.begin(this.width, this.height);
    for (const cluster of this.scene.clusters.filter((c) => c.level === "parent")) {
      this.renderer.drawCluster(
        camera.worldToScreen(cluster.centroid, viewport),
        cluster.radius * scale,
        cluster.label,
        "parent",
      );
    }
    for (const cluster of this.scene.clusters.filter((c) => c.level === "current")) {
      this.renderer.drawCluster(
        camera.worldToScreen(cluster.centroid, viewport),
        cluster.radius * scale,
        cluster.label,
        "current",
      );
    }
    for (const edge of this.scene.edges) {
      this.renderer.drawEdge(
        camera.worldToScreen(edge.from, viewport),
        camera.worldToScreen(edge.to, viewport),
      );
    }
    for (const result of this.scene.results) {
      this.renderer.drawResult(
        camera.worldToScreen(result.position, viewport),
        result.kind,
        result.itemId,
      );
    }
    for (const entity of this.scene.entities) {
      this.renderer.drawEntity(camera.worldToScreen(entity.position, viewport), entity.text, {
        focused: entity.isFocused,
        selected: entity.isSelected,
        current: entity.isCurrent,
      });
    }
    this.renderer.end();

    this.renderOutline();
    this.errorBox.hidden = !state.lastError;
    this.errorBox.textContent = state.lastError ?? "";
  }
}

export { MAX_ZOOM };
