// Single client store with unidirectional updates: actions mutate state
// through update(), subscribers re-render from getState(). Query traffic is
// newest-wins (a fresh query batch aborts the in-flight one), mutations are
// queued in issue order.

import { ApiClient, ApiError } from "./api.js";
import { MAX_ZOOM, zoomToTargetClusters } from "./camera.js";
import type {
  AppState,
  EntityWire,
  KindFilter,
  Point2,
  QueryRequestWire,
  QueryResponseWire,
  SearchOverlay,
} from "./types.js";

export interface StoreOptions {
  client: ApiClient;
  maxZoom?: number;
  perNodeK?: number;
  rootBreadth?: number;
  radius?: number;
  /** center animation hook; default jumps instantly (tests, reduced motion) */
  animateCenter?: (from: Point2, to: Point2, apply: (p: Point2) => void) => void;
}

type Listener = () => void;

interface QueryBatch {
  signal: AbortSignal;
  isCurrent(): boolean;
}

export class AppStore {
  private state: AppState;
  private readonly listeners = new Set<Listener>();
  private readonly client: ApiClient;
  private readonly perNodeK: number;
  private readonly rootBreadth: number;
  private readonly radius: number;
  private readonly animateCenter: NonNullable<StoreOptions["animateCenter"]>;
  private overlaySeq = 0;
  private queryEpoch = 0;
  private inflight: AbortController | null = null;
  private mutationQueue: Promise<unknown> = Promise.resolve();

  constructor(options: StoreOptions) {
    this.client = options.client;
    this.perNodeK = options.perNodeK ?? 12;
    this.rootBreadth = options.rootBreadth ?? 64;
    this.radius = options.radius ?? 1.0;
    this.animateCenter = options.animateCenter ?? ((_from, to, apply) => apply(to));
    this.state = {
      view: { center: [0, 0], zoom: 0, selectedMapId: null, focusedEntityId: null },
      maxZoom: options.maxZoom ?? MAX_ZOOM,
      maps: [],
      entities: {},
      entityOrder: [],
      overlays: [],
      selection: [],
      kindFilter: null,
      lastError: null,
    };
  }

  getState(): Readonly<AppState> {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private update(mutate: (state: AppState) => void): void {
    const next: AppState = { ...this.state, view: { ...this.state.view } };
    mutate(next);
    this.state = next;
    for (const listener of this.listeners) listener();
  }

  private fail(error: unknown): void {
    const message = error instanceof Error ? error.message : String(error);
    this.update((s) => {
      s.lastError = message;
    });
  }

  // -- request policies ------------------------------------------------------

  /** Serialize mutations: each starts only after the previous settled. */
  private enqueueMutation<T>(operation: () => Promise<T>): Promise<T> {
    const next = this.mutationQueue.then(operation, operation);
    this.mutationQueue = next.catch(() => undefined);
    return next;
  }

  /** Newest-wins query admission: opening a batch aborts the previous one. */
  private beginQueryBatch(): QueryBatch {
    this.queryEpoch += 1;
    const epoch = this.queryEpoch;
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    return { signal: controller.signal, isCurrent: () => epoch === this.queryEpoch };
  }

  private async batchQuery(
    batch: QueryBatch,
    request: QueryRequestWire,
  ): Promise<QueryResponseWire | null> {
    try {
      const response = await this.client.query(request, batch.signal);
      return batch.isCurrent() ? response : null;
    } catch (error) {
      if (batch.signal.aborted) return null;
      this.fail(error);
      return null;
    }
  }

  // -- maps and entities -------------------------------------------------

  async loadMaps(): Promise<void> {
    const { maps } = await this.client.listMaps();
    this.update((s) => {
      s.maps = maps;
    });
  }

  async selectMap(mapId: string): Promise<void> {
    await this.client.selectMap(mapId);
    const map = await this.client.getMap(mapId);
    this.update((s) => {
      s.view.selectedMapId = mapId;
      s.view.focusedEntityId = null;
      s.entities = Object.fromEntries(map.entities.map((e) => [e.entityId, e]));
      s.entityOrder = map.entityIds;
      s.overlays = [];
      s.selection = [];
    });
  }

  async refreshEntities(): Promise<void> {
    const mapId = this.state.view.selectedMapId;
    if (!mapId) return;
    const map = await this.client.getMap(mapId);
    this.update((s) => {
      s.entities = Object.fromEntries(map.entities.map((e) => [e.entityId, e]));
      s.entityOrder = map.entityIds;
      if (s.view.focusedEntityId && !s.entities[s.view.focusedEntityId]) {
        s.view.focusedEntityId = null;
      }
      s.selection = s.selection.filter((id) => s.entities[id]);
    });
  }

  async createMapAndSelect(name: string): Promise<void> {
    const map = await this.enqueueMutation(() => this.client.createMap(name));
    this.update((s) => {
      s.maps = [...s.maps, map];
    });
    await this.selectMap(map.mapId);
  }

  // -- the mixed-initiative loop ----------------------------------------

  /**
   * Type-on-map: create an entity at the clicked world position, then issue
   * one context query anchored there and render its results additively.
   * Empty text is rejected inline without any request.
   */
  async typeOnMap(world: Point2, text: string): Promise<void> {
    if (!text.trim()) {
      this.update((s) => {
        s.lastError = "type some text to search";
      });
      return;
    }
    const mapId = this.state.view.selectedMapId;
    if (!mapId) {
      this.update((s) => {
        s.lastError = "select a map first";
      });
      return;
    }
    let entity: EntityWire;
    try {
      entity = await this.enqueueMutation(() =>
        this.client.createEntity(mapId, text, world),
      );
    } catch (error) {
      this.fail(error);
      return;
    }
    this.update((s) => {
      s.entities = { ...s.entities, [entity.entityId]: entity };
      s.entityOrder = [...s.entityOrder, entity.entityId];
      s.view.focusedEntityId = entity.entityId;
      s.lastError = null;
    });

    const zoom = this.state.view.zoom;
    const target = zoomToTargetClusters(zoom, this.state.maxZoom, this.perNodeK);
    const request: QueryRequestWire = {
      mapId,
      tree: { nodeId: entity.entityId, text, anchor: entity.coordinates },
      params: {
        root_breadth: this.rootBreadth,
        per_node_k: this.perNodeK,
        kind_filter: this.state.kindFilter,
      },
      target_clusters: target,
      radius: this.radius,
    };
    const batch = this.beginQueryBatch();
    const response = await this.batchQuery(batch, request);
    if (!response) return;
    const overlay: SearchOverlay = {
      id: ++this.overlaySeq,
      kind: "tree",
      originEntityId: entity.entityId,
      anchor: entity.coordinates,
      radius: this.radius,
      responses: { [target]: response },
      currentTarget: target,
      parentTarget: null,
      request,
      groupHits: [],
    };
    this.update((s) => {
      s.overlays = [...s.overlays, overlay];
    });
    if (zoom > 0) await this.refreshOverlayCuts(batch);
  }

  /** Integer zoom step; refetches the cluster cuts the new level needs. */
  async setZoom(zoom: number): Promise<void> {
    const clamped = Math.max(0, Math.min(this.state.maxZoom, Math.round(zoom)));
    if (clamped === this.state.view.zoom) return;
    this.update((s) => {
      s.view.zoom = clamped;
    });
    await this.refreshOverlayCuts(this.beginQueryBatch());
  }

  /**
   * Ensure every tree overlay holds the cut for the current zoom level and
   * for the enclosing parent level (one coarser zoom step), fetching missing
   * targets sequentially inside the given batch.
   */
  private async refreshOverlayCuts(batch: QueryBatch): Promise<void> {
    const zoom = this.state.view.zoom;
    const maxZoom = this.state.maxZoom;
    for (const overlay of this.state.overlays) {
      if (overlay.kind !== "tree" || !overlay.request) continue;
      const rootHits = overlay.responses[overlay.currentTarget]?.nodes[0]?.hits.length;
      const n = rootHits && rootHits > 0 ? rootHits : this.perNodeK;
      const currentTarget = zoomToTargetClusters(zoom, maxZoom, n);
      const parentTarget = zoom > 0 ? zoomToTargetClusters(zoom - 1, maxZoom, n) : null;
      const updated: Record<number, QueryResponseWire> = { ...overlay.responses };
      for (const target of [currentTarget, parentTarget]) {
        if (target == null || updated[target]) continue;
        const response = await this.batchQuery(batch, {
          ...overlay.request,
          target_clusters: target,
        });
        if (!response) return; // superseded or failed; a newer batch owns the state
        updated[target] = response;
      }
      if (!batch.isCurrent()) return;
      this.update((s) => {
        s.overlays = s.overlays.map((o) =>
          o.id === overlay.id
            ? { ...o, responses: updated, currentTarget, parentTarget }
            : o,
        );
      });
    }
  }

  /** Group search: more items that fit the selected entities, rendered near
   * the selection centroid. */
  async groupSearchSelection(): Promise<void> {
    const members = this.state.selection;
    if (members.length === 0) {
      this.update((s) => {
        s.lastError = "select at least one entity";
      });
      return;
    }
    let hits;
    try {
      ({ hits } = await this.client.groupSearch(members, this.perNodeK));
    } catch (error) {
      this.fail(error);
      return;
    }
    const fallback: Point2 = [0, 0];
    const coords = members.map((id) => this.state.entities[id]?.coordinates ?? fallback);
    const centroid: Point2 = [
      coords.reduce((sum, c) => sum + c[0], 0) / coords.length,
      coords.reduce((sum, c) => sum + c[1], 0) / coords.length,
    ];
    const overlay: SearchOverlay = {
      id: ++this.overlaySeq,
      kind: "group",
      originEntityId: null,
      anchor: centroid,
      radius: this.radius,
      responses: {},
      currentTarget: 0,
      parentTarget: null,
      request: null,
      groupHits: hits,
    };
    this.update((s) => {
      s.overlays = [...s.overlays, overlay];
      s.lastError = null;
    });
  }

  // -- structure edits -----------------------------------------------------

  async reparent(childId: string, parentId: string | null): Promise<void> {
    try {
      await this.enqueueMutation(() =>
        this.client.patchEntity(childId, { parentEntityId: parentId }),
      );
      this.update((s) => {
        s.lastError = null;
      });
    } catch (error) {
      // cycle and cross-map rejections surface inline, state stays intact
      this.fail(error instanceof ApiError ? error : new Error(String(error)));
      return;
    }
    await this.refreshEntities();
  }

  async moveEntity(entityId: string, coordinates: Point2): Promise<void> {
    try {
      const entity = await this.enqueueMutation(() =>
        this.client.patchEntity(entityId, { coordinates }),
      );
      this.update((s) => {
        s.entities = { ...s.entities, [entityId]: entity };
      });
    } catch (error) {
      this.fail(error);
    }
  }

  async deleteEntity(entityId: string): Promise<void> {
    try {
      await this.enqueueMutation(() => this.client.deleteEntity(entityId));
    } catch (error) {
      this.fail(error);
      return;
    }
    await this.refreshEntities();
  }

  // -- view ------------------------------------------------------------------

  setCenter(center: Point2): void {
    this.update((s) => {
      s.view.center = center;
    });
  }

  centerOnEntity(entityId: string): void {
    const entity = this.state.entities[entityId];
    if (!entity) return;
    const from = this.state.view.center;
    this.update((s) => {
      s.view.focusedEntityId = entityId;
    });
    this.animateCenter(from, entity.coordinates, (p) => this.setCenter(p));
  }

  toggleSelect(entityId: string, additive: boolean): void {
    this.update((s) => {
      const already = s.selection.includes(entityId);
      if (!additive) {
        s.selection = already ? [] : [entityId];
      } else {
        s.selection = already
          ? s.selection.filter((id) => id !== entityId)
          : [...s.selection, entityId];
      }
      s.view.focusedEntityId = entityId;
    });
  }

  setKindFilter(filter: KindFilter): void {
    this.update((s) => {
      s.kindFilter = filter;
    });
  }

  clearError(): void {
    this.update((s) => {
      s.lastError = null;
    });
  }
}
