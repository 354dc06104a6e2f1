// Thin typed client for the corpusmap HTTP API.

import type {
  DocumentWire,
  EntityWire,
  HitWire,
  MapWire,
  Point2,
  QueryRequestWire,
  QueryResponseWire,
} from "./types.js";

export type FetchLike = typeof fetch;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function parseDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: string };
    return body.detail ?? response.statusText;
  } catch {
    return response.statusText;
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
      signal,
    });
    if (!response.ok) {
      throw new ApiError(response.status, await parseDetail(response));
    }
    return (await response.json()) as T;
  }

  listMaps(): Promise<{ maps: MapWire[] }> {
    return this.request("GET", "/maps");
  }

  createMap(name: string): Promise<MapWire> {
    return this.request("POST", "/maps", { name });
  }

  getMap(mapId: string): Promise<MapWire & { entities: EntityWire[] }> {
    return this.request("GET", `/maps/${mapId}`);
  }

  createEntity(
    mapId: string,
    text: string,
    coordinates: Point2,
    parentEntityId?: string,
  ): Promise<EntityWire> {
    return this.request("POST", `/maps/${mapId}/entities`, {
      text,
      coordinates,
      parentEntityId: parentEntityId ?? null,
    });
  }

  patchEntity(
    entityId: string,
    patch: { text?: string; coordinates?: Point2; parentEntityId?: string | null },
  ): Promise<EntityWire> {
    return this.request("PATCH", `/entities/${entityId}`, patch);
  }

  deleteEntity(entityId: string): Promise<{ deleted: string }> {
    return this.request("DELETE", `/entities/${entityId}`);
  }

  getDocument(documentId: string): Promise<DocumentWire> {
    return this.request("GET", `/documents/${documentId}`);
  }

  query(body: QueryRequestWire, signal?: AbortSignal): Promise<QueryResponseWire> {
    return this.request("POST", "/query", body, signal);
  }

  groupSearch(memberIds: string[], k: number): Promise<{ hits: HitWire[] }> {
    return this.request("POST", "/group-search", { memberIds, k });
  }

  selectMap(mapId: string): Promise<{ selectedMapId: string | null }> {
    return this.request("POST", "/menu/select", { mapId });
  }
}
