// Wire types for the corpusmap HTTP API plus the UI's own view-state shapes.

export type Point2 = [number, number];
export type KindFilter = "document" | "entity" | null;

export interface MapWire {
  mapId: string;
  name: string;
  entityIds: string[];
}

export interface EntityWire {
  entityId: string;
  mapId: string;
  parentEntityId: string | null;
  childrenEntityIds: string[];
  coordinates: Point2;
  text: string;
}

export interface DocumentWire {
  documentId: string;
  title: string;
  url: string;
  text: string;
}

export interface HitWire {
  itemId: string;
  score: number;
}

export interface ClusterWire {
  clusterId: number;
  memberIds: string[];
  centroid: Point2;
  label: string;
}

export interface ProjectedPointWire {
  itemId: string;
  x: number;
  y: number;
}

export interface QueryNodeWire {
  nodeId: string;
  anchor: Point2;
  hits: HitWire[];
  clusters: ClusterWire[];
  projectedPoints: ProjectedPointWire[];
}

export interface QueryResponseWire {
  mapId: string;
  seed: number;
  nodes: QueryNodeWire[];
}

export interface TreeNodeWire {
  nodeId: string;
  text: string;
  children?: TreeNodeWire[];
  anchor?: Point2 | null;
}

export interface QueryRequestWire {
  mapId: string;
  tree: TreeNodeWire;
  params?: { root_breadth?: number; per_node_k?: number; kind_filter?: KindFilter };
  target_clusters?: number;
  radius?: number;
}

// ---- UI state ------------------------------------------------------------

export interface ViewState {
  center: Point2;
  zoom: number; // integer steps in [0, maxZoom]
  selectedMapId: string | null;
  focusedEntityId: string | null;
}

export interface OutlineNode {
  entityId: string;
  text: string;
  children: OutlineNode[];
  isCurrent: boolean;
}

/** One issued search, rendered additively on the map. */
export interface SearchOverlay {
  id: number;
  kind: "tree" | "group";
  originEntityId: string | null;
  anchor: Point2;
  radius: number;
  /** tree overlays: cached responses keyed by target_clusters */
  responses: Record<number, QueryResponseWire>;
  currentTarget: number;
  parentTarget: number | null;
  request: QueryRequestWire | null;
  /** group overlays: raw hits in server order */
  groupHits: HitWire[];
}

export interface AppState {
  view: ViewState;
  maxZoom: number;
  maps: MapWire[];
  entities: Record<string, EntityWire>;
  entityOrder: string[]; // selected map's entityIds order
  overlays: SearchOverlay[];
  selection: string[]; // selected entity ids, in click order
  kindFilter: KindFilter;
  lastError: string | null;
}

export function itemKind(itemId: string): "document" | "entity" {
  return itemId.startsWith("doc-") ? "document" : "entity";
}
