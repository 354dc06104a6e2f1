// Derive the drawable scene (world coordinates) from the app state.
// Hit order from the server is preserved verbatim; the scene never re-ranks.

import type { AppState, Point2, SearchOverlay } from "./types.js";
import { itemKind } from "./types.js";
import { nearestEntityId } from "./outline.js";

export interface SceneEntity {
  entityId: string;
  position: Point2;
  text: string;
  isFocused: boolean;
  isSelected: boolean;
  isCurrent: boolean;
}

export interface SceneEdge {
  from: Point2;
  to: Point2;
}

export interface SceneResult {
  overlayId: number;
  itemId: string;
  kind: "document" | "entity";
  position: Point2;
  rank: number; // position in the server's hit list
}

export interface SceneCluster {
  overlayId: number;
  nodeId: string;
  key: string;
  level: "current" | "parent";
  label: string;
  centroid: Point2;
  radius: number;
  memberIds: string[];
}

export interface Scene {
  entities: SceneEntity[];
  edges: SceneEdge[];
  results: SceneResult[];
  clusters: SceneCluster[];
}

const CLUSTER_PADDING = 1.15;
const MIN_CLUSTER_RADIUS = 0.15;

function clustersFromResponse(
  overlay: SearchOverlay,
  target: number,
  level: "current" | "parent",
): SceneCluster[] {
  const response = overlay.responses[target];
  if (!response) return [];
  const clusters: SceneCluster[] = [];
  for (const node of response.nodes) {
    const position = new Map(node.projectedPoints.map((p) => [p.itemId, [p.x, p.y] as Point2]));
    for (const cluster of node.clusters) {
      let radius = MIN_CLUSTER_RADIUS;
      for (const member of cluster.memberIds) {
        const p = position.get(member);
        if (!p) continue;
        const d = Math.hypot(p[0] - cluster.centroid[0], p[1] - cluster.centroid[1]);
        radius = Math.max(radius, d * CLUSTER_PADDING);
      }
      clusters.push({
        overlayId: overlay.id,
        nodeId: node.nodeId,
        key: `${overlay.id}:${node.nodeId}:${level}:${cluster.clusterId}`,
        level,
        label: cluster.label,
        centroid: cluster.centroid,
        radius,
        memberIds: cluster.memberIds,
      });
    }
  }
  return clusters;
}

/** Group results have no server layout; arrange them on a ring around the
 * selection centroid, in server rank order. */
export function groupRingPositions(overlay: SearchOverlay): SceneResult[] {
  const count = overlay.groupHits.length;
  return overlay.groupHits.map((hit, rank) => {
    const angle = (2 * Math.PI * rank) / Math.max(count, 1);
    return {
      overlayId: overlay.id,
      itemId: hit.itemId,
      kind: itemKind(hit.itemId),
      position: [
        overlay.anchor[0] + overlay.radius * Math.cos(angle),
        overlay.anchor[1] + overlay.radius * Math.sin(angle),
      ] as Point2,
      rank,
    };
  });
}

export function buildScene(state: AppState): Scene {
  const entities: SceneEntity[] = [];
  const edges: SceneEdge[] = [];
  const currentId = nearestEntityId(state.entities, state.view.center);
  for (const id of state.entityOrder) {
    const entity = state.entities[id];
    if (!entity) continue;
    entities.push({
      entityId: id,
      position: entity.coordinates,
      text: entity.text,
      isFocused: state.view.focusedEntityId === id,
      isSelected: state.selection.includes(id),
      isCurrent: currentId === id,
    });
    if (entity.parentEntityId) {
      const parent = state.entities[entity.parentEntityId];
      if (parent) edges.push({ from: parent.coordinates, to: entity.coordinates });
    }
  }

  const results: SceneResult[] = [];
  const clusters: SceneCluster[] = [];
  for (const overlay of state.overlays) {
    if (overlay.kind === "group") {
      results.push(...groupRingPositions(overlay));
      continue;
    }
    const response = overlay.responses[overlay.currentTarget];
    if (!response) continue;
    for (const node of response.nodes) {
      const order = new Map(node.hits.map((hit, rank) => [hit.itemId, rank]));
      for (const point of node.projectedPoints) {
        results.push({
          overlayId: overlay.id,
          itemId: point.itemId,
          kind: itemKind(point.itemId),
          position: [point.x, point.y],
          rank: order.get(point.itemId) ?? 0,
        });
      }
    }
    clusters.push(...clustersFromResponse(overlay, overlay.currentTarget, "current"));
    if (overlay.parentTarget != null && overlay.parentTarget !== overlay.currentTarget) {
      clusters.push(...clustersFromResponse(overlay, overlay.parentTarget, "parent"));
    }
  }
  return { entities, edges, results, clusters };
}
