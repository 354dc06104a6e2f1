// Outline sidebar model: a bullet-point mirror of the map's entity forest.

import type { EntityWire, OutlineNode, Point2 } from "./types.js";

/**
 * Build the outline tree from the store's entity forest. Roots appear in the
 * map's entityIds order, children in each entity's childrenEntityIds order,
 * so the outline mirrors the stored structure exactly (same ids, same order).
 */
export function buildOutline(
  entities: Record<string, EntityWire>,
  entityOrder: string[],
  currentEntityId: string | null,
): OutlineNode[] {
  const toNode = (id: string): OutlineNode => {
    const entity = entities[id];
    if (!entity) throw new Error(`outline references missing entity ${id}`);
    return {
      entityId: id,
      text: entity.text,
      children: entity.childrenEntityIds.map(toNode),
      isCurrent: id === currentEntityId,
    };
  };
  return entityOrder.filter((id) => entities[id]?.parentEntityId == null).map(toNode);
}

export function flattenOutline(nodes: OutlineNode[]): OutlineNode[] {
  return nodes.flatMap((node) => [node, ...flattenOutline(node.children)]);
}

/** The entity nearest the viewport center is "where you are" in the outline. */
export function nearestEntityId(
  entities: Record<string, EntityWire>,
  center: Point2,
): string | null {
  let best: string | null = null;
  let bestDistance = Infinity;
  for (const entity of Object.values(entities)) {
    const dx = entity.coordinates[0] - center[0];
    const dy = entity.coordinates[1] - center[1];
    const distance = dx * dx + dy * dy;
    if (distance < bestDistance || (distance === bestDistance && best !== null && entity.entityId < best)) {
      best = entity.entityId;
      bestDistance = distance;
    }
  }
  return best;
}
