"""Placement of a laid-out result set near its querying position on the map.

A similarity transform restricted to uniform scale plus translation (no
rotation): distances are rescaled so the farthest point sits exactly at the
requested radius, while every pairwise direction is preserved bit-for-bit up
to floating point. All-coincident inputs collapse to the anchor, the only
continuous extension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tsne import LayoutPoint

DEGENERATE_SPREAD = 1e-12


@dataclass(frozen=True)
class ProjectionSpec:
    anchor: tuple[float, float]
    radius: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError("radius must be finite and positive")


def project_near(points: list[LayoutPoint], spec: ProjectionSpec) -> list[LayoutPoint]:
    """Anchor the point set's centroid at spec.anchor, scaled to spec.radius."""
    if not points:
        return []
    coords = np.array([[p.x, p.y] for p in points], dtype=np.float64)
    centroid = coords.mean(axis=0)
    offsets = coords - centroid
    max_radius = float(np.sqrt((offsets * offsets).sum(axis=1).max()))
    scale = spec.radius / max_radius if max_radius >= DEGENERATE_SPREAD else 1.0
    anchor = np.asarray(spec.anchor, dtype=np.float64)
    placed = anchor + scale * offsets
    return [
        LayoutPoint(p.item_id, float(xy[0]), float(xy[1])) for p, xy in zip(points, placed)
    ]
