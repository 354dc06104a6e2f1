// Drawing backends. The app talks to the Renderer interface only, so tests
// swap in a recording fake where jsdom has no canvas context.

import type { Point2 } from "./types.js";

export interface RenderFlags {
  focused?: boolean;
  selected?: boolean;
  current?: boolean;
}

export interface Renderer {
  begin(width: number, height: number): void;
  drawEdge(from: Point2, to: Point2): void;
  drawCluster(center: Point2, radiusPx: number, label: string, level: "current" | "parent"): void;
  drawResult(at: Point2, kind: "document" | "entity", itemId: string): void;
  drawEntity(at: Point2, text: string, flags: RenderFlags): void;
  end(): void;
}

export class CanvasRenderer implements Renderer {
  constructor(private readonly ctx: CanvasRenderingContext2D) {}

  begin(width: number, height: number): void {
    this.ctx.clearRect(0, 0, width, height);
    this.ctx.fillStyle = "#fafaf7";
    this.ctx.fillRect(0, 0, width, height);
  }

  drawEdge(from: Point2, to: Point2): void {
    this.ctx.strokeStyle = "#b9b9b0";
    this.ctx.lineWidth = 1.5;
    this.ctx.beginPath();
    this.ctx.moveTo(from[0], from[1]);
    this.ctx.lineTo(to[0], to[1]);
    this.ctx.stroke();
  }

  drawCluster(center: Point2, radiusPx: number, label: string, level: "current" | "parent"): void {
    this.ctx.beginPath();
    this.ctx.arc(center[0], center[1], radiusPx, 0, 2 * Math.PI);
    if (level === "parent") {
      this.ctx.strokeStyle = "rgba(90, 110, 160, 0.35)";
      this.ctx.setLineDash([6, 4]);
    } else {
      this.ctx.strokeStyle = "rgba(90, 110, 160, 0.8)";
      this.ctx.setLineDash([]);
    }
    this.ctx.lineWidth = level === "parent" ? 2.5 : 1.5;
    this.ctx.stroke();
    this.ctx.setLineDash([]);
    if (label) {
      this.ctx.fillStyle = level === "parent" ? "rgba(60,70,110,0.5)" : "#3d4a73";
      this.ctx.font = "11px system-ui, sans-serif";
      this.ctx.textAlign = "center";
      this.ctx.fillText(label, center[0], center[1] - radiusPx - 4);
    }
  }

  drawResult(at: Point2, kind: "document" | "entity", _itemId: string): void {
    this.ctx.fillStyle = kind === "document" ? "#b0713c" : "#4c7a52";
    if (kind === "document") {
      this.ctx.fillRect(at[0] - 4, at[1] - 4, 8, 8); // documents: squares, open url on click
    } else {
      this.ctx.beginPath();
      this.ctx.arc(at[0], at[1], 4, 0, 2 * Math.PI);
      this.ctx.fill();
    }
  }

  drawEntity(at: Point2, text: string, flags: RenderFlags): void {
    this.ctx.beginPath();
    this.ctx.arc(at[0], at[1], flags.focused ? 8 : 6, 0, 2 * Math.PI);
    this.ctx.fillStyle = flags.selected ? "#d8a23a" : "#2d5c8a";
    this.ctx.fill();
    if (flags.current) {
      this.ctx.strokeStyle = "#d8462f";
      this.ctx.lineWidth = 2;
      this.ctx.stroke();
    }
    this.ctx.fillStyle = "#222";
    this.ctx.font = "12px system-ui, sans-serif";
    this.ctx.textAlign = "center";
    this.ctx.fillText(text, at[0], at[1] - 12);
  }

  end(): void {}
}

export type RecordedCall =
  | { op: "begin"; width: number; height: number }
  | { op: "edge"; from: Point2; to: Point2 }
  | { op: "cluster"; center: Point2; radiusPx: number; label: string; level: "current" | "parent" }
  | { op: "result"; at: Point2; kind: "document" | "entity"; itemId: string }
  | { op: "entity"; at: Point2; text: string; flags: RenderFlags }
  | { op: "end" };

export class RecordingRenderer implements Renderer {
  calls: RecordedCall[] = [];

  begin(width: number, height: number): void {
    this.calls = [{ op: "begin", width, height }];
  }
  drawEdge(from: Point2, to: Point2): void {
    this.calls.push({ op: "edge", from, to });
  }
  drawCluster(center: Point2, radiusPx: number, label: string, level: "current" | "parent"): void {
    this.calls.push({ op: "cluster", center, radiusPx, label, level });
  }
  drawResult(at: Point2, kind: "document" | "entity", itemId: string): void {
    this.calls.push({ op: "result", at, kind, itemId });
  }
  drawEntity(at: Point2, text: string, flags: RenderFlags): void {
    this.calls.push({ op: "entity", at, text, flags });
  }
  end(): void {
    this.calls.push({ op: "end" });
  }

  ofType<T extends RecordedCall["op"]>(op: T): Extract<RecordedCall, { op: T }>[] {
    return this.calls.filter((c) => c.op === op) as Extract<RecordedCall, { op: T }>[];
  }
}
