// Pure tree geometry: depths, children, and a tidy layered layout.
// Subtree spans are allocated bottom-up so parents sit centred over
// their children; coordinates are abstract units scaled by the view.

import type { Polarity, QbafView } from "./types.js";

export interface ChildRef {
  id: string;
  polarity: Polarity;
}

export function childrenMap(qbaf: QbafView): Map<string, ChildRef[]> {
  const map = new Map<string, ChildRef[]>();
  for (const argument of qbaf.arguments) {
    map.set(argument.id, []);
  }
  for (const edge of qbaf.edges) {
    map.get(edge.target)?.push({ id: edge.source, polarity: edge.polarity });
  }
  return map;
}

export function depthMap(qbaf: QbafView): Record<string, number> {
  const children = childrenMap(qbaf);
  const depths: Record<string, number> = { [qbaf.root]: 0 };
  let frontier = [qbaf.root];
  while (frontier.length) {
    const next: string[] = [];
    for (const node of frontier) {
      for (const child of children.get(node) ?? []) {
        if (!(child.id in depths)) {
          depths[child.id] = depths[node] + 1;
          next.push(child.id);
        }
      }
    }
    frontier = next;
  }
  return depths;
}

export interface Layout {
  positions: Record<string, { x: number; y: number }>;
  width: number;
  height: number;
}

export function layoutTree(qbaf: QbafView): Layout {
  const children = childrenMap(qbaf);
  const widths = new Map<string, number>();

  const measure = (id: string): number => {
    const kids = children.get(id) ?? [];
    const total = kids.reduce((sum, kid) => sum + measure(kid.id), 0);
    const width = Math.max(1, total);
    widths.set(id, width);
    return width;
  };
  measure(qbaf.root);

  const positions: Record<string, { x: number; y: number }> = {};
  let maxDepth = 0;
  const place = (id: string, left: number, depth: number) => {
    const width = widths.get(id) ?? 1;
    positions[id] = { x: left + width / 2, y: depth };
    maxDepth = Math.max(maxDepth, depth);
    let cursor = left;
    for (const kid of children.get(id) ?? []) {
      place(kid.id, cursor, depth + 1);
      cursor += widths.get(kid.id) ?? 1;
    }
  };
  place(qbaf.root, 0, 0);

  return { positions, width: widths.get(qbaf.root) ?? 1, height: maxDepth + 1 };
}
