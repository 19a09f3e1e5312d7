/**
 * Writer for the dppselect embedding-manifest exchange format: manifest.json
 * plus flat row-major little-endian float32 matrices (ego.f32, exo.f32,
 * queries.f32). Rows are L2-normalized in float64 before the float32 cast.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

export interface FrameMeta {
  index: number;
  timestamp: number;
}

export interface QueryMeta {
  id: string;
  text: string;
}

export interface ManifestPayload {
  dim: number;
  fps: number;
  embedder: string;
  ego: FrameMeta[];
  exo: FrameMeta[];
  queries: QueryMeta[];
  egoRows: Float64Array[];
  exoRows: Float64Array[];
  queryRows: Float64Array[];
}

function rowsToF32(rows: Float64Array[], dim: number, label: string): Buffer {
  const buf = Buffer.alloc(rows.length * dim * 4);
  rows.forEach((row, r) => {
    if (row.length !== dim) {
      throw new Error(`${label}[${r}]: expected dim ${dim}, got ${row.length}`);
    }
    let sq = 0;
    for (const x of row) sq += x * x;
    const norm = Math.sqrt(sq);
    if (!(norm > 0)) {
      throw new Error(`${label}[${r}]: cannot normalize zero row`);
    }
    for (let d = 0; d < dim; d++) {
      buf.writeFloatLE(row[d] / norm, (r * dim + d) * 4);
    }
  });
  return buf;
}

export function writeManifest(dir: string, payload: ManifestPayload): string {
  mkdirSync(dir, { recursive: true });
  const doc = {
    dim: payload.dim,
    fps: payload.fps,
    embedder: payload.embedder,
    ego: payload.ego,
    exo: payload.exo,
    queries: payload.queries,
  };
  writeFileSync(join(dir, "manifest.json"), JSON.stringify(doc, null, 2) + "\n");
  writeFileSync(join(dir, "ego.f32"), rowsToF32(payload.egoRows, payload.dim, "ego"));
  writeFileSync(join(dir, "exo.f32"), rowsToF32(payload.exoRows, payload.dim, "exo"));
  writeFileSync(
    join(dir, "queries.f32"),
    rowsToF32(payload.queryRows, payload.dim, "queries")
  );
  return dir;
}
