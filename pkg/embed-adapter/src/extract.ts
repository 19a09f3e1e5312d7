/**
 * The extraction job: decode both views at the target FPS, embed frames and
 * question text, and write a manifest the selection pipeline can load.
 */

import { existsSync, readFileSync } from "node:fs";

import { sampleFramesAtFps } from "./decode.js";
import { createEmbedder, type Embedder } from "./embedders.js";
import { InvalidJob } from "./errors.js";
import { writeManifest, type FrameMeta, type QueryMeta } from "./manifest.js";
import type { GrayFrame } from "./y4m.js";

export interface ExtractJob {
  egoVideo: string;
  exoVideo: string;
  fps: number;
  questionsFile: string;
  outDir: string;
  embedder: string; // "hash" | "clip"
  dim?: number; // hash embedder only
  clipModel?: string;
}

export interface ExtractResult {
  outDir: string;
  nEgo: number;
  nExo: number;
  nQueries: number;
  embedderId: string;
}

function readQuestions(path: string): QueryMeta[] {
  if (!existsSync(path)) {
    throw new InvalidJob(`questions file ${path} does not exist`);
  }
  const lines = readFileSync(path, "utf8")
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
  return lines.map((text, i) => ({ id: `q${i}`, text }));
}

async function embedFrames(
  embedder: Embedder,
  frames: GrayFrame[]
): Promise<{ meta: FrameMeta[]; rows: Float64Array[] }> {
  const meta: FrameMeta[] = [];
  const rows: Float64Array[] = [];
  for (let i = 0; i < frames.length; i++) {
    meta.push({ index: i, timestamp: frames[i].timestamp });
    rows.push(await embedder.embedImage(frames[i]));
  }
  return { meta, rows };
}

export async function runExtract(job: ExtractJob): Promise<ExtractResult> {
  if (!(job.fps > 0)) {
    throw new InvalidJob(`fps must be positive, got ${job.fps}`);
  }
  for (const path of [job.egoVideo, job.exoVideo]) {
    if (!existsSync(path)) {
      throw new InvalidJob(`video ${path} does not exist`);
    }
  }
  const queries = readQuestions(job.questionsFile);
  const embedder = await createEmbedder(job.embedder, {
    dim: job.dim,
    clipModel: job.clipModel,
  });

  const ego = await embedFrames(embedder, sampleFramesAtFps(job.egoVideo, job.fps));
  const exo = await embedFrames(embedder, sampleFramesAtFps(job.exoVideo, job.fps));
  const queryRows: Float64Array[] = [];
  for (const q of queries) {
    queryRows.push(await embedder.embedText(q.text));
  }

  writeManifest(job.outDir, {
    dim: embedder.dim,
    fps: job.fps,
    embedder: embedder.id,
    ego: ego.meta,
    exo: exo.meta,
    queries,
    egoRows: ego.rows,
    exoRows: exo.rows,
    queryRows,
  });
  return {
    outDir: job.outDir,
    nEgo: ego.meta.length,
    nExo: exo.meta.length,
    nQueries: queries.length,
    embedderId: embedder.id,
  };
}
