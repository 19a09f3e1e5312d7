/**
 * Embedding backends. `hash` is a fully local deterministic baseline
 * (luma-grid / character-trigram features through a fixed random projection)
 * so extraction can run and be tested with no model downloads; `clip` loads a
 * contrastive image-text model through transformers.js when it is installed.
 */

import { EmbedderUnavailable } from "./errors.js";
import type { GrayFrame } from "./y4m.js";

export interface Embedder {
  readonly id: string;
  readonly dim: number;
  embedImage(frame: GrayFrame): Promise<Float64Array>;
  embedText(text: string): Promise<Float64Array>;
}

export const FEATURE_BUCKETS = 256;
const GRID = 16; // GRID*GRID === FEATURE_BUCKETS

/** Deterministic float PRNG (mulberry32). */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

function l2Normalize(v: Float64Array): Float64Array {
  let sq = 0;
  for (const x of v) sq += x * x;
  const norm = Math.sqrt(sq);
  if (norm < 1e-9) {
    // degenerate feature vector (e.g. an all-black frame): pin to a basis
    const out = new Float64Array(v.length);
    out[0] = 1;
    return out;
  }
  return v.map((x) => x / norm) as Float64Array;
}

export class HashEmbedder implements Embedder {
  readonly id: string;
  readonly dim: number;
  private readonly projection: Float64Array; // dim x FEATURE_BUCKETS

  constructor(dim = 64) {
    if (!Number.isInteger(dim) || dim < 2) {
      throw new EmbedderUnavailable(`hash embedder dim must be >= 2, got ${dim}`);
    }
    this.dim = dim;
    this.id = `hash-v1-${dim}`;
    const rand = mulberry32(0x5eedf00d ^ dim);
    this.projection = new Float64Array(dim * FEATURE_BUCKETS);
    for (let i = 0; i < this.projection.length; i++) {
      // approximate standard normal from 4 uniforms
      this.projection[i] =
        (rand() + rand() + rand() + rand() - 2.0) * Math.sqrt(3.0);
    }
  }

  private project(features: Float64Array): Float64Array {
    const out = new Float64Array(this.dim);
    for (let d = 0; d < this.dim; d++) {
      const row = d * FEATURE_BUCKETS;
      let acc = 0;
      for (let j = 0; j < FEATURE_BUCKETS; j++) {
        acc += this.projection[row + j] * features[j];
      }
      out[d] = acc;
    }
    return l2Normalize(out);
  }

  async embedImage(frame: GrayFrame): Promise<Float64Array> {
    // mean luma over a GRID x GRID partition of the frame
    const features = new Float64Array(FEATURE_BUCKETS);
    const counts = new Float64Array(FEATURE_BUCKETS);
    for (let y = 0; y < frame.height; y++) {
      const gy = Math.min(GRID - 1, Math.floor((y * GRID) / frame.height));
      for (let x = 0; x < frame.width; x++) {
        const gx = Math.min(GRID - 1, Math.floor((x * GRID) / frame.width));
        const bucket = gy * GRID + gx;
        features[bucket] += frame.pixels[y * frame.width + x] / 255;
        counts[bucket] += 1;
      }
    }
    for (let j = 0; j < FEATURE_BUCKETS; j++) {
      if (counts[j] > 0) features[j] /= counts[j];
    }
    return this.project(features);
  }

  async embedText(text: string): Promise<Float64Array> {
    // signed character-trigram feature hashing
    const features = new Float64Array(FEATURE_BUCKETS);
    const padded = `  ${text.toLowerCase().trim()}  `;
    for (let i = 0; i + 3 <= padded.length; i++) {
      const h = fnv1a(padded.slice(i, i + 3));
      const bucket = h % FEATURE_BUCKETS;
      const sign = (h >>> 8) & 1 ? 1 : -1;
      features[bucket] += sign;
    }
    return this.project(features);
  }
}

export class ClipEmbedder implements Embedder {
  readonly id: string;
  readonly dim: number;

  private constructor(
    id: string,
    dim: number,
    private readonly backend: {
      embedImage(frame: GrayFrame): Promise<Float64Array>;
      embedText(text: string): Promise<Float64Array>;
    }
  ) {
    this.id = id;
    this.dim = dim;
  }

  static async create(model = "Xenova/clip-vit-base-patch32"): Promise<ClipEmbedder> {
    const specifier = "@xenova/transformers";
    let t: any;
    try {
      t = await import(specifier);
    } catch (err) {
      throw new EmbedderUnavailable(
        `cannot load ${specifier} (${(err as Error).message}); ` +
          "install it for --embedder clip, or use --embedder hash"
      );
    }
    try {
      const tokenizer = await t.AutoTokenizer.from_pretrained(model);
      const processor = await t.AutoProcessor.from_pretrained(model);
      const textModel = await t.CLIPTextModelWithProjection.from_pretrained(model);
      const visionModel = await t.CLIPVisionModelWithProjection.from_pretrained(model);
      const dim = textModel.config.projection_dim ?? 512;
      const backend = {
        async embedImage(frame: GrayFrame): Promise<Float64Array> {
          // expand luma to RGBA, as transformers.js RawImage expects
          const rgba = new Uint8ClampedArray(frame.width * frame.height * 4);
          for (let i = 0; i < frame.pixels.length; i++) {
            const v = frame.pixels[i];
            rgba.set([v, v, v, 255], i * 4);
          }
          const image = new t.RawImage(rgba, frame.width, frame.height, 4);
          const inputs = await processor(image);
          const { image_embeds } = await visionModel(inputs);
          return l2Normalize(Float64Array.from(image_embeds.data));
        },
        async embedText(text: string): Promise<Float64Array> {
          const inputs = tokenizer([text], { padding: true, truncation: true });
          const { text_embeds } = await textModel(inputs);
          return l2Normalize(Float64Array.from(text_embeds.data));
        },
      };
      return new ClipEmbedder(`clip:${model}`, dim, backend);
    } catch (err) {
      throw new EmbedderUnavailable(
        `failed to load CLIP model ${model}: ${(err as Error).message}`
      );
    }
  }

  embedImage(frame: GrayFrame): Promise<Float64Array> {
    return this.backend.embedImage(frame);
  }

  embedText(text: string): Promise<Float64Array> {
    return this.backend.embedText(text);
  }
}

export async function createEmbedder(
  kind: string,
  options: { dim?: number; clipModel?: string } = {}
): Promise<Embedder> {
  if (kind === "hash") return new HashEmbedder(options.dim ?? 64);
  if (kind === "clip") return ClipEmbedder.create(options.clipModel);
  throw new EmbedderUnavailable(`unknown embedder "${kind}" (use hash or clip)`);
}
