/**
 * Minimal YUV4MPEG2 (.y4m) reader. Uncompressed and self-describing, so it
 * decodes with no external tooling; only the luma plane is kept since the
 * embedders here work on grayscale.
 */

import { DecodeFailure } from "./errors.js";

export interface GrayFrame {
  width: number;
  height: number;
  /** Row-major luma plane, one byte per pixel. */
  pixels: Uint8Array;
  /** Seconds since stream start, from the container frame rate. */
  timestamp: number;
}

export interface Y4mVideo {
  frames: GrayFrame[];
  width: number;
  height: number;
  /** Source frame rate (frames per second). */
  fps: number;
  /** Total duration in seconds (frameCount / fps). */
  duration: number;
}

const MAGIC = "YUV4MPEG2";

/** Bytes per frame for a given colorspace tag, as a multiple of width*height. */
function planeFactor(colorspace: string): number {
  if (colorspace.startsWith("C420")) return 1.5;
  if (colorspace.startsWith("C422")) return 2;
  if (colorspace.startsWith("C444")) return 3;
  if (colorspace.startsWith("Cmono")) return 1;
  throw new DecodeFailure(`y4m: unsupported colorspace ${colorspace}`);
}

export function parseY4m(data: Buffer): Y4mVideo {
  const headerEnd = data.indexOf(0x0a);
  if (headerEnd < 0) {
    throw new DecodeFailure("y4m: missing stream header");
  }
  const header = data.subarray(0, headerEnd).toString("ascii");
  if (!header.startsWith(MAGIC)) {
    throw new DecodeFailure("y4m: not a YUV4MPEG2 stream");
  }

  let width = 0;
  let height = 0;
  let fpsNum = 0;
  let fpsDen = 1;
  let colorspace = "C420jpeg";
  for (const param of header.slice(MAGIC.length).trim().split(/\s+/)) {
    if (!param) continue;
    const tag = param[0];
    if (tag === "W") width = Number(param.slice(1));
    else if (tag === "H") height = Number(param.slice(1));
    else if (tag === "F") {
      const [num, den] = param.slice(1).split(":").map(Number);
      fpsNum = num;
      fpsDen = den ?? 1;
    } else if (tag === "C") colorspace = param;
  }
  if (!Number.isInteger(width) || width <= 0 || !Number.isInteger(height) || height <= 0) {
    throw new DecodeFailure("y4m: bad or missing frame dimensions");
  }
  if (!(fpsNum > 0) || !(fpsDen > 0)) {
    throw new DecodeFailure("y4m: bad or missing frame rate");
  }
  const lumaSize = width * height;
  const frameSize = Math.ceil(lumaSize * planeFactor(colorspace));
  const fps = fpsNum / fpsDen;

  const frames: GrayFrame[] = [];
  let offset = headerEnd + 1;
  while (offset < data.length) {
    const markerEnd = data.indexOf(0x0a, offset);
    if (markerEnd < 0) {
      throw new DecodeFailure("y4m: truncated frame header");
    }
    const marker = data.subarray(offset, markerEnd).toString("ascii");
    if (!marker.startsWith("FRAME")) {
      throw new DecodeFailure(`y4m: expected FRAME marker, found "${marker.slice(0, 16)}"`);
    }
    const start = markerEnd + 1;
    if (start + frameSize > data.length) {
      throw new DecodeFailure("y4m: truncated frame payload");
    }
    frames.push({
      width,
      height,
      pixels: Uint8Array.from(data.subarray(start, start + lumaSize)),
      timestamp: frames.length * (fpsDen / fpsNum),
    });
    offset = start + frameSize;
  }
  if (frames.length === 0) {
    throw new DecodeFailure("y4m: stream contains no frames");
  }
  return { frames, width, height, fps, duration: frames.length / fps };
}
