/**
 * ffmpeg-backed decoding for containers the built-in y4m reader cannot
 * handle. Frames come back as fixed-size grayscale rasters already sampled
 * at the requested rate.
 */

import { spawnSync } from "node:child_process";

import { DecodeFailure } from "./errors.js";
import type { GrayFrame } from "./y4m.js";

export const FFMPEG_RASTER = 64; // decoded frame side length in pixels

function runOrThrow(cmd: string, args: string[], what: string): Buffer {
  const proc = spawnSync(cmd, args, { maxBuffer: 1 << 30 });
  if (proc.error) {
    throw new DecodeFailure(
      `${what}: could not run ${cmd} (${proc.error.message}); ` +
        "install ffmpeg or supply .y4m input"
    );
  }
  if (proc.status !== 0) {
    const stderr = proc.stderr?.toString("utf8").trim().split("\n").pop() ?? "";
    throw new DecodeFailure(`${what}: ${cmd} exited ${proc.status}: ${stderr}`);
  }
  return proc.stdout;
}

export function probeDuration(path: string): number {
  const out = runOrThrow(
    "ffprobe",
    [
      "-v", "error",
      "-show_entries", "format=duration",
      "-of", "json",
      path,
    ],
    `probe ${path}`
  );
  let duration = NaN;
  try {
    duration = Number(JSON.parse(out.toString("utf8")).format?.duration);
  } catch {
    /* fall through to the validity check */
  }
  if (!Number.isFinite(duration) || duration <= 0) {
    throw new DecodeFailure(`probe ${path}: no usable duration`);
  }
  return duration;
}

/** Decode `path` at `fps`, returning floor(duration*fps) grayscale frames. */
export function decodeWithFfmpeg(path: string, fps: number): GrayFrame[] {
  const duration = probeDuration(path);
  const out = runOrThrow(
    "ffmpeg",
    [
      "-v", "error",
      "-i", path,
      "-vf", `fps=${fps},scale=${FFMPEG_RASTER}:${FFMPEG_RASTER}`,
      "-f", "rawvideo",
      "-pix_fmt", "gray",
      "-",
    ],
    `decode ${path}`
  );
  const frameBytes = FFMPEG_RASTER * FFMPEG_RASTER;
  const available = Math.floor(out.length / frameBytes);
  const wanted = Math.floor(duration * fps);
  if (available === 0 || wanted === 0) {
    throw new DecodeFailure(`decode ${path}: produced no frames at ${fps} fps`);
  }
  const count = Math.min(available, wanted);
  const frames: GrayFrame[] = [];
  for (let i = 0; i < count; i++) {
    frames.push({
      width: FFMPEG_RASTER,
      height: FFMPEG_RASTER,
      pixels: Uint8Array.from(
        out.subarray(i * frameBytes, (i + 1) * frameBytes)
      ),
      timestamp: i / fps,
    });
  }
  return frames;
}
