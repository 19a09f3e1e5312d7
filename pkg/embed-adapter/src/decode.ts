/**
 * Container-agnostic frame sampling: .y4m decodes natively, everything else
 * goes through ffmpeg. Either way the result is floor(duration*fps) frames
 * with timestamps taken from the decode clock.
 */

import { existsSync, readFileSync } from "node:fs";

import { decodeWithFfmpeg } from "./ffmpeg.js";
import { DecodeFailure } from "./errors.js";
import { parseY4m, type GrayFrame } from "./y4m.js";

export function sampleFramesAtFps(path: string, fps: number): GrayFrame[] {
  if (!existsSync(path)) {
    throw new DecodeFailure(`${path} does not exist`);
  }
  if (path.toLowerCase().endsWith(".y4m")) {
    const video = parseY4m(readFileSync(path));
    const count = Math.floor(video.duration * fps);
    if (count === 0) {
      throw new DecodeFailure(`${path}: shorter than one sample at ${fps} fps`);
    }
    const sampled: GrayFrame[] = [];
    for (let i = 0; i < count; i++) {
      const target = i / fps;
      const src = Math.min(
        video.frames.length - 1,
        Math.round(target * video.fps)
      );
      // keep the chosen source frame's own timestamp (decode clock)
      sampled.push(video.frames[src]);
    }
    return sampled;
  }
  return decodeWithFfmpeg(path, fps);
}
