/** Synthetic YUV4MPEG2 clips for tests: moving-bar luma so frames differ. */

export interface ClipSpec {
  width?: number;
  height?: number;
  frames: number;
  fpsNum?: number;
  fpsDen?: number;
  colorspace?: string;
  seed?: number;
}

export function makeY4mClip(spec: ClipSpec): Buffer {
  const width = spec.width ?? 32;
  const height = spec.height ?? 24;
  const fpsNum = spec.fpsNum ?? 4;
  const fpsDen = spec.fpsDen ?? 1;
  const colorspace = spec.colorspace ?? "C420jpeg";
  const seed = spec.seed ?? 0;

  const header = Buffer.from(
    `YUV4MPEG2 W${width} H${height} F${fpsNum}:${fpsDen} Ip A1:1 ${colorspace}\n`,
    "ascii"
  );
  const lumaSize = width * height;
  const chromaSize = colorspace.startsWith("C420")
    ? lumaSize / 2
    : colorspace.startsWith("C422")
      ? lumaSize
      : colorspace.startsWith("C444")
        ? lumaSize * 2
        : 0; // Cmono

  const parts: Buffer[] = [header];
  for (let f = 0; f < spec.frames; f++) {
    parts.push(Buffer.from("FRAME\n", "ascii"));
    const luma = Buffer.alloc(lumaSize);
    const bar = (f * 3 + seed) % width;
    for (let y = 0; y < height; y++) {
      for (let x = 0; x < width; x++) {
        const base = ((x + y + seed * 7) % 17) * 12;
        luma[y * width + x] = Math.abs(x - bar) < 3 ? 255 : base;
      }
    }
    parts.push(luma);
    if (chromaSize > 0) {
      parts.push(Buffer.alloc(chromaSize, 128));
    }
  }
  return Buffer.concat(parts);
}
