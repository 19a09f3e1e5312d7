import { spawnSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { beforeAll, describe, expect, it } from "vitest";

import { main as cliMain } from "../src/cli.js";
import { DecodeFailure, InvalidJob } from "../src/errors.js";
import { runExtract } from "../src/extract.js";
import { makeY4mClip } from "./helpers.js";

let workDir: string;
let egoClip: string;
let exoClip: string;
let questions: string;

beforeAll(() => {
  workDir = mkdtempSync(join(tmpdir(), "embed-adapter-"));
  egoClip = join(workDir, "ego.y4m");
  exoClip = join(workDir, "exo.y4m");
  questions = join(workDir, "questions.txt");
  // two 10 s clips at 4 fps source rate
  writeFileSync(egoClip, makeY4mClip({ frames: 40, fpsNum: 4, seed: 1 }));
  writeFileSync(exoClip, makeY4mClip({ frames: 40, fpsNum: 4, seed: 2 }));
  writeFileSync(questions, "where is the mug\nwho opened the fridge\n\n");
});

function readManifest(dir: string) {
  return JSON.parse(readFileSync(join(dir, "manifest.json"), "utf8"));
}

function readRows(dir: string, name: string, count: number, dim: number): number[][] {
  const buf = readFileSync(join(dir, name));
  expect(buf.length).toBe(count * dim * 4);
  const rows: number[][] = [];
  for (let r = 0; r < count; r++) {
    const row: number[] = [];
    for (let d = 0; d < dim; d++) {
      row.push(buf.readFloatLE((r * dim + d) * 4));
    }
    rows.push(row);
  }
  return rows;
}

describe("runExtract", () => {
  it("writes floor(duration*fps) records per view and one row per question", async () => {
    const out = join(workDir, "manifest-1fps");
    const result = await runExtract({
      egoVideo: egoClip,
      exoVideo: exoClip,
      fps: 1.0,
      questionsFile: questions,
      outDir: out,
      embedder: "hash",
      dim: 32,
    });
    expect(result.nEgo).toBe(10); // floor(10 s * 1 fps)
    expect(result.nExo).toBe(10);
    expect(result.nQueries).toBe(2);

    const doc = readManifest(out);
    expect(doc.dim).toBe(32);
    expect(doc.fps).toBe(1.0);
    expect(doc.embedder).toBe("hash-v1-32");
    expect(doc.ego).toHaveLength(10);
    expect(doc.queries.map((q: { id: string }) => q.id)).toEqual(["q0", "q1"]);
    expect(doc.ego.map((f: { index: number }) => f.index)).toEqual(
      [...Array(10).keys()]
    );
    // decode-clock timestamps: sampling 1 fps from a 4 fps source
    expect(doc.ego[3].timestamp).toBeCloseTo(3.0, 9);

    for (const [name, count] of [["ego.f32", 10], ["exo.f32", 10], ["queries.f32", 2]] as const) {
      for (const row of readRows(out, name, count, 32)) {
        const norm = Math.sqrt(row.reduce((acc, x) => acc + x * x, 0));
        expect(Math.abs(norm - 1)).toBeLessThan(1e-6);
      }
    }
  });

  it("honors fractional fps", async () => {
    const out = join(workDir, "manifest-halffps");
    const result = await runExtract({
      egoVideo: egoClip,
      exoVideo: exoClip,
      fps: 0.5,
      questionsFile: questions,
      outDir: out,
      embedder: "hash",
      dim: 16,
    });
    expect(result.nEgo).toBe(5); // floor(10 s * 0.5 fps)
    expect(readManifest(out).ego[1].timestamp).toBeCloseTo(2.0, 9);
  });

  it("rejects corrupt video with DecodeFailure", async () => {
    const corrupt = join(workDir, "corrupt.y4m");
    writeFileSync(corrupt, Buffer.from("YUV4MPEG2 W32 H24\nFRAMEgarbage"));
    await expect(
      runExtract({
        egoVideo: corrupt,
        exoVideo: exoClip,
        fps: 1.0,
        questionsFile: questions,
        outDir: join(workDir, "never"),
        embedder: "hash",
      })
    ).rejects.toThrow(DecodeFailure);
  });

  it("rejects bad job parameters", async () => {
    await expect(
      runExtract({
        egoVideo: join(workDir, "missing.y4m"),
        exoVideo: exoClip,
        fps: 1.0,
        questionsFile: questions,
        outDir: join(workDir, "never"),
        embedder: "hash",
      })
    ).rejects.toThrow(InvalidJob);
    await expect(
      runExtract({
        egoVideo: egoClip,
        exoVideo: exoClip,
        fps: 0,
        questionsFile: questions,
        outDir: join(workDir, "never"),
        embedder: "hash",
      })
    ).rejects.toThrow(InvalidJob);
  });
});

describe("cli", () => {
  it("extract exits 0 and writes the manifest", async () => {
    const out = join(workDir, "manifest-cli");
    const code = await cliMain([
      "extract",
      "--ego", egoClip,
      "--exo", exoClip,
      "--fps", "1",
      "--questions", questions,
      "--out", out,
      "--embedder", "hash",
      "--dim", "24",
    ]);
    expect(code).toBe(0);
    expect(readManifest(out).dim).toBe(24);
  });

  it("unknown command exits 1", async () => {
    expect(await cliMain(["transmogrify"])).toBe(1);
  });

  it("decode failure surfaces as exit 1", async () => {
    const corrupt = join(workDir, "corrupt2.y4m");
    writeFileSync(corrupt, Buffer.from("junk"));
    const code = await cliMain([
      "extract",
      "--ego", corrupt,
      "--exo", exoClip,
      "--questions", questions,
      "--out", join(workDir, "never2"),
      "--embedder", "hash",
    ]);
    expect(code).toBe(1);
  });
});

describe("conformance with the selection pipeline", () => {
  it("extract output loads and selects through the dppselect CLI", async () => {
    const out = join(workDir, "manifest-conf");
    await runExtract({
      egoVideo: egoClip,
      exoVideo: exoClip,
      fps: 1.0,
      questionsFile: questions,
      outDir: out,
      embedder: "hash",
      dim: 32,
    });
    const selDir = join(workDir, "selections");
    const proc = spawnSync(
      "python3",
      [
        "-m", "dppselect.cli", "select",
        "--manifest", out,
        "--budget", "6",
        "--mode", "soft",
        "--sampler", "exact",
        "--seed", "1",
        "--out", selDir,
        "--no-figures",
      ],
      { encoding: "utf8" }
    );
    expect(proc.status, proc.stderr).toBe(0);
    const selections = JSON.parse(
      readFileSync(join(selDir, "selections.json"), "utf8")
    );
    expect(selections.selections).toHaveLength(2);
    for (const record of selections.selections) {
      expect(record.frames).toHaveLength(6);
    }
    expect(existsSync(join(selDir, "summary.tsv"))).toBe(true);
  }, 30_000);
});
