#!/usr/bin/env node
/**
 * CLI: `embed-adapter extract --ego v1.y4m --exo v2.y4m --fps 1 \
 *         --questions q.txt --out dir/ [--embedder hash|clip] [--dim 64]`
 */

import { realpathSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { AdapterError } from "./errors.js";
import { runExtract, type ExtractJob } from "./extract.js";

const USAGE = `usage: embed-adapter extract --ego <video> --exo <video> --questions <txt> --out <dir>
                             [--fps 1.0] [--embedder hash|clip] [--dim 64] [--clip-model <id>]`;

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new AdapterError(`bad argument "${key}"\n${USAGE}`);
    }
    flags.set(key.slice(2), value);
  }
  return flags;
}

export async function main(argv: string[]): Promise<number> {
  try {
    if (argv[0] !== "extract") {
      throw new AdapterError(`unknown command "${argv[0] ?? ""}"\n${USAGE}`);
    }
    const flags = parseFlags(argv.slice(1));
    for (const required of ["ego", "exo", "questions", "out"]) {
      if (!flags.has(required)) {
        throw new AdapterError(`missing --${required}\n${USAGE}`);
      }
    }
    const job: ExtractJob = {
      egoVideo: flags.get("ego")!,
      exoVideo: flags.get("exo")!,
      questionsFile: flags.get("questions")!,
      outDir: flags.get("out")!,
      fps: Number(flags.get("fps") ?? "1.0"),
      embedder: flags.get("embedder") ?? "clip",
      dim: flags.has("dim") ? Number(flags.get("dim")) : undefined,
      clipModel: flags.get("clip-model"),
    };
    const result = await runExtract(job);
    console.log(
      `wrote manifest to ${result.outDir} ` +
        `(${result.nEgo} ego + ${result.nExo} exo frames, ` +
        `${result.nQueries} queries, embedder ${result.embedderId})`
    );
    return 0;
  } catch (err) {
    if (err instanceof AdapterError) {
      console.error(`error: ${err.name}: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

function invokedDirectly(): boolean {
  if (!process.argv[1]) return false;
  try {
    return realpathSync(process.argv[1]) === fileURLToPath(import.meta.url);
  } catch {
    return false;
  }
}

if (invokedDirectly()) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
