#!/usr/bin/env node
/**
 * embed-exporter export --corpus PATH --model NAME --out PATH [--batch 32] [--normalize]
 *
 * Reads a context-level corpus (JSON Lines) and writes one embedding per
 * context, in input order:
 *
 *     {"context_id": "...", "vector": [...]}
 *
 * Exit codes: 0 success, 1 data error (bad corpus, unknown model),
 * 2 usage error.
 */

import * as fs from "fs";
import { CorpusError, parseCorpus, windowText } from "./corpus";
import { createEmbedder } from "./embedder";

const USAGE =
  "usage: embed-exporter export --corpus PATH --model NAME --out PATH [--batch 32] [--normalize]";

interface Args {
  corpus: string;
  model: string;
  out: string;
  batch: number;
  normalize: boolean;
}

function parseArgs(argv: string[]): Args | null {
  if (argv[0] !== "export") {
    console.error(USAGE);
    return null;
  }
  let corpus = "";
  let model = "";
  let out = "";
  let batch = 32;
  let normalize = false;
  for (let i = 1; i < argv.length; i++) {
    const flag = argv[i];
    if (flag === "--normalize") {
      normalize = true;
      continue;
    }
    const value = argv[i + 1];
    if (value === undefined) {
      console.error(`${flag} needs a value\n${USAGE}`);
      return null;
    }
    if (flag === "--corpus") corpus = value;
    else if (flag === "--model") model = value;
    else if (flag === "--out") out = value;
    else if (flag === "--batch") {
      batch = Number(value);
      if (!Number.isInteger(batch) || batch < 1) {
        console.error(`--batch must be a positive integer, got ${value}`);
        return null;
      }
    } else {
      console.error(`unknown flag ${flag}\n${USAGE}`);
      return null;
    }
    i++;
  }
  if (!corpus || !model || !out) {
    console.error(`--corpus, --model, and --out are required\n${USAGE}`);
    return null;
  }
  return { corpus, model, out, batch, normalize };
}

export function main(argv: string[]): number {
  const args = parseArgs(argv);
  if (args === null) return 2;
  try {
    const contexts = parseCorpus(fs.readFileSync(args.corpus, "utf8"));
    const embedder = createEmbedder(args.model, args.normalize);
    const lines: string[] = [];
    for (let start = 0; start < contexts.length; start += args.batch) {
      const chunk = contexts.slice(start, start + args.batch);
      const vectors = embedder.embedBatch(chunk.map(windowText));
      for (let k = 0; k < chunk.length; k++) {
        lines.push(JSON.stringify({ context_id: chunk[k].contextId, vector: vectors[k] }));
      }
    }
    fs.writeFileSync(args.out, lines.length ? lines.join("\n") + "\n" : "");
    console.error(
      `wrote ${args.out} (${contexts.length} contexts, dimension ${embedder.dimension})`,
    );
    return 0;
  } catch (err) {
    if (err instanceof CorpusError || err instanceof Error) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
