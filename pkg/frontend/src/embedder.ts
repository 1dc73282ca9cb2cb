/**
 * Sentence embedders behind a tiny registry. The default is a hashed
 * random projection: each token deterministically owns a +/-1 pattern
 * over the output dimensions, and a text embeds as the mean of its token
 * patterns (mean pooling). No weights to download, fully reproducible,
 * and linear in the token counts, which keeps the vectors trainable by a
 * linear head downstream.
 */

export interface Embedder {
  readonly name: string;
  readonly dimension: number;
  embedBatch(texts: string[]): number[][];
}

const FNV_OFFSET = 0xcbf29ce484222325n;
const FNV_PRIME = 0x100000001b3n;
const MASK64 = (1n << 64n) - 1n;

export function fnv1a64(data: string, seed = 0n): bigint {
  let h = (FNV_OFFSET ^ seed) & MASK64;
  for (const byte of Buffer.from(data, "utf8")) {
    h ^= BigInt(byte);
    h = (h * FNV_PRIME) & MASK64;
  }
  return h;
}

// splitmix64: standard 64-bit mixer, used to stretch one token hash into
// a stream of per-dimension bits.
function mix(x: bigint): bigint {
  let z = (x + 0x9e3779b97f4a7c15n) & MASK64;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
  return (z ^ (z >> 31n)) & MASK64;
}

function l2normalize(vec: number[]): number[] {
  const norm = Math.sqrt(vec.reduce((s, v) => s + v * v, 0) || 1);
  return vec.map((v) => v / norm);
}

export class HashedProjectionEmbedder implements Embedder {
  readonly name = "hashed-projection";
  readonly dimension: number;
  private readonly seed: bigint;
  private readonly normalize: boolean;
  private readonly patterns = new Map<string, Float64Array>();

  constructor(dimension = 64, seed = 0n, normalize = false) {
    if (!Number.isInteger(dimension) || dimension < 1) {
      throw new Error(`dimension must be a positive integer, got ${dimension}`);
    }
    this.dimension = dimension;
    this.seed = seed;
    this.normalize = normalize;
  }

  private pattern(token: string): Float64Array {
    let pat = this.patterns.get(token);
    if (!pat) {
      pat = new Float64Array(this.dimension);
      let state = fnv1a64(token, this.seed);
      for (let j = 0; j < this.dimension; j++) {
        state = mix(state);
        pat[j] = (state & 1n) === 1n ? 1 : -1;
      }
      this.patterns.set(token, pat);
    }
    return pat;
  }

  embedText(text: string): number[] {
    const tokens = text.toLowerCase().split(/\s+/).filter((t) => t.length > 0);
    const vec = new Float64Array(this.dimension);
    for (const token of tokens) {
      const pat = this.pattern(token);
      for (let j = 0; j < this.dimension; j++) vec[j] += pat[j];
    }
    const scale = 1 / (tokens.length || 1);
    const out = Array.from(vec, (v) => v * scale);
    return this.normalize ? l2normalize(out) : out;
  }

  embedBatch(texts: string[]): number[][] {
    return texts.map((text) => this.embedText(text));
  }
}

export function createEmbedder(model: string, normalize: boolean): Embedder {
  if (model === "hashed-projection") {
    return new HashedProjectionEmbedder(64, 0n, normalize);
  }
  throw new Error(`unknown model ${JSON.stringify(model)}; available: hashed-projection`);
}
