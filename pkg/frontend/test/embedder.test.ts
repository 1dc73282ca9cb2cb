import { expect, test } from "vitest";
import { HashedProjectionEmbedder, createEmbedder, fnv1a64 } from "../src/embedder";

// Classic FNV-1a 64-bit vectors; the downstream toolkit pins the same ones.
test("fnv1a64 matches the reference vectors", () => {
  expect(fnv1a64("")).toBe(0xcbf29ce484222325n);
  expect(fnv1a64("a")).toBe(0xaf63dc4c8601ec8cn);
  expect(fnv1a64("foobar")).toBe(0x85944171f73967e8n);
});

test("identical inputs embed identically across instances", () => {
  const texts = ["other: hello there", "predator: come closer\nother: why"];
  const a = new HashedProjectionEmbedder().embedBatch(texts);
  const b = new HashedProjectionEmbedder().embedBatch(texts);
  expect(a).toEqual(b);
});

test("dimension is uniform and defaults to 64", () => {
  const vecs = new HashedProjectionEmbedder().embedBatch(["one", "two words", "a b c d"]);
  for (const v of vecs) expect(v).toHaveLength(64);
});

test("mean pooling keeps components in [-1, 1]", () => {
  const vec = new HashedProjectionEmbedder().embedText("one two three four five six");
  for (const v of vec) {
    expect(Math.abs(v)).toBeLessThanOrEqual(1);
  }
});

test("tokenization lowercases and collapses whitespace", () => {
  const e = new HashedProjectionEmbedder();
  expect(e.embedText("Hello   World")).toEqual(e.embedText("hello world"));
});

test("empty text embeds to the zero vector", () => {
  const vec = new HashedProjectionEmbedder().embedText("   ");
  expect(vec.every((v) => v === 0)).toBe(true);
});

test("normalize yields unit norm", () => {
  const e = new HashedProjectionEmbedder(64, 0n, true);
  const vec = e.embedText("some ordinary words here");
  const norm = Math.sqrt(vec.reduce((s, v) => s + v * v, 0));
  expect(norm).toBeCloseTo(1, 12);
});

test("different seeds give different vectors", () => {
  const a = new HashedProjectionEmbedder(64, 0n).embedText("hello world");
  const b = new HashedProjectionEmbedder(64, 1n).embedText("hello world");
  expect(a).not.toEqual(b);
});

test("registry rejects unknown models", () => {
  expect(() => createEmbedder("bert-large", false)).toThrow(/unknown model/);
  expect(createEmbedder("hashed-projection", false).dimension).toBe(64);
});

test("rejects non-positive dimensions", () => {
  expect(() => new HashedProjectionEmbedder(0)).toThrow(/positive integer/);
});
