/**
 * Context-level corpus reading: JSON Lines, one chat context per line.
 * The exporter only needs the id and the window's texts and speakers;
 * other fields pass through unexamined.
 */

export interface Context {
  contextId: string;
  texts: string[];
  speakers: string[];
}

export class CorpusError extends Error {}

function isStringArray(value: unknown): value is string[] {
  return Array.isArray(value) && value.every((v) => typeof v === "string");
}

/** Parse corpus file content, preserving input order. Errors name the line. */
export function parseCorpus(content: string): Context[] {
  const contexts: Context[] = [];
  const lines = content.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    const lineno = i + 1;
    let record: unknown;
    try {
      record = JSON.parse(line);
    } catch {
      throw new CorpusError(`line ${lineno}: invalid JSON`);
    }
    if (typeof record !== "object" || record === null || Array.isArray(record)) {
      throw new CorpusError(`line ${lineno}: expected a JSON object`);
    }
    const rec = record as Record<string, unknown>;
    if (typeof rec.context_id !== "string" || !rec.context_id) {
      throw new CorpusError(`line ${lineno}: missing context_id`);
    }
    if (!("texts" in rec)) {
      throw new CorpusError(`line ${lineno}: missing texts`);
    }
    if (!isStringArray(rec.texts) || rec.texts.length === 0) {
      throw new CorpusError(`line ${lineno}: texts must be a non-empty array of strings`);
    }
    if (!("speakers" in rec)) {
      throw new CorpusError(`line ${lineno}: missing speakers`);
    }
    if (!isStringArray(rec.speakers) || rec.speakers.length !== rec.texts.length) {
      throw new CorpusError(
        `line ${lineno}: speakers must be an array of strings matching texts in length`,
      );
    }
    contexts.push({ contextId: rec.context_id, texts: rec.texts, speakers: rec.speakers });
  }
  return contexts;
}

/**
 * The surface text of a context window: "speaker: text" lines joined with
 * newlines, matching what the downstream feature extractor hashes.
 */
export function windowText(ctx: Context): string {
  return ctx.texts.map((text, i) => `${ctx.speakers[i]}: ${text}`).join("\n");
}
