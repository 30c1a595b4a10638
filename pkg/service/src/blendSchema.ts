/**
 * Validator for blend training files: line-delimited instruction records
 * with fields record_id, source ("ecpe" | "causal"), instruction,
 * response, and an optional meta object. A training job refuses the file
 * before any training step if a single line is out of shape.
 */

export interface BlendRecord {
  record_id: string;
  source: "ecpe" | "causal";
  instruction: string;
  response: string;
  meta?: Record<string, unknown>;
}

export class BlendSchemaError extends Error {
  constructor(readonly lineNo: number, reason: string) {
    super(`line ${lineNo}: ${reason}`);
  }
}

function isNonEmptyString(value: unknown): value is string {
  return typeof value === "string" && value.trim().length > 0;
}

export function parseBlendFile(text: string): BlendRecord[] {
  const records: BlendRecord[] = [];
  const seen = new Set<string>();
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    const lineNo = i + 1;
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch {
      throw new BlendSchemaError(lineNo, "not valid JSON");
    }
    if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
      throw new BlendSchemaError(lineNo, "record is not an object");
    }
    const record = obj as Record<string, unknown>;
    if (!isNonEmptyString(record.record_id)) {
      throw new BlendSchemaError(lineNo, "record_id must be a nonempty string");
    }
    if (record.source !== "ecpe" && record.source !== "causal") {
      throw new BlendSchemaError(lineNo, "source must be 'ecpe' or 'causal'");
    }
    if (!isNonEmptyString(record.instruction)) {
      throw new BlendSchemaError(lineNo, "instruction must be a nonempty string");
    }
    if (!isNonEmptyString(record.response)) {
      throw new BlendSchemaError(lineNo, "response must be a nonempty string");
    }
    if (record.meta !== undefined
        && (typeof record.meta !== "object" || record.meta === null || Array.isArray(record.meta))) {
      throw new BlendSchemaError(lineNo, "meta must be an object when present");
    }
    if (seen.has(record.record_id)) {
      throw new BlendSchemaError(lineNo, `duplicate record_id ${JSON.stringify(record.record_id)}`);
    }
    seen.add(record.record_id);
    records.push({
      record_id: record.record_id,
      source: record.source,
      instruction: record.instruction,
      response: record.response,
      meta: record.meta as Record<string, unknown> | undefined,
    });
  }
  if (records.length === 0) {
    throw new BlendSchemaError(0, "blend file contains no records");
  }
  return records;
}
