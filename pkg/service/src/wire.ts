/**
 * Wire protocol types. All four endpoints take and return UTF-8 JSON;
 * failures return a non-2xx status with {"error": string}.
 */

export interface GenerateRequest {
  text: string;
  relation: string;
}

export interface GenerateResponse {
  reaction: string;
}

export interface EmbedRequest {
  texts: string[];
}

export interface EmbedResponse {
  vectors: number[][];
  dim: number;
}

export interface PolarityRequest {
  text: string;
}

export interface PolarityResponse {
  label: "POSITIVE" | "NEGATIVE";
  confidence: number;
}

export type DecodeSpec = { mode: "greedy" } | { mode: "sampled"; seed: number };

export interface CompleteRequest {
  instruction: string;
  decode: DecodeSpec;
}

export interface CompleteResponse {
  output: string;
}

export interface ErrorResponse {
  error: string;
}

/** Thrown by model code for requests that fail validation (maps to 400). */
export class BadRequestError extends Error {}

export function requireNonEmptyString(value: unknown, name: string): string {
  if (typeof value !== "string" || value.trim().length === 0) {
    throw new BadRequestError(`${name} must be a nonempty string`);
  }
  return value.trim();
}
