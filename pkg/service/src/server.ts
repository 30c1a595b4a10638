/**
 * HTTP server exposing the four inference endpoints.
 *
 * Startup refuses a config that leaves any endpoint without a backing
 * model, naming the missing role. Request handling is synchronous per
 * model (node's single-threaded dispatch serializes inference), and each
 * response is paired with its own request, never with arrival order.
 */

import { createServer, type IncomingMessage, type Server, type ServerResponse } from "node:http";
import { existsSync, readFileSync } from "node:fs";

import { CueReactionModel, HashEncoder, LexiconPolarityModel } from "./models.js";
import { BigramLM, type AdapterArtifact } from "./lm.js";
import {
  BadRequestError, requireNonEmptyString,
  type DecodeSpec, type ErrorResponse,
} from "./wire.js";

export interface ServiceConfig {
  port: number;
  models: {
    generator?: { kind: "cue-reaction" };
    embedder?: { kind: "hash-encoder"; dim?: number };
    polarity?: { kind: "lexicon" };
    completion?: { kind: "bigram-lm"; adapterPath?: string };
  };
}

const ROLES = ["generator", "embedder", "polarity", "completion"] as const;

export class ModelService {
  private readonly generator: CueReactionModel;
  private readonly embedder: HashEncoder;
  private readonly polarity: LexiconPolarityModel;
  private readonly completion: BigramLM;

  constructor(config: ServiceConfig) {
    const missing = ROLES.filter((role) => !config.models[role]);
    if (missing.length > 0) {
      throw new Error(`startup failed: no model configured for role(s): ${missing.join(", ")}`);
    }
    this.generator = new CueReactionModel();
    this.embedder = new HashEncoder(config.models.embedder!.dim ?? 64);
    this.polarity = new LexiconPolarityModel();
    const adapterPath = config.models.completion!.adapterPath;
    if (adapterPath) {
      if (!existsSync(adapterPath)) {
        throw new Error(`startup failed: completion adapter not found at ${adapterPath}`);
      }
      const artifact = JSON.parse(readFileSync(adapterPath, "utf8")) as AdapterArtifact;
      this.completion = BigramLM.fromAdapter(artifact);
    } else {
      this.completion = BigramLM.withDefaultVocab();
    }
  }

  /** Transport-free request handler; the HTTP layer is a thin shell around it. */
  dispatch(path: string, body: unknown): { status: number; payload: unknown } {
    try {
      if (typeof body !== "object" || body === null || Array.isArray(body)) {
        return { status: 400, payload: { error: "body must be a JSON object" } };
      }
      const record = body as Record<string, unknown>;
      switch (path) {
        case "/v1/generate": {
          if (record.relation !== "xReact") {
            return { status: 400, payload: { error: "relation must be 'xReact'" } };
          }
          const text = requireNonEmptyString(record.text, "text");
          return { status: 200, payload: { reaction: this.generator.generate(text, "xReact") } };
        }
        case "/v1/embed": {
          if (!Array.isArray(record.texts) || record.texts.length === 0) {
            return { status: 400, payload: { error: "texts must be a nonempty array of strings" } };
          }
          const texts = record.texts.map((t, i) => requireNonEmptyString(t, `texts[${i}]`));
          return {
            status: 200,
            payload: { vectors: this.embedder.embed(texts), dim: this.embedder.dim },
          };
        }
        case "/v1/polarity": {
          const text = requireNonEmptyString(record.text, "text");
          return { status: 200, payload: this.polarity.classify(text) };
        }
        case "/v1/complete": {
          const instruction = requireNonEmptyString(record.instruction, "instruction");
          const decode = record.decode as DecodeSpec | undefined;
          if (!decode || typeof decode !== "object"
              || (decode.mode !== "greedy" && decode.mode !== "sampled")) {
            return {
              status: 400,
              payload: { error: "decode must be {'mode':'greedy'} or {'mode':'sampled','seed':int}" },
            };
          }
          if (decode.mode === "sampled" && !Number.isInteger((decode as { seed?: unknown }).seed)) {
            return { status: 400, payload: { error: "sampled decoding requires an integer seed" } };
          }
          return { status: 200, payload: { output: this.completion.complete(instruction, decode) } };
        }
        default:
          return { status: 404, payload: { error: `unknown endpoint ${path}` } };
      }
    } catch (err) {
      if (err instanceof BadRequestError) {
        return { status: 400, payload: { error: err.message } };
      }
      const message = err instanceof Error ? err.message : String(err);
      return { status: 500, payload: { error: message } satisfies ErrorResponse };
    }
  }
}

function readBody(req: IncomingMessage): Promise<string> {
  return new Promise((resolve, reject) => {
    const chunks: Buffer[] = [];
    req.on("data", (chunk) => chunks.push(chunk));
    req.on("end", () => resolve(Buffer.concat(chunks).toString("utf8")));
    req.on("error", reject);
  });
}

export function createService(config: ServiceConfig): Server {
  const service = new ModelService(config);
  return createServer(async (req: IncomingMessage, res: ServerResponse) => {
    let status: number;
    let payload: unknown;
    if (req.method !== "POST") {
      status = 405;
      payload = { error: "only POST is supported" };
    } else {
      let body: unknown;
      try {
        body = JSON.parse((await readBody(req)) || "null");
      } catch {
        body = undefined;
      }
      if (body === undefined) {
        status = 400;
        payload = { error: "request body must be valid JSON" };
      } else {
        ({ status, payload } = service.dispatch(req.url ?? "/", body));
      }
    }
    const data = JSON.stringify(payload);
    res.writeHead(status, { "Content-Type": "application/json", "Content-Length": Buffer.byteLength(data) });
    res.end(data);
  });
}

export function loadConfig(path: string): ServiceConfig {
  const raw = JSON.parse(readFileSync(path, "utf8")) as Partial<ServiceConfig>;
  return { port: raw.port ?? 8763, models: raw.models ?? {} };
}
