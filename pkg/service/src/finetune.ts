/**
 * Fine-tuning driver for blend files.
 *
 * The job validates the training file against the blend schema before a
 * single training step runs, then performs seeded SGD on the low-rank
 * adapter with next-token loss over response tokens only. It writes the
 * adapter artifact plus a per-step loss log, and the completion route
 * can serve the adapter afterwards.
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import { parseBlendFile, type BlendRecord } from "./blendSchema.js";
import { BigramLM, mulberry32, tokenize, SPECIAL_TOKENS } from "./lm.js";

export interface FinetuneJob {
  blendPath: string;
  adapterPath: string;
  lossLogPath: string;
  rank?: number;
  learningRate?: number;
  epochs?: number;
  seed?: number;
  baseSeed?: number;
}

export interface LossLogEntry {
  step: number;
  epoch: number;
  record_id: string;
  loss: number; // mean masked loss per target token
  masked_tokens: number;
}

export interface FinetuneResult {
  model: BigramLM;
  log: LossLogEntry[];
  vocabSize: number;
  records: number;
}

export function buildVocabulary(records: BlendRecord[]): string[] {
  const words = new Set<string>();
  for (const record of records) {
    for (const w of tokenize(record.instruction)) words.add(w);
    for (const w of tokenize(record.response)) words.add(w);
  }
  for (const special of SPECIAL_TOKENS) words.delete(special);
  return [...words].sort();
}

export function runFinetune(job: FinetuneJob): FinetuneResult {
  const {
    rank = 4,
    learningRate = 0.05,
    epochs = 1,
    seed = 7,
    baseSeed = 1234,
  } = job;
  if (epochs < 1) throw new Error("epochs must be >= 1");

  // schema gate: invalid files never reach a training step
  const records = parseBlendFile(readFileSync(job.blendPath, "utf8"));

  const model = new BigramLM(buildVocabulary(records), baseSeed, rank);
  const rng = mulberry32(seed);
  const log: LossLogEntry[] = [];
  let step = 0;
  for (let epoch = 1; epoch <= epochs; epoch++) {
    const order = records.map((_, i) => i);
    for (let i = order.length - 1; i > 0; i--) { // Fisher-Yates with the job RNG
      const j = Math.floor(rng() * (i + 1));
      [order[i], order[j]] = [order[j], order[i]];
    }
    for (const idx of order) {
      const record = records[idx];
      const encoded = model.encode(record.instruction, record.response);
      const { loss, tokens } = model.trainStep(encoded, learningRate);
      step += 1;
      log.push({
        step,
        epoch,
        record_id: record.record_id,
        loss: tokens > 0 ? loss / tokens : 0,
        masked_tokens: tokens,
      });
    }
  }

  mkdirSync(dirname(job.adapterPath), { recursive: true });
  writeFileSync(job.adapterPath, JSON.stringify(model.toAdapterArtifact()) + "\n", "utf8");
  mkdirSync(dirname(job.lossLogPath), { recursive: true });
  writeFileSync(job.lossLogPath,
    log.map((entry) => JSON.stringify(entry)).join("\n") + "\n", "utf8");
  return { model, log, vocabSize: model.vocabSize, records: records.length };
}
