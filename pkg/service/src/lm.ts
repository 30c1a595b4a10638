/**
 * A tiny next-token language model for the completion role and the
 * fine-tuning driver.
 *
 * The model predicts each token from its predecessor through a V x V
 * logit table. The table is a frozen seeded base plus a trainable
 * low-rank update A x B (rank r), so fine-tuning touches only the small
 * adapter matrices and the adapter ships as a standalone artifact.
 *
 * Sequences are laid out as  <bos> instruction <sep> response <eos>.
 * Training loss is next-token cross-entropy summed over positions whose
 * TARGET lies in the response segment; instruction-token labels
 * contribute exactly zero, which is what makes the masked loss invariant
 * to them.
 */

export const BOS = 0;
export const SEP = 1;
export const EOS = 2;
export const UNK = 3;
export const SPECIAL_TOKENS = ["<bos>", "<sep>", "<eos>", "<unk>"];

export function tokenize(text: string): string[] {
  return text.toLowerCase().match(/[a-z0-9']+|[^\sa-z0-9']/g) ?? [];
}

/** Deterministic 32-bit PRNG (mulberry32). */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export interface EncodedRecord {
  /** <bos> instruction <sep> response <eos>, as vocabulary ids. */
  tokens: number[];
  /** Index of <sep>; targets at positions > sepIndex are response tokens. */
  sepIndex: number;
}

export interface AdapterArtifact {
  version: number;
  rank: number;
  baseSeed: number;
  vocab: string[];
  a: number[][];
  b: number[][];
}

const DEFAULT_VOCAB_WORDS =
  `the a an and of to in on for with is was were are it this that document clause
   pairs pair emotion cause answer identify below number numbered form one two
   three four five six seven ( ) , ; . : 1 2 3 4 5 6 7 8 9 0`.split(/\s+/).filter(Boolean);

export class BigramLM {
  readonly vocab: string[];
  private readonly index: Map<string, number>;
  private readonly base: Float64Array; // V x V, frozen
  readonly rank: number;
  readonly baseSeed: number;
  readonly a: Float64Array; // V x r, trainable
  readonly b: Float64Array; // r x V, trainable

  constructor(vocab: string[], baseSeed = 1234, rank = 4) {
    this.vocab = [...SPECIAL_TOKENS, ...vocab.filter((w) => !SPECIAL_TOKENS.includes(w))];
    this.index = new Map(this.vocab.map((w, i) => [w, i]));
    this.rank = rank;
    this.baseSeed = baseSeed;
    const v = this.vocab.length;
    const rng = mulberry32(baseSeed);
    this.base = new Float64Array(v * v);
    for (let i = 0; i < this.base.length; i++) {
      this.base[i] = (rng() - 0.5) * 0.02;
    }
    // adapter starts as an exact zero update: b is zero, a is small random
    const rngA = mulberry32(baseSeed ^ 0x5eed);
    this.a = new Float64Array(v * rank);
    for (let i = 0; i < this.a.length; i++) {
      this.a[i] = (rngA() - 0.5) * 0.2;
    }
    this.b = new Float64Array(rank * v);
  }

  static withDefaultVocab(): BigramLM {
    return new BigramLM(DEFAULT_VOCAB_WORDS);
  }

  static fromAdapter(artifact: AdapterArtifact): BigramLM {
    const model = new BigramLM(
      artifact.vocab.filter((w) => !SPECIAL_TOKENS.includes(w)),
      artifact.baseSeed,
      artifact.rank,
    );
    if (model.vocab.length !== artifact.vocab.length) {
      throw new Error("adapter vocabulary does not round-trip");
    }
    artifact.a.forEach((row, i) => row.forEach((x, j) => { model.a[i * model.rank + j] = x; }));
    artifact.b.forEach((row, i) => row.forEach((x, j) => { model.b[i * model.vocabSize + j] = x; }));
    return model;
  }

  get vocabSize(): number {
    return this.vocab.length;
  }

  tokenId(word: string): number {
    return this.index.get(word) ?? UNK;
  }

  encode(instruction: string, response: string): EncodedRecord {
    const instructionIds = tokenize(instruction).map((w) => this.tokenId(w));
    const responseIds = tokenize(response).map((w) => this.tokenId(w));
    const tokens = [BOS, ...instructionIds, SEP, ...responseIds, EOS];
    return { tokens, sepIndex: 1 + instructionIds.length };
  }

  /** Row of logits for the token following `prev`. */
  logits(prev: number): Float64Array {
    const v = this.vocabSize;
    const row = new Float64Array(v);
    for (let j = 0; j < v; j++) {
      row[j] = this.base[prev * v + j];
    }
    for (let k = 0; k < this.rank; k++) {
      const scale = this.a[prev * this.rank + k];
      if (scale === 0) continue;
      for (let j = 0; j < v; j++) {
        row[j] += scale * this.b[k * v + j];
      }
    }
    return row;
  }

  probabilities(prev: number): Float64Array {
    const row = this.logits(prev);
    let max = -Infinity;
    for (const x of row) max = Math.max(max, x);
    let total = 0;
    const out = new Float64Array(row.length);
    for (let j = 0; j < row.length; j++) {
      out[j] = Math.exp(row[j] - max);
      total += out[j];
    }
    for (let j = 0; j < row.length; j++) out[j] /= total;
    return out;
  }

  /**
   * Next-token cross-entropy over a sequence. `labels` defaults to the
   * sequence itself; passing a modified copy lets callers probe exactly
   * which positions the loss depends on. With `masked` the sum skips
   * every position whose target is an instruction token (target index
   * <= sepIndex), per the response-only training objective.
   */
  sequenceLoss(record: EncodedRecord, options: { masked: boolean; labels?: number[] }): {
    loss: number;
    tokens: number;
  } {
    const labels = options.labels ?? record.tokens;
    if (labels.length !== record.tokens.length) {
      throw new Error("labels must align with the token sequence");
    }
    let loss = 0;
    let count = 0;
    for (let t = 1; t < record.tokens.length; t++) {
      if (options.masked && t <= record.sepIndex) continue;
      const probs = this.probabilities(record.tokens[t - 1]);
      loss += -Math.log(probs[labels[t]] + 1e-12);
      count += 1;
    }
    return { loss, tokens: count };
  }

  /** One SGD step on the adapter for the masked positions of a record. */
  trainStep(record: EncodedRecord, lr: number): { loss: number; tokens: number } {
    const v = this.vocabSize;
    const r = this.rank;
    let loss = 0;
    let count = 0;
    for (let t = 1; t < record.tokens.length; t++) {
      if (t <= record.sepIndex) continue; // instruction targets contribute nothing
      const prev = record.tokens[t - 1];
      const target = record.tokens[t];
      const probs = this.probabilities(prev);
      loss += -Math.log(probs[target] + 1e-12);
      count += 1;
      // d loss / d logits = probs - onehot(target)
      // dA[prev][k] = sum_j g[j] * B[k][j];  dB[k][j] = A[prev][k] * g[j]
      const aRow = this.a.slice(prev * r, prev * r + r);
      for (let k = 0; k < r; k++) {
        let dA = 0;
        for (let j = 0; j < v; j++) {
          const g = probs[j] - (j === target ? 1 : 0);
          dA += g * this.b[k * v + j];
          this.b[k * v + j] -= lr * aRow[k] * g;
        }
        this.a[prev * r + k] -= lr * dA;
      }
    }
    return { loss, tokens: count };
  }

  /** Decode a continuation of the instruction; greedy or seeded sampling. */
  complete(instruction: string, decode: { mode: "greedy" } | { mode: "sampled"; seed: number },
           maxTokens = 24): string {
    const context = [BOS, ...tokenize(instruction).map((w) => this.tokenId(w)), SEP];
    let prev = context[context.length - 1];
    const sample = decode.mode === "sampled" ? mulberry32(decode.seed) : null;
    const words: string[] = [];
    for (let step = 0; step < maxTokens; step++) {
      const probs = this.probabilities(prev);
      let next: number;
      if (sample === null) {
        next = 0;
        for (let j = 1; j < probs.length; j++) {
          if (probs[j] > probs[next]) next = j;
        }
      } else {
        let u = sample();
        next = probs.length - 1;
        for (let j = 0; j < probs.length; j++) {
          u -= probs[j];
          if (u <= 0) { next = j; break; }
        }
      }
      if (next === EOS) break;
      if (next !== BOS && next !== SEP && next !== UNK) {
        words.push(this.vocab[next]);
      }
      prev = next;
    }
    return words.length > 0 ? words.join(" ") : "no output";
  }

  toAdapterArtifact(): AdapterArtifact {
    const v = this.vocabSize;
    const a: number[][] = [];
    for (let i = 0; i < v; i++) {
      a.push(Array.from(this.a.slice(i * this.rank, (i + 1) * this.rank)));
    }
    const b: number[][] = [];
    for (let k = 0; k < this.rank; k++) {
      b.push(Array.from(this.b.slice(k * v, (k + 1) * v)));
    }
    return { version: 1, rank: this.rank, baseSeed: this.baseSeed, vocab: [...this.vocab], a, b };
  }
}
