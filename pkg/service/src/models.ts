/**
 * Backing models for the generate/embed/polarity roles.
 *
 * Every model is a deterministic pure function of its input, so the
 * service honors the protocol's repeatability guarantees (identical
 * request, identical response) without any caching layer. Model roles
 * are configuration: anything honoring the wire shapes can stand in.
 */

import { createHash } from "node:crypto";

// --- sentence embedder -------------------------------------------------------

/**
 * Hashing sentence encoder: lowercase whitespace tokens contribute a word
 * feature plus boundary-padded character trigrams; each feature hashes to
 * a signed bucket and the accumulated vector is L2-normalized. Identical
 * text always encodes to an identical vector.
 */
export class HashEncoder {
  constructor(readonly dim: number = 64) {
    if (!Number.isInteger(dim) || dim <= 0) {
      throw new Error("embedder dim must be a positive integer");
    }
  }

  embedOne(text: string): number[] {
    const vec = new Array<number>(this.dim).fill(0);
    for (const token of text.toLowerCase().split(/\s+/).filter(Boolean)) {
      const features = [`w:${token}`];
      const padded = `#${token}#`;
      for (let i = 0; i + 3 <= padded.length; i++) {
        features.push(`t:${padded.slice(i, i + 3)}`);
      }
      for (const feature of features) {
        const digest = createHash("sha256").update(feature, "utf8").digest();
        const bucket = Number(digest.readBigUInt64BE(0) % BigInt(this.dim));
        const sign = digest[8] & 1 ? 1 : -1;
        vec[bucket] += sign;
      }
    }
    let norm = Math.hypot(...vec);
    if (norm === 0) {
      const digest = createHash("sha256").update(text, "utf8").digest();
      vec[Number(digest.readBigUInt64BE(0) % BigInt(this.dim))] = 1;
      norm = 1;
    }
    return vec.map((x) => x / norm);
  }

  embed(texts: string[]): number[][] {
    return texts.map((t) => this.embedOne(t));
  }
}

// --- commonsense reaction generator -------------------------------------------

interface CuePattern {
  cues: string[];
  reaction: string;
}

/**
 * Cue-lexicon reaction model: the first cue group with a hit in the text
 * names the reader's likely reaction; with no emotional cue at all the
 * model reports "none", mirroring how a generative commonsense model
 * degenerates on flat narration.
 */
const CUE_PATTERNS: CuePattern[] = [
  { cues: ["joy", "happy", "cheer", "celebrat", "laugh", "delight", "scholarship", "passed", "won", "succe"], reaction: "happy and proud" },
  { cues: ["wept", "cry", "cried", "tears", "grief", "mourn", "funeral", "lost", "missing"], reaction: "sad" },
  { cues: ["terrif", "afraid", "fear", "scared", "panic", "tremb", "numb"], reaction: "scared" },
  { cues: ["anger", "angry", "furious", "slammed", "shout", "confront", "rage"], reaction: "angry" },
  { cues: ["surpris", "astonish", "gasp", "erupted", "disbelief", "sudden"], reaction: "surprised" },
  { cues: ["disgust", "mold", "rot", "shame", "sick"], reaction: "disgusted" },
  { cues: ["relief", "relieved", "clean", "recover", "applaud", "safe"], reaction: "relieved" },
  { cues: ["anxious", "worry", "worried", "nervous", "awake", "pressure", "due"], reaction: "anxious" },
];

export class CueReactionModel {
  generate(text: string, relation: string): string {
    if (relation !== "xReact") {
      throw new Error("relation must be 'xReact'");
    }
    const lowered = text.toLowerCase();
    for (const pattern of CUE_PATTERNS) {
      if (pattern.cues.some((cue) => lowered.includes(cue))) {
        return pattern.reaction;
      }
    }
    return "none";
  }
}

// --- polarity classifier ----------------------------------------------------------

const POSITIVE_LEXICON = new Set(
  `happy happiness glad joy joyful delighted pleased excited relieved relief proud
   grateful hopeful love loved wonderful great good cheerful thrilled calm satisfied
   amazing beautiful laughed laughing smile smiled celebrate celebrated won win
   success successful applauded dancing`.split(/\s+/).filter(Boolean),
);

const NEGATIVE_LEXICON = new Set(
  `sad sadness cried cry crying tears angry anger rage fear afraid scared terrified
   disgusted disgust awful terrible miserable upset worried anxious grief pain hurt
   lonely bad horrible lost losing failed failure frightened shocked devastated
   heartbroken furious dread gloomy missing cancelled collapsed`.split(/\s+/).filter(Boolean),
);

export class LexiconPolarityModel {
  classify(text: string): { label: "POSITIVE" | "NEGATIVE"; confidence: number } {
    const words = text.toLowerCase().match(/[a-z']+/g) ?? [];
    let pos = 0;
    let neg = 0;
    for (const word of words) {
      if (POSITIVE_LEXICON.has(word)) pos++;
      if (NEGATIVE_LEXICON.has(word)) neg++;
    }
    // ties (including zero hits) default to NEGATIVE: the polarity branch
    // only runs when the reaction model already failed to find a clear cue
    const label = pos > neg ? "POSITIVE" : "NEGATIVE";
    const matched = pos + neg;
    const confidence = matched === 0 ? 0.5 : 0.5 + 0.5 * Math.abs(pos - neg) / matched;
    return { label, confidence };
  }
}
