/**
 * Deterministic sentence encoder: feature-hashed token counts, optionally
 * passed through a trained linear projection, always L2-normalized.
 *
 * Word-level input follows the underscore convention for segmented compounds
 * ("bài_báo"); syllable mode treats the underscore as a separator.
 */

import fs from "node:fs";
import path from "node:path";

export type Segmentation = "syllable" | "word";

export interface EncoderModel {
  type: "hash-projection";
  name: string;
  dimIn: number;
  dimOut: number;
  maxTokens: number;
  segmentation: Segmentation;
  /** dimOut x dimIn row-major projection; null means identity (dimOut == dimIn). */
  weights: number[][] | null;
}

const EDGE_PUNCT = /^[^\p{L}\p{N}_]+|[^\p{L}\p{N}_]+$/gu;

export function tokenize(text: string, segmentation: Segmentation): string[] {
  let prepared = text.toLowerCase();
  if (segmentation === "syllable") prepared = prepared.replace(/_/g, " ");
  const tokens: string[] = [];
  for (const chunk of prepared.split(/\s+/)) {
    const token = chunk.replace(EDGE_PUNCT, "");
    if (token) tokens.push(token);
  }
  return tokens;
}

function fnv1a(text: string, basis: number): number {
  let hash = basis >>> 0;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

/** Hashed token counts -> unit vector; empty token lists map to basis axis 0. */
export function hashFeatures(tokens: string[], dimIn: number): Float64Array {
  const features = new Float64Array(dimIn);
  for (const token of tokens) {
    const bucket = fnv1a(token, 0x811c9dc5) % dimIn;
    const sign = fnv1a(token, 0x811c9dc5 ^ 0x5bd1e995) & 1 ? 1 : -1;
    features[bucket] += sign;
  }
  let norm = Math.hypot(...features);
  if (norm === 0) {
    features[0] = 1;
    norm = 1;
  }
  for (let i = 0; i < dimIn; i++) features[i] /= norm;
  return features;
}

function project(features: Float64Array, weights: number[][]): Float64Array {
  const out = new Float64Array(weights.length);
  for (let row = 0; row < weights.length; row++) {
    let sum = 0;
    const w = weights[row];
    for (let col = 0; col < w.length; col++) sum += w[col] * features[col];
    out[row] = sum;
  }
  let norm = Math.hypot(...out);
  if (norm === 0) {
    out[0] = 1;
    norm = 1;
  }
  for (let i = 0; i < out.length; i++) out[i] /= norm;
  return out;
}

export interface EncodeResult {
  vector: number[];
  truncated: boolean;
}

export function encode(text: string, model: EncoderModel): EncodeResult {
  const tokens = tokenize(text, model.segmentation);
  const truncated = tokens.length > model.maxTokens;
  const kept = truncated ? tokens.slice(0, model.maxTokens) : tokens;
  const features = hashFeatures(kept, model.dimIn);
  const vector = model.weights ? project(features, model.weights) : features;
  return { vector: Array.from(vector), truncated };
}

export function encodeBatch(texts: string[], model: EncoderModel): number[][] {
  return texts.map((text) => encode(text, model).vector);
}

export interface HashModelOptions {
  dim?: number;
  maxTokens?: number;
  segmentation?: Segmentation;
}

export function hashModel(options: HashModelOptions = {}): EncoderModel {
  const dim = options.dim ?? 256;
  return {
    type: "hash-projection",
    name: `hash-${dim}`,
    dimIn: dim,
    dimOut: dim,
    maxTokens: options.maxTokens ?? 256,
    segmentation: options.segmentation ?? "word",
    weights: null,
  };
}

const MODEL_FILE = "model.json";

export function saveModel(model: EncoderModel, dir: string): void {
  fs.mkdirSync(dir, { recursive: true });
  fs.writeFileSync(path.join(dir, MODEL_FILE), JSON.stringify(model) + "\n", "utf-8");
}

export function loadModel(dir: string): EncoderModel {
  const raw = JSON.parse(fs.readFileSync(path.join(dir, MODEL_FILE), "utf-8"));
  if (raw.type !== "hash-projection") {
    throw new Error(`${dir}: unsupported model type ${raw.type}`);
  }
  if (raw.weights !== null) {
    if (!Array.isArray(raw.weights) || raw.weights.length !== raw.dimOut) {
      throw new Error(`${dir}: weights shape does not match dimOut=${raw.dimOut}`);
    }
  }
  return raw as EncoderModel;
}

/** Resolve a CLI --model argument: a model directory or the built-in "hash". */
export function resolveModel(spec: string, options: HashModelOptions = {}): EncoderModel {
  if (spec === "hash") return hashModel(options);
  return loadModel(spec);
}
