/**
 * Contrastive fine-tuning of the projection layer on mined training pairs.
 *
 * Pair file lines: {"query_id", "question", "law_id", "article_id", "label"}.
 * Article text is joined from the corpus file by id; query text travels in
 * the pair file. Loss per pair, with d = 1 - cos(u, v):
 *
 *     label * d^2 + (1 - label) * max(0, margin - d)^2
 *
 * Defaults: batch_size 8, epochs 4, learning rate 1e-5 (Adam, fresh optimizer
 * state per run; continuing a round means loading the previous checkpoint as
 * the base model). The full-set loss is recorded before training and after
 * every epoch.
 */

import fs from "node:fs";
import path from "node:path";

import * as tf from "@tensorflow/tfjs";

import { readCorpus } from "./corpus.js";
import { EncoderModel, hashFeatures, saveModel, tokenize } from "./encoder.js";

export interface TrainingPair {
  query_id: number;
  question: string;
  law_id: string;
  article_id: string;
  label: 0 | 1;
}

export interface TrainOptions {
  batchSize?: number;
  epochs?: number;
  learningRate?: number;
  margin?: number;
  seed?: number;
  /** projection output size for fresh models; must not exceed the hashing dim */
  dim?: number;
}

export interface TrainResult {
  modelDir: string;
  losses: number[];
  pairs: number;
  epochs: number;
}

export function readPairs(pairsPath: string): TrainingPair[] {
  const pairs: TrainingPair[] = [];
  const lines = fs.readFileSync(pairsPath, "utf-8").split("\n");
  lines.forEach((line, index) => {
    if (!line.trim()) return;
    let record: any;
    try {
      record = JSON.parse(line);
    } catch (err) {
      throw new Error(`${pairsPath}:${index + 1}: invalid JSON (${err})`);
    }
    for (const field of ["question", "law_id", "article_id", "label"]) {
      if (!(field in record)) {
        throw new Error(`${pairsPath}:${index + 1}: missing field ${field}`);
      }
    }
    pairs.push(record as TrainingPair);
  });
  if (pairs.length === 0) throw new Error(`${pairsPath}: no training pairs`);
  return pairs;
}

function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function shuffled(n: number, rand: () => number): number[] {
  const order = Array.from({ length: n }, (_, i) => i);
  for (let i = n - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [order[i], order[j]] = [order[j], order[i]];
  }
  return order;
}

function initialWeights(base: EncoderModel, dimOut: number): number[][] {
  if (base.weights) return base.weights.map((row) => row.slice());
  const rows: number[][] = [];
  for (let i = 0; i < dimOut; i++) {
    const row = new Array(base.dimIn).fill(0);
    row[i] = 1;
    rows.push(row);
  }
  return rows;
}

function l2rows(m: tf.Tensor2D): tf.Tensor2D {
  const norms = tf.norm(m, "euclidean", 1, true);
  return tf.div(m, tf.add(norms, 1e-12)) as tf.Tensor2D;
}

export function train(
  pairsPath: string,
  corpusPath: string,
  base: EncoderModel,
  outDir: string,
  options: TrainOptions = {},
): TrainResult {
  const batchSize = options.batchSize ?? 8;
  const epochs = options.epochs ?? 4;
  const learningRate = options.learningRate ?? 1e-5;
  const margin = options.margin ?? 0.5;
  const seed = options.seed ?? 17;
  const dimOut = base.weights ? base.dimOut : options.dim ?? base.dimOut;
  if (dimOut > base.dimIn) {
    throw new Error(`projection dim ${dimOut} exceeds hashing dim ${base.dimIn}`);
  }
  if (batchSize < 1 || epochs < 1 || learningRate <= 0) {
    throw new Error("batchSize and epochs must be >= 1 and learningRate > 0");
  }

  const pairs = readPairs(pairsPath);
  const articleText = new Map(readCorpus(corpusPath).map((a) => [a.id, a.combined]));

  const featureOf = (text: string) =>
    hashFeatures(tokenize(text, base.segmentation).slice(0, base.maxTokens), base.dimIn);
  const queryRows: Float64Array[] = [];
  const articleRows: Float64Array[] = [];
  const labels: number[] = [];
  const queryCache = new Map<string, Float64Array>();
  for (const pair of pairs) {
    const id = `${pair.law_id}#${pair.article_id}`;
    const text = articleText.get(id);
    if (text === undefined) {
      throw new Error(`pair references article ${id} absent from ${corpusPath}`);
    }
    let queryFeatures = queryCache.get(pair.question);
    if (!queryFeatures) {
      queryFeatures = featureOf(pair.question);
      queryCache.set(pair.question, queryFeatures);
    }
    queryRows.push(queryFeatures);
    articleRows.push(featureOf(text));
    labels.push(pair.label ? 1 : 0);
  }

  const n = pairs.length;
  const toTensor = (rows: Float64Array[]) =>
    tf.tensor2d(
      rows.map((r) => Array.from(r)),
      [rows.length, base.dimIn],
    );
  const queries = toTensor(queryRows);
  const articles = toTensor(articleRows);
  const labelTensor = tf.tensor1d(labels);

  const weights = tf.variable(tf.tensor2d(initialWeights(base, dimOut)));
  const optimizer = tf.train.adam(learningRate);

  const lossOf = (q: tf.Tensor2D, a: tf.Tensor2D, y: tf.Tensor1D): tf.Scalar =>
    tf.tidy(() => {
      const u = l2rows(tf.matMul(q, weights, false, true) as tf.Tensor2D);
      const v = l2rows(tf.matMul(a, weights, false, true) as tf.Tensor2D);
      const cos = tf.sum(tf.mul(u, v), 1);
      const d = tf.sub(1, cos);
      const positive = tf.mul(y, tf.square(d));
      const negative = tf.mul(tf.sub(1, y), tf.square(tf.relu(tf.sub(margin, d))));
      return tf.mean(tf.add(positive, negative)) as tf.Scalar;
    });

  const fullLoss = () => {
    const value = lossOf(queries, articles, labelTensor);
    const loss = value.dataSync()[0];
    value.dispose();
    return loss;
  };

  const losses = [fullLoss()];
  const rand = mulberry32(seed);
  for (let epoch = 0; epoch < epochs; epoch++) {
    const order = shuffled(n, rand);
    for (let start = 0; start < n; start += batchSize) {
      const pick = order.slice(start, start + batchSize);
      const q = tf.gather(queries, pick);
      const a = tf.gather(articles, pick);
      const y = tf.gather(labelTensor, pick);
      const cost = optimizer.minimize(() => lossOf(q as tf.Tensor2D, a as tf.Tensor2D, y as tf.Tensor1D), true);
      cost?.dispose();
      q.dispose();
      a.dispose();
      y.dispose();
    }
    losses.push(fullLoss());
  }

  const trained: EncoderModel = {
    type: "hash-projection",
    name: path.basename(outDir),
    dimIn: base.dimIn,
    dimOut,
    maxTokens: base.maxTokens,
    segmentation: base.segmentation,
    weights: (weights.arraySync() as number[][]).map((row) => row.slice()),
  };
  saveModel(trained, outDir);
  fs.writeFileSync(
    path.join(outDir, "training_log.json"),
    JSON.stringify(
      {
        pairs: n,
        epochs,
        batch_size: batchSize,
        learning_rate: learningRate,
        margin,
        seed,
        losses,
      },
      null,
      2,
    ) + "\n",
    "utf-8",
  );

  queries.dispose();
  articles.dispose();
  labelTensor.dispose();
  weights.dispose();

  return { modelDir: outDir, losses, pairs: n, epochs };
}
