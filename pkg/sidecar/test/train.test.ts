import fs from "node:fs";
import os from "node:os";
import path from "node:path";

import { describe, expect, it } from "vitest";

import { encode, hashModel, loadModel } from "../src/encoder.js";
import { readPairs, train } from "../src/train.js";

function tmpdir(label: string): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), `sidecar-${label}-`));
}

function writeLines(file: string, records: unknown[]): string {
  fs.writeFileSync(file, records.map((r) => JSON.stringify(r)).join("\n") + "\n");
  return file;
}

/** Separable toy set: positives share the query's tokens, negatives do not. */
function toyData(dir: string, queries = 5) {
  const laws: any[] = [];
  const pairs: any[] = [];
  for (let q = 0; q < queries; q++) {
    const question = `chủ_đề${q} khía_cạnh${q} câu hỏi`;
    laws.push({
      law_id: `L${q}`,
      articles: [
        { article_id: "pos", title: `chủ_đề${q}`, text: `khía_cạnh${q} chi_tiết${q}` },
        { article_id: "neg", title: `khác${q}`, text: `nội_dung${q} riêng${q}` },
      ],
    });
    pairs.push({ query_id: q, question, law_id: `L${q}`, article_id: "pos", label: 1 });
    pairs.push({ query_id: q, question, law_id: `L${q}`, article_id: "neg", label: 0 });
  }
  return {
    corpus: writeLines(path.join(dir, "corpus.jsonl"), laws),
    pairs: writeLines(path.join(dir, "pairs.jsonl"), pairs),
  };
}

describe("readPairs", () => {
  it("rejects an empty pair file", () => {
    const dir = tmpdir("pairs");
    const file = path.join(dir, "pairs.jsonl");
    fs.writeFileSync(file, "");
    expect(() => readPairs(file)).toThrow(/no training pairs/);
  });

  it("rejects records missing fields", () => {
    const dir = tmpdir("pairs");
    const file = writeLines(path.join(dir, "pairs.jsonl"), [{ question: "q" }]);
    expect(() => readPairs(file)).toThrow(/missing field/);
  });
});

describe("train", () => {
  it("smoke: 1 epoch on 10 pairs with the default hyperparameters", () => {
    const dir = tmpdir("smoke");
    const { corpus, pairs } = toyData(dir, 5); // 5 queries x 2 pairs = 10
    const out = path.join(dir, "model");
    const result = train(pairs, corpus, hashModel({ dim: 32 }), out, { epochs: 1 });
    expect(result.pairs).toBe(10);
    expect(result.losses).toHaveLength(2); // before + after the single epoch

    const log = JSON.parse(fs.readFileSync(path.join(out, "training_log.json"), "utf-8"));
    expect(log.batch_size).toBe(8);
    expect(log.learning_rate).toBe(1e-5);
    expect(log.epochs).toBe(1);

    // the saved model loads and encodes at the trained dimensionality
    const model = loadModel(out);
    expect(model.weights).not.toBeNull();
    expect(encode("một câu bất_kỳ", model).vector).toHaveLength(32);
  });

  it("loss decreases on a separable toy set", () => {
    const dir = tmpdir("loss");
    const { corpus, pairs } = toyData(dir, 8);
    const out = path.join(dir, "model");
    const result = train(pairs, corpus, hashModel({ dim: 32 }), out, {
      epochs: 12,
      learningRate: 0.05,
      seed: 3,
    });
    expect(result.losses[0]).toBeGreaterThan(0);
    expect(result.losses.at(-1)!).toBeLessThan(result.losses[0]);
    const log = JSON.parse(fs.readFileSync(path.join(out, "training_log.json"), "utf-8"));
    expect(log.losses).toEqual(result.losses);
  });

  it("restarts from a previous checkpoint", () => {
    const dir = tmpdir("rounds");
    const { corpus, pairs } = toyData(dir, 4);
    const round1 = path.join(dir, "round1");
    train(pairs, corpus, hashModel({ dim: 16 }), round1, { epochs: 2, learningRate: 0.05 });
    const base = loadModel(round1);
    const round2 = path.join(dir, "round2");
    const result = train(pairs, corpus, base, round2, { epochs: 2, learningRate: 0.05 });
    // continuing from the checkpoint starts near where round 1 ended
    const log1 = JSON.parse(fs.readFileSync(path.join(round1, "training_log.json"), "utf-8"));
    expect(result.losses[0]).toBeCloseTo(log1.losses.at(-1), 6);
  });

  it("aborts when a pair references an article absent from the corpus", () => {
    const dir = tmpdir("dangling");
    const { corpus } = toyData(dir, 2);
    const pairs = writeLines(path.join(dir, "bad.jsonl"), [
      { query_id: 0, question: "q", law_id: "GHOST", article_id: "9", label: 1 },
    ]);
    expect(() => train(pairs, corpus, hashModel({ dim: 8 }), path.join(dir, "m"))).toThrow(
      /GHOST#9/,
    );
  });
});
