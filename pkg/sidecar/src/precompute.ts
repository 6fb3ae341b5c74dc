/**
 * Batch-embed a corpus into the engine's vector file format, one line per
 * article: {"id": "<law_id>#<article_id>", "vector": [...]}. Truncation
 * statistics and model metadata go to a sibling <out>.meta.json line.
 */

import fs from "node:fs";

import { readCorpus } from "./corpus.js";
import { EncoderModel, encode } from "./encoder.js";

export interface PrecomputeResult {
  articles: number;
  truncated: number;
  dim: number;
  out: string;
  meta: string;
}

export function precompute(corpusPath: string, model: EncoderModel, outPath: string): PrecomputeResult {
  const articles = readCorpus(corpusPath);
  if (articles.length === 0) throw new Error(`${corpusPath}: corpus has no articles`);
  const out = fs.openSync(outPath, "w");
  let truncated = 0;
  try {
    for (const article of articles) {
      let result;
      try {
        result = encode(article.combined, model);
      } catch (err) {
        throw new Error(`encoding failed for article ${article.id}: ${err}`);
      }
      if (result.truncated) truncated += 1;
      fs.writeSync(out, JSON.stringify({ id: article.id, vector: result.vector }) + "\n");
    }
  } finally {
    fs.closeSync(out);
  }
  const metaPath = `${outPath}.meta.json`;
  const meta = {
    model: model.name,
    dim: model.dimOut,
    max_tokens: model.maxTokens,
    segmentation: model.segmentation,
    articles: articles.length,
    truncated,
  };
  fs.writeFileSync(metaPath, JSON.stringify(meta) + "\n", "utf-8");
  return { articles: articles.length, truncated, dim: model.dimOut, out: outPath, meta: metaPath };
}
