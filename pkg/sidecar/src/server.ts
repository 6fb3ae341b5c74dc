/**
 * Embedding provider endpoints:
 *   POST /embed  {"texts": ["...", ...]} -> {"dim": N, "vectors": [[...], ...]}
 *   GET  /info   -> {"dim": N, "model": "...", "max_tokens": M, "segmentation": "..."}
 *
 * Vectors come back in request order; identical text always yields the
 * identical vector. Malformed bodies get 400, oversize batches 413.
 */

import express from "express";

import { EncoderModel, encodeBatch } from "./encoder.js";

export interface ServerOptions {
  maxBatch?: number;
}

export function createApp(model: EncoderModel, options: ServerOptions = {}): express.Express {
  const maxBatch = options.maxBatch ?? 256;
  const app = express();
  app.use(express.json({ limit: "64mb" }));

  app.get("/info", (_req, res) => {
    res.json({
      dim: model.dimOut,
      model: model.name,
      max_tokens: model.maxTokens,
      segmentation: model.segmentation,
    });
  });

  app.post("/embed", (req, res) => {
    const texts = req.body?.texts;
    if (!Array.isArray(texts) || texts.some((t: unknown) => typeof t !== "string")) {
      res.status(400).json({ error: "body must be {\"texts\": [string, ...]}" });
      return;
    }
    if (texts.length > maxBatch) {
      res.status(413).json({ error: `batch of ${texts.length} exceeds limit ${maxBatch}` });
      return;
    }
    res.json({ dim: model.dimOut, vectors: encodeBatch(texts, model) });
  });

  // express's json parser errors (bad JSON bodies) land here
  app.use((err: any, _req: express.Request, res: express.Response, next: express.NextFunction) => {
    if (err?.type === "entity.parse.failed" || err instanceof SyntaxError) {
      res.status(400).json({ error: "invalid JSON body" });
      return;
    }
    next(err);
  });

  return app;
}
