#!/usr/bin/env node
/**
 * Embedding sidecar CLI: serve the provider endpoints, precompute a corpus
 * vector file, or fine-tune the encoder on mined training pairs.
 */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { hashModel, loadModel, resolveModel, Segmentation } from "./encoder.js";
import { precompute } from "./precompute.js";
import { createApp } from "./server.js";
import { train } from "./train.js";

const modelFlags = {
  model: {
    type: "string" as const,
    default: "hash",
    describe: "model directory, or 'hash' for the built-in hashing encoder",
  },
  dim: { type: "number" as const, default: 256, describe: "hashing dim (built-in model)" },
  "max-tokens": { type: "number" as const, default: 256 },
  segmentation: {
    choices: ["syllable", "word"] as const,
    default: "word" as Segmentation,
  },
};

function buildModel(argv: any) {
  return resolveModel(argv.model, {
    dim: argv.dim,
    maxTokens: argv["max-tokens"],
    segmentation: argv.segmentation,
  });
}

yargs(hideBin(process.argv))
  .scriptName("sidecar")
  .command(
    "serve",
    "run the embedding provider (POST /embed, GET /info)",
    (y) =>
      y.options({
        ...modelFlags,
        port: { type: "number", default: 8601 },
        "max-batch": { type: "number", default: 256 },
      }),
    (argv) => {
      const model = buildModel(argv);
      const app = createApp(model, { maxBatch: argv["max-batch"] as number });
      const server = app.listen(argv.port as number, () => {
        const address = server.address();
        const port = typeof address === "object" && address ? address.port : argv.port;
        console.log(
          JSON.stringify({ serving: model.name, dim: model.dimOut, port }),
        );
      });
    },
  )
  .command(
    "precompute",
    "embed every corpus article into a vector file",
    (y) =>
      y.options({
        ...modelFlags,
        corpus: { type: "string", demandOption: true },
        out: { type: "string", demandOption: true },
      }),
    (argv) => {
      const model = buildModel(argv);
      const result = precompute(argv.corpus as string, model, argv.out as string);
      console.log(JSON.stringify({ command: "precompute", model: model.name, ...result }));
    },
  )
  .command(
    "train",
    "contrastive fine-tuning on a mined pair file",
    (y) =>
      y.options({
        pairs: { type: "string", demandOption: true },
        corpus: { type: "string", demandOption: true },
        out: { type: "string", demandOption: true, describe: "output model directory" },
        base: {
          type: "string",
          default: "hash",
          describe: "base checkpoint directory, or 'hash' to start fresh",
        },
        dim: { type: "number", default: 256 },
        "max-tokens": { type: "number", default: 256 },
        segmentation: { choices: ["syllable", "word"] as const, default: "word" as Segmentation },
        "batch-size": { type: "number", default: 8 },
        epochs: { type: "number", default: 4 },
        lr: { type: "number", default: 1e-5 },
        margin: { type: "number", default: 0.5 },
        seed: { type: "number", default: 17 },
      }),
    (argv) => {
      const base =
        argv.base === "hash"
          ? hashModel({
              dim: argv.dim as number,
              maxTokens: argv["max-tokens"] as number,
              segmentation: argv.segmentation as Segmentation,
            })
          : loadModel(argv.base as string);
      const result = train(argv.pairs as string, argv.corpus as string, base, argv.out as string, {
        batchSize: argv["batch-size"] as number,
        epochs: argv.epochs as number,
        learningRate: argv.lr as number,
        margin: argv.margin as number,
        seed: argv.seed as number,
        dim: argv.dim as number,
      });
      console.log(
        JSON.stringify({
          command: "train",
          model_dir: result.modelDir,
          pairs: result.pairs,
          epochs: result.epochs,
          first_loss: result.losses[0],
          final_loss: result.losses[result.losses.length - 1],
        }),
      );
    },
  )
  .demandCommand(1)
  .strict()
  .fail((msg, err) => {
    console.error(`error: ${msg ?? err?.message ?? err}`);
    process.exit(err && !msg ? 1 : 2);
  })
  .parse();
