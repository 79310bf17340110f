/**
 * Node bindings for the gramctc kernel.
 *
 * Thin by design: build a vocabulary, score a batch of (logits, label)
 * pairs, decode a logits matrix. All numeric work happens in the kernel
 * process; this package moves matrices across the boundary losslessly
 * (the GCTC container is raw float64) and mirrors the CLI's JSON.
 */

import { readFile, writeFile } from "node:fs/promises";
import { join } from "node:path";

import { CliError, runCli, withScratchDir, type CliOptions } from "./cli.js";
import { decodeGctc, encodeGctc, matrix, type Matrix } from "./gctc.js";
import {
  buildVocab,
  parseVocabFile,
  vocabFileContent,
  VocabError,
  type Vocab,
} from "./vocab.js";

export { CliError, runCli } from "./cli.js";
export { decodeGctc, encodeGctc, matrix, type Matrix } from "./gctc.js";
export {
  buildVocab,
  parseVocabFile,
  vocabFileContent,
  VocabError,
  type Vocab,
} from "./vocab.js";

/** Version of the kernel this package is written against. */
export const KERNEL_VERSION = "0.1.0";

export interface BindingOptions extends CliOptions {
  /** concurrent kernel processes for batch calls (default 4) */
  jobs?: number;
  /** skip gradient computation and file transfer */
  withGrad?: boolean;
}

export interface LossGradItem {
  loss: number | null;
  logLikelihood: number;
  impossible: boolean;
  minPathLength: number;
  timesteps: number;
  consistencyGap: number;
  grad: Matrix | null;
}

export interface DecodeHypothesis {
  label: string;
  logProb: number;
}

export interface DecodeResult {
  label: string;
  /** greedy mode: per-frame symbols joined by "|", blank as "_" */
  framewise?: string;
  /** beam mode: n-best list, best first */
  hypotheses?: DecodeHypothesis[];
}

type VocabLike = Vocab | string;

async function resolveVocab(
  vocab: VocabLike,
  scratch: string,
): Promise<{ path: string; parsed: Vocab }> {
  if (typeof vocab === "string") {
    return { path: vocab, parsed: parseVocabFile(await readFile(vocab, "utf-8")) };
  }
  const path = join(scratch, "vocab.txt");
  await writeFile(path, vocabFileContent(vocab), "utf-8");
  return { path, parsed: vocab };
}

function checkItem(m: Matrix, index: number, label: string, totalSymbols: number): void {
  const where = `batch item ${index} (label ${JSON.stringify(label)})`;
  if (!(m.data instanceof Float64Array)) {
    throw new TypeError(`${where}: logits data must be a Float64Array`);
  }
  if (m.data.length !== m.rows * m.cols) {
    throw new RangeError(
      `${where}: data length ${m.data.length} does not match ${m.rows} x ${m.cols}`,
    );
  }
  if (m.cols !== totalSymbols) {
    throw new RangeError(
      `${where}: logits have ${m.cols} columns, vocabulary needs ${totalSymbols}`,
    );
  }
}

async function mapPool<T, U>(
  items: readonly T[],
  limit: number,
  fn: (item: T, index: number) => Promise<U>,
): Promise<U[]> {
  const out = new Array<U>(items.length);
  let next = 0;
  const workers = Array.from({ length: Math.max(1, Math.min(limit, items.length)) }, async () => {
    for (;;) {
      const i = next++;
      if (i >= items.length) return;
      out[i] = await fn(items[i], i);
    }
  });
  await Promise.all(workers);
  return out;
}

function parseLossRecord(record: Record<string, unknown>): Omit<LossGradItem, "grad"> {
  const ll = record.log_likelihood;
  return {
    loss: record.loss as number | null,
    logLikelihood: ll === "-inf" ? -Infinity : (ll as number),
    impossible: Boolean(record.impossible),
    minPathLength: record.min_path_length as number,
    timesteps: record.timesteps as number,
    consistencyGap: record.consistency_gap as number,
  };
}

/**
 * Score a batch of logits matrices against their labels.
 *
 * Items are independent; order of results matches order of inputs, and
 * an impossible alignment is a result (loss null, grad null), not an
 * error. Shape problems are errors, raised before any kernel call and
 * naming the offending item.
 */
export async function lossGrad(
  batch: readonly Matrix[],
  labels: readonly string[],
  vocab: VocabLike,
  opts: BindingOptions = {},
): Promise<LossGradItem[]> {
  if (batch.length !== labels.length) {
    throw new RangeError(`batch has ${batch.length} matrices but ${labels.length} labels`);
  }
  if (batch.length === 0) {
    return [];
  }
  const withGrad = opts.withGrad ?? true;
  return withScratchDir(async (scratch) => {
    const { path: vocabPath, parsed } = await resolveVocab(vocab, scratch);
    batch.forEach((m, i) => checkItem(m, i, labels[i], parsed.totalSymbols));

    return mapPool(batch, opts.jobs ?? 4, async (m, i) => {
      const logitsPath = join(scratch, `item_${i}.bin`);
      await writeFile(logitsPath, encodeGctc(m));
      const base = ["loss", "--vocab", vocabPath, "--label", labels[i]];
      const gradPath = join(scratch, `item_${i}.grad.bin`);
      let stdout: string;
      let gradWritten = withGrad;
      try {
        stdout = withGrad
          ? await runCli([...base, "--grad-out", gradPath, logitsPath], opts)
          : await runCli([...base, logitsPath], opts);
      } catch (err) {
        // no gradient exists for an impossible alignment; rerun for the record
        if (err instanceof CliError && err.message.includes("impossible alignment")) {
          stdout = await runCli([...base, logitsPath], opts);
          gradWritten = false;
        } else {
          throw err;
        }
      }
      const item = parseLossRecord(JSON.parse(stdout));
      const grad =
        gradWritten && !item.impossible ? decodeGctc(await readFile(gradPath)) : null;
      return { ...item, grad };
    });
  });
}

/**
 * Decode one logits matrix to a label (greedy) or an n-best list (beam).
 */
export async function decode(
  logits: Matrix,
  vocab: VocabLike,
  mode: "greedy" | "beam" = "greedy",
  beamWidth = 8,
  nBest = 1,
  opts: BindingOptions = {},
): Promise<DecodeResult> {
  return withScratchDir(async (scratch) => {
    const { path: vocabPath, parsed } = await resolveVocab(vocab, scratch);
    checkItem(logits, 0, "<decode>", parsed.totalSymbols);
    const logitsPath = join(scratch, "logits.bin");
    await writeFile(logitsPath, encodeGctc(logits));

    const args = ["decode", "--vocab", vocabPath, "--mode", mode];
    if (mode === "beam") {
      args.push("--beam-width", String(beamWidth), "--n-best", String(nBest));
    }
    const record = JSON.parse(await runCli([...args, logitsPath], opts));
    const result = record.results[0];
    if (mode === "greedy") {
      return { label: result.label as string, framewise: result.framewise as string };
    }
    const hypotheses = (result.n_best as { label: string; log_prob: number }[]).map((h) => ({
      label: h.label,
      logProb: h.log_prob,
    }));
    return { label: hypotheses[0]?.label ?? "", hypotheses };
  });
}

// the kernel publishes its interface under these names
export const loss_grad = lossGrad;
export const build_vocab = buildVocab;
