/**
 * Parity against golden fixtures.
 *
 * The fixtures under golden/ were produced by the kernel's own CLI, so
 * these tests pin the full path: matrix -> GCTC container -> kernel ->
 * JSON/containers -> bindings. Everything must agree to 1e-12 (floats
 * survive the JSON round trip exactly, so in practice the diff is 0).
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { decode, decodeGctc, lossGrad, type Matrix } from "../src/index";

const GOLDEN = join(dirname(fileURLToPath(import.meta.url)), "..", "golden");
const TOL = 1e-12;

interface LossCase {
  name: string;
  vocab: string;
  label: string;
  logits: string;
  grad?: string;
  expected: Record<string, unknown>;
}

interface DecodeCase {
  name: string;
  vocab: string;
  logits: string;
  mode: "greedy" | "beam";
  beam_width: number | null;
  n_best: number | null;
  expected: {
    label?: string;
    framewise?: string;
    n_best?: { label: string; log_prob: number }[];
  };
}

const manifest = JSON.parse(readFileSync(join(GOLDEN, "manifest.json"), "utf-8")) as {
  loss: LossCase[];
  decode: DecodeCase[];
};

function loadMatrix(name: string): Matrix {
  return decodeGctc(readFileSync(join(GOLDEN, name)));
}

describe("loss/grad parity", () => {
  it("reproduces every golden loss fixture in one batch", async () => {
    const batch = manifest.loss.map((c) => loadMatrix(c.logits));
    const labels = manifest.loss.map((c) => c.label);
    // all fixtures share base units {a,b} vs {t,h,e}; group by vocab file
    const byVocab = new Map<string, number[]>();
    manifest.loss.forEach((c, i) => {
      byVocab.set(c.vocab, [...(byVocab.get(c.vocab) ?? []), i]);
    });

    for (const [vocabFile, indices] of byVocab) {
      const results = await lossGrad(
        indices.map((i) => batch[i]),
        indices.map((i) => labels[i]),
        join(GOLDEN, vocabFile),
      );
      results.forEach((item, k) => {
        const c = manifest.loss[indices[k]];
        const exp = c.expected;
        expect(item.impossible, c.name).toBe(exp.impossible);
        if (item.impossible) {
          expect(item.loss, c.name).toBeNull();
          expect(item.logLikelihood, c.name).toBe(-Infinity);
          expect(item.grad, c.name).toBeNull();
        } else {
          expect(Math.abs((item.loss as number) - (exp.loss as number)), c.name)
            .toBeLessThanOrEqual(TOL);
          expect(
            Math.abs(item.logLikelihood - (exp.log_likelihood as number)),
            c.name,
          ).toBeLessThanOrEqual(TOL);
        }
        expect(item.minPathLength, c.name).toBe(exp.min_path_length);
        expect(item.timesteps, c.name).toBe(exp.timesteps);
        expect(item.consistencyGap, c.name).toBeLessThanOrEqual(1e-9);
      });
    }
  }, 120_000);

  it("reproduces every golden gradient elementwise", async () => {
    for (const c of manifest.loss.filter((c) => c.grad)) {
      const [item] = await lossGrad([loadMatrix(c.logits)], [c.label], join(GOLDEN, c.vocab));
      const golden = loadMatrix(c.grad!);
      expect(item.grad, c.name).not.toBeNull();
      const grad = item.grad!;
      expect(grad.rows, c.name).toBe(golden.rows);
      expect(grad.cols, c.name).toBe(golden.cols);
      let worst = 0;
      for (let i = 0; i < golden.data.length; i++) {
        worst = Math.max(worst, Math.abs(grad.data[i] - golden.data[i]));
      }
      expect(worst, c.name).toBeLessThanOrEqual(TOL);
    }
  }, 120_000);
});

describe("decode parity", () => {
  for (const c of manifest.decode) {
    it(`reproduces ${c.name}`, async () => {
      const result = await decode(
        loadMatrix(c.logits),
        join(GOLDEN, c.vocab),
        c.mode,
        c.beam_width ?? undefined,
        c.n_best ?? undefined,
      );
      if (c.mode === "greedy") {
        expect(result.label).toBe(c.expected.label);
        expect(result.framewise).toBe(c.expected.framewise);
      } else {
        const expected = c.expected.n_best!;
        expect(result.hypotheses!.length).toBe(expected.length);
        expect(result.label).toBe(expected[0].label);
        result.hypotheses!.forEach((h, i) => {
          expect(h.label, `${c.name}[${i}]`).toBe(expected[i].label);
          expect(Math.abs(h.logProb - expected[i].log_prob), `${c.name}[${i}]`)
            .toBeLessThanOrEqual(TOL);
        });
      }
    }, 60_000);
  }
});
