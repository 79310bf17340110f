/**
 * Process plumbing for the gramctc command-line interface.
 *
 * The kernel lives in another runtime, so every call crosses a process
 * boundary: inputs as GCTC containers and vocab files in a scratch
 * directory, results as the CLI's deterministic JSON on stdout. Errors
 * come back as {"error": {type, message}} records on stderr with exit
 * code 2, which we surface as CliError.
 */

import { execFile } from "node:child_process";
import { mkdtemp, rm } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface CliOptions {
  /** executable to run; default "gramctc" from PATH */
  bin?: string;
  /** per-call timeout in milliseconds */
  timeoutMs?: number;
}

export class CliError extends Error {
  constructor(
    message: string,
    readonly errorType: string | null,
    readonly exitCode: number | null,
  ) {
    super(message);
  }
}

export function runCli(args: string[], opts: CliOptions = {}): Promise<string> {
  const bin = opts.bin ?? "gramctc";
  return new Promise((resolve, reject) => {
    execFile(
      bin,
      args,
      { timeout: opts.timeoutMs ?? 120_000, maxBuffer: 64 * 1024 * 1024 },
      (err, stdout, stderr) => {
        if (!err) {
          resolve(stdout);
          return;
        }
        let type: string | null = null;
        let message = stderr.trim() || err.message;
        try {
          const rec = JSON.parse(stderr);
          type = rec.error?.type ?? null;
          message = rec.error?.message ?? message;
        } catch {
          // stderr was not the CLI's JSON record; keep the raw text
        }
        const code = typeof (err as { code?: unknown }).code === "number"
          ? ((err as { code?: number }).code ?? null)
          : null;
        reject(new CliError(message, type, code));
      },
    );
  });
}

/** Run fn with a fresh scratch directory, removing it afterwards. */
export async function withScratchDir<T>(fn: (dir: string) => Promise<T>): Promise<T> {
  const dir = await mkdtemp(join(tmpdir(), "gramctc-"));
  try {
    return await fn(dir);
  } finally {
    await rm(dir, { recursive: true, force: true });
  }
}
