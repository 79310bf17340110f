/**
 * Gram vocabularies on the TypeScript side.
 *
 * The file format is the contract: a "#units:" header naming the base
 * units, then one gram per line in id order (ids 1..n; 0 is blank and
 * never written). buildVocab applies the same rules as the kernel so a
 * vocabulary built here and saved is accepted unchanged over there.
 */

const UNITS_HEADER = "#units:";

export class VocabError extends Error {}

export interface Vocab {
  baseUnits: string[];
  grams: string[];
  /** grams.length + 1: column count of any logits matrix for this vocab. */
  totalSymbols: number;
  /** longest gram, in base units */
  tau: number;
  /** base units that were appended because no gram listed them */
  autoAdded: string[];
}

function codePoints(s: string): string[] {
  return Array.from(s);
}

export function buildVocab(gramStrings: string[], baseUnits: string[] | string): Vocab {
  const units = typeof baseUnits === "string" ? codePoints(baseUnits) : [...baseUnits];
  if (units.length === 0) {
    throw new VocabError("base unit set must be non-empty");
  }
  const unitSet = new Set<string>();
  for (const u of units) {
    if (codePoints(u).length !== 1) {
      throw new VocabError(`base unit ${JSON.stringify(u)} is not a single code point`);
    }
    if (unitSet.has(u)) {
      throw new VocabError(`duplicate base unit ${JSON.stringify(u)}`);
    }
    unitSet.add(u);
  }

  if (gramStrings.length === 0) {
    throw new VocabError("gram list must be non-empty");
  }
  const grams: string[] = [];
  const seen = new Set<string>();
  for (const s of gramStrings) {
    if (s.length === 0) {
      throw new VocabError("empty gram string");
    }
    if (seen.has(s)) {
      throw new VocabError(`duplicate gram ${JSON.stringify(s)}`);
    }
    for (const u of codePoints(s)) {
      if (!unitSet.has(u)) {
        throw new VocabError(
          `gram ${JSON.stringify(s)} uses unit ${JSON.stringify(u)} outside the base set`,
        );
      }
    }
    seen.add(s);
    grams.push(s);
  }

  const autoAdded = units.filter((u) => !seen.has(u));
  grams.push(...autoAdded);
  const tau = Math.max(...grams.map((g) => codePoints(g).length));
  return { baseUnits: units, grams, totalSymbols: grams.length + 1, tau, autoAdded };
}

export function vocabFileContent(v: Vocab): string {
  return [UNITS_HEADER + " " + v.baseUnits.join(""), ...v.grams].join("\n") + "\n";
}

export function parseVocabFile(text: string): Vocab {
  const lines = text.split("\n").map((l) => l.trim()).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new VocabError("vocab file is empty");
  }
  if (!lines[0].startsWith(UNITS_HEADER)) {
    throw new VocabError(`vocab file must start with a ${UNITS_HEADER} line`);
  }
  const units = lines[0].slice(UNITS_HEADER.length).trim();
  return buildVocab(lines.slice(1), units);
}
