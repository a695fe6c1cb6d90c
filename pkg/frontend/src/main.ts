#!/usr/bin/env node
import * as fs from "fs";
import * as path from "path";
import { readCsv } from "./csv.js";
import { plotConvergence, plotFronts, plotPhasePortrait, plotWave } from "./figures.js";

const KINDS = ["convergence", "wave", "phase", "fronts"] as const;
type Kind = (typeof KINDS)[number];

const INPUT: Record<Kind, string> = {
  convergence: "report.csv",
  wave: "wave.csv",
  phase: "separatrix.csv",
  fronts: "interface.csv",
};

function render(kind: Kind, inDir: string): string {
  const file = path.join(inDir, INPUT[kind]);
  const table = readCsv(file);
  switch (kind) {
    case "convergence":
      return plotConvergence(table, file);
    case "wave":
      return plotWave(table, file);
    case "phase": {
      const trajFiles = fs
        .readdirSync(inDir)
        .filter((f) => /^traj_.*\.csv$/.test(f))
        .sort();
      const trajs = trajFiles.map((f) => readCsv(path.join(inDir, f)));
      return plotPhasePortrait(table, trajs, file);
    }
    case "fronts":
      return plotFronts(table, file);
  }
}

export interface MakeFigsResult {
  written: string[];
  skipped: Kind[];
}

/**
 * Render every requested figure whose input file exists in inDir.  Kinds
 * left implicit are skipped quietly when their input is absent; kinds the
 * caller named explicitly must have their input present.
 */
export function makeFigs(inDir: string, outDir: string, kinds?: Kind[]): MakeFigsResult {
  const explicit = kinds !== undefined;
  const wanted = kinds ?? [...KINDS];
  for (const k of wanted) {
    if (!KINDS.includes(k)) {
      throw new Error(`unknown figure kind "${k}" (have: ${KINDS.join(", ")})`);
    }
  }
  fs.mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  const skipped: Kind[] = [];
  for (const kind of wanted) {
    const input = path.join(inDir, INPUT[kind]);
    if (!fs.existsSync(input)) {
      if (explicit) throw new Error(`${kind}: input ${input} not found`);
      skipped.push(kind);
      continue;
    }
    const out = path.join(outDir, `${kind}.svg`);
    fs.writeFileSync(out, render(kind, inDir));
    written.push(out);
  }
  return { written, skipped };
}

function usage(): never {
  console.error("usage: make-figs --in DIR --out DIR [--kinds convergence,wave,phase,fronts]");
  process.exit(2);
}

export function main(argv: string[]): number {
  let inDir = "";
  let outDir = "";
  let kinds: Kind[] | undefined;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--in") inDir = argv[++i] ?? "";
    else if (arg === "--out") outDir = argv[++i] ?? "";
    else if (arg === "--kinds") kinds = (argv[++i] ?? "").split(",").filter(Boolean) as Kind[];
    else usage();
  }
  if (inDir === "" || outDir === "") usage();
  try {
    const { written, skipped } = makeFigs(inDir, outDir, kinds);
    for (const f of written) console.log(f);
    if (written.length === 0) {
      console.error(`no figure inputs found in ${inDir} (skipped: ${skipped.join(", ")})`);
      return 1;
    }
    return 0;
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
}

if (process.argv[1] && /main\.[cm]?js$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
