/**
 * CLI: render --index INDEX.json --fig N --out FILE.svg
 *
 * Reads a solver index file plus the CSVs it references (relative to the
 * index's directory) and writes one SVG figure.  Pure file-to-file
 * transformation; rerunning reproduces the bytes.
 */

import { readFileSync, writeFileSync } from "fs";
import { dirname, join } from "path";
import { parseCsv } from "./csv.js";
import { SweepIndex, buildFigure } from "./figures.js";
import { renderChart } from "./svg.js";

interface Args {
  index: string;
  fig: number;
  out: string;
}

export function parseArgs(argv: string[]): Args {
  const named = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key?.startsWith("--") || value === undefined) {
      throw new Error("usage: render --index INDEX.json --fig N --out FILE.svg");
    }
    named.set(key.slice(2), value);
  }
  const index = named.get("index");
  const fig = Number(named.get("fig"));
  const out = named.get("out");
  if (!index || !out || !Number.isInteger(fig)) {
    throw new Error("usage: render --index INDEX.json --fig N --out FILE.svg");
  }
  return { index, fig, out };
}

export function renderFromFiles(indexPath: string, figId: number): string {
  const index = JSON.parse(readFileSync(indexPath, "utf-8")) as SweepIndex;
  const base = dirname(indexPath);
  const load = (rel: string) => parseCsv(readFileSync(join(base, rel), "utf-8"));
  return renderChart(buildFigure(figId, index, load));
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  try {
    const svg = renderFromFiles(args.index, args.fig);
    writeFileSync(args.out, svg + "\n", { encoding: "utf-8" });
  } catch (err) {
    console.error(`figure ${args.fig}: ${(err as Error).message}`);
    return 1;
  }
  console.log(`wrote ${args.out}`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
