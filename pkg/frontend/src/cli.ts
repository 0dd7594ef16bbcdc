/**
 * Batch figure renderer for simulator sweep CSVs.
 *
 * Usage:
 *   figures <figure-id> --input <csv...> --output <path.svg> [--force]
 *
 * figure ids: flatflat, quadraman, quadcavity, thermal, squeezing, ramanshift
 * (squeezing and ramanshift accept a second CSV as a single-mode reference).
 */

import { existsSync, readFileSync, writeFileSync } from "node:fs";

import { CsvError } from "./csv.js";
import { FIGURE_IDS, FigureError, FigureId, renderFigure } from "./figures.js";

interface CliArgs {
  figure: FigureId;
  inputs: string[];
  output: string;
  force: boolean;
  colors?: string[];
  referenceLines: boolean;
}

export function parseArgs(argv: string[]): CliArgs {
  if (argv.length === 0) {
    throw new FigureError(
      `usage: figures <figure-id> --input <csv...> --output <path>`);
  }
  const figure = argv[0] as FigureId;
  if (!FIGURE_IDS.includes(figure)) {
    throw new FigureError(
      `unknown figure '${argv[0]}'; expected one of ${FIGURE_IDS.join(", ")}`);
  }
  const inputs: string[] = [];
  let output = "";
  let force = false;
  let colors: string[] | undefined;
  let referenceLines = true;
  let i = 1;
  while (i < argv.length) {
    const arg = argv[i];
    if (arg === "--input") {
      i += 1;
      while (i < argv.length && !argv[i].startsWith("--")) {
        inputs.push(argv[i]);
        i += 1;
      }
    } else if (arg === "--output") {
      output = argv[i + 1] ?? "";
      i += 2;
    } else if (arg === "--force") {
      force = true;
      i += 1;
    } else if (arg === "--colors") {
      colors = (argv[i + 1] ?? "").split(",").filter((c) => c.length > 0);
      i += 2;
    } else if (arg === "--no-reference-lines") {
      referenceLines = false;
      i += 1;
    } else {
      throw new FigureError(`unknown argument '${arg}'`);
    }
  }
  if (inputs.length === 0) {
    throw new FigureError("--input requires at least one CSV path");
  }
  if (!output) {
    throw new FigureError("--output is required");
  }
  return { figure, inputs, output, force, colors, referenceLines };
}

export function main(argv: string[]): number {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const texts = args.inputs.map((path) => readFileSync(path, "utf-8"));
    if (existsSync(args.output) && !args.force) {
      throw new FigureError(`output ${args.output} exists; pass --force to overwrite`);
    }
    const svg = renderFigure({ figure: args.figure, inputs: texts,
                               colors: args.colors,
                               referenceLines: args.referenceLines });
    writeFileSync(args.output, svg, "utf-8");
    console.log(`wrote ${args.output}`);
    return 0;
  } catch (err) {
    if (err instanceof CsvError || err instanceof FigureError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`error: ${(err as Error).message}`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && /cli\.(ts|js)$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
