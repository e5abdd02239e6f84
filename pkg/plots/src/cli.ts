#!/usr/bin/env node
/**
 * Render one simulation figure from its CSV directory to an SVG file.
 *
 * Usage:
 *   node dist/src/cli.js <figure_id> <input_dir> <output_svg>
 *
 * The output is written only after the full document renders, so schema
 * failures leave no partial image behind.
 */

import { writeFileSync } from "fs";

import { FIGURE_IDS, render } from "./figures.js";

function main(argv: string[]): number {
  if (argv.length !== 3) {
    console.error(`usage: cli.js <${FIGURE_IDS.join("|")}> <input_dir> <output_svg>`);
    return 2;
  }
  const [figureId, inputDir, outPath] = argv;
  try {
    const svg = render(figureId, inputDir);
    writeFileSync(outPath, svg);
    console.log(outPath);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
