/**
 * CSV loading with schema validation.
 *
 * The producer writes plain comma-separated files with one header row and
 * round-trip float formatting ("inf" for divergent uncertainties). A schema
 * mismatch is a hard error: the renderer never guesses column meanings.
 */

import { readFileSync } from "fs";
import path from "path";

export interface Table {
  /** column name -> values; non-numeric cells become NaN, "inf" stays Infinity */
  columns: Map<string, number[]>;
  rows: number;
}

export class SchemaError extends Error {}

function parseCell(raw: string): number {
  if (raw === "inf") return Infinity;
  if (raw === "-inf") return -Infinity;
  const v = Number(raw);
  return raw.trim() === "" ? NaN : v;
}

export function loadTable(filePath: string, requiredColumns: string[]): Table {
  let text: string;
  try {
    text = readFileSync(filePath, "utf-8");
  } catch {
    throw new SchemaError(`cannot read ${filePath}`);
  }
  const lines = text.trim().split("\n");
  if (lines.length < 2) {
    throw new SchemaError(`${path.basename(filePath)}: no data rows`);
  }
  const header = lines[0].split(",");
  for (const col of requiredColumns) {
    if (!header.includes(col)) {
      throw new SchemaError(
        `${path.basename(filePath)}: missing column '${col}' (have: ${header.join(", ")})`
      );
    }
  }
  const columns = new Map<string, number[]>(header.map((h) => [h, []]));
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(
        `${path.basename(filePath)}: ragged row with ${cells.length} cells`
      );
    }
    header.forEach((h, i) => columns.get(h)!.push(parseCell(cells[i])));
  }
  return { columns, rows: lines.length - 1 };
}

export function col(table: Table, name: string): number[] {
  const values = table.columns.get(name);
  if (values === undefined) throw new SchemaError(`missing column '${name}'`);
  return values;
}
