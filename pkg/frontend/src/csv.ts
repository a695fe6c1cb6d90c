import * as fs from "fs";

export interface Table {
  header: string[];
  rows: number[][];
}

/** Read a comma-separated file with one header line into numeric rows. */
export function readCsv(path: string): Table {
  const text = fs.readFileSync(path, "utf8").trim();
  if (text === "") throw new Error(`${path}: empty file`);
  const lines = text.split("\n");
  const header = lines[0].split(",");
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== header.length) {
      throw new Error(`${path}:${i + 1}: expected ${header.length} fields, got ${parts.length}`);
    }
    const row = parts.map(Number);
    const bad = row.findIndex((v) => Number.isNaN(v));
    if (bad >= 0) {
      throw new Error(`${path}:${i + 1}: column ${header[bad]} is not numeric`);
    }
    rows.push(row);
  }
  return { header, rows };
}

/** Indices of the wanted columns; a schema error names what is missing. */
export function columns(t: Table, want: string[], label: string): number[] {
  return want.map((name) => {
    const i = t.header.indexOf(name);
    if (i < 0) {
      throw new Error(
        `${label}: schema mismatch, no column "${name}" in [${t.header.join(", ")}]`
      );
    }
    return i;
  });
}

export function column(t: Table, name: string, label: string): number[] {
  const [i] = columns(t, [name], label);
  return t.rows.map((r) => r[i]);
}
