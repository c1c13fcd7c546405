/** Strict numeric CSV parsing for the solver's output schemas. */

export interface NumericTable {
  columns: string[];
  rows: number[][];
}

export class SchemaError extends Error {}

/**
 * Parse a comma-delimited table with a header row, '.' decimals and LF or
 * CRLF endings. Every cell must be a finite number.
 */
export function parseCsv(text: string): NumericTable {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length < 1) {
    throw new SchemaError("empty CSV document");
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(
        `row ${i} has ${cells.length} cells, expected ${columns.length}`,
      );
    }
    const row = cells.map(Number);
    if (row.some((v) => !Number.isFinite(v))) {
      throw new SchemaError(`row ${i} contains a non-numeric cell`);
    }
    rows.push(row);
  }
  return { columns, rows };
}

/** Extract a named column, raising a descriptive error when it is absent. */
export function column(table: NumericTable, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(
      `missing column '${name}' (found: ${table.columns.join(", ")})`,
    );
  }
  return table.rows.map((r) => r[idx]);
}

export function isNonIncreasing(values: number[], tol = 1e-12): boolean {
  for (let i = 1; i < values.length; i++) {
    if (values[i] > values[i - 1] + tol) return false;
  }
  return true;
}

export function isStrictlyDecreasing(values: number[]): boolean {
  for (let i = 1; i < values.length; i++) {
    if (values[i] >= values[i - 1]) return false;
  }
  return true;
}
