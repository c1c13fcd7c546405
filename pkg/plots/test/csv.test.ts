import { describe, expect, it } from "vitest";
import {
  SchemaError,
  column,
  isNonIncreasing,
  isStrictlyDecreasing,
  parseCsv,
} from "../src/csv.js";

describe("parseCsv", () => {
  it("parses a well-formed table", () => {
    const t = parseCsv("a,b\n1,2\n3.5,-4e-2\n");
    expect(t.columns).toEqual(["a", "b"]);
    expect(t.rows).toEqual([
      [1, 2],
      [3.5, -0.04],
    ]);
  });

  it("accepts CRLF endings", () => {
    const t = parseCsv("a,b\r\n1,2\r\n");
    expect(t.rows).toEqual([[1, 2]]);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1\n")).toThrow(SchemaError);
  });

  it("rejects non-numeric cells", () => {
    expect(() => parseCsv("a,b\n1,x\n")).toThrow(/non-numeric/);
  });

  it("rejects empty documents", () => {
    expect(() => parseCsv("")).toThrow(SchemaError);
  });
});

describe("column", () => {
  it("names the missing column in its error", () => {
    const t = parseCsv("rho,payoff\n1,2\n");
    expect(() => column(t, "lambda")).toThrow(/missing column 'lambda'/);
    expect(column(t, "payoff")).toEqual([2]);
  });
});

describe("monotonicity helpers", () => {
  it("checks non-increasing", () => {
    expect(isNonIncreasing([3, 2, 2, 1])).toBe(true);
    expect(isNonIncreasing([1, 2])).toBe(false);
  });

  it("checks strictly decreasing", () => {
    expect(isStrictlyDecreasing([3, 2, 1])).toBe(true);
    expect(isStrictlyDecreasing([3, 3, 1])).toBe(false);
  });
});
