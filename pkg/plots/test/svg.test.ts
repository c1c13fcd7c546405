import { describe, expect, it } from "vitest";
import { niceTicks, renderChart } from "../src/svg.js";

const spec = {
  title: "demo",
  xLabel: "x",
  yLabel: "y",
  series: [
    { label: "a", x: [0, 1, 2], y: [0, 1, 4] },
    { label: "b", x: [0, 1, 2], y: [4, 1, 0] },
  ],
};

describe("niceTicks", () => {
  it("produces round values spanning the range", () => {
    const ticks = niceTicks(0, 1);
    expect(ticks[0]).toBeGreaterThanOrEqual(0);
    expect(ticks[ticks.length - 1]).toBeLessThanOrEqual(1 + 1e-12);
    expect(ticks).toContain(0.4);
    expect(ticks.length).toBeGreaterThanOrEqual(4);
  });

  it("handles degenerate ranges", () => {
    expect(niceTicks(2, 2)).toEqual([2]);
  });
});

describe("renderChart", () => {
  it("draws one polyline and one legend entry per series", () => {
    const svg = renderChart(spec);
    expect(svg.match(/<polyline/g)?.length).toBe(2);
    expect(svg).toContain(">a</text>");
    expect(svg).toContain(">b</text>");
    expect(svg).toContain("demo");
  });

  it("is deterministic", () => {
    expect(renderChart(spec)).toBe(renderChart(spec));
  });

  it("refuses empty charts", () => {
    expect(() => renderChart({ ...spec, series: [] })).toThrow(/empty/);
    expect(() =>
      renderChart({ ...spec, series: [{ label: "z", x: [], y: [] }] }),
    ).toThrow(/empty or ragged/);
  });
});
