/** Minimal deterministic SVG line charts: no timestamps, no randomness. */

export interface Series {
  label: string;
  x: number[];
  y: number[];
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  logX?: boolean;
}

const WIDTH = 760;
const HEIGHT = 500;
const MARGIN = { left: 72, right: 24, top: 44, bottom: 56 };
const PALETTE = ["#1f6fb2", "#d1495b", "#3e8e5a", "#8c6bb1", "#c88a2c", "#4f4f4f"];

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(2);
  return Number(v.toPrecision(6)).toString();
}

/** Round-valued tick positions covering [lo, hi]. */
export function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = (span / count) / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const best = step * mult;
  const ticks: number[] = [];
  const first = Math.ceil(lo / best - 1e-9);
  for (let k = first; k * best <= hi + best * 1e-9; k++) {
    ticks.push(k === 0 ? 0 : k * best);
  }
  return ticks;
}

export function renderChart(spec: ChartSpec): string {
  if (spec.series.length === 0) {
    throw new Error("refusing to render an empty chart");
  }
  for (const s of spec.series) {
    if (s.x.length !== s.y.length || s.x.length === 0) {
      throw new Error(`series '${s.label}' is empty or ragged`);
    }
  }
  const tx = spec.logX ? Math.log10 : (v: number) => v;
  const xsAll = spec.series.flatMap((s) => s.x.map(tx));
  const ysAll = spec.series.flatMap((s) => s.y);
  let xLo = Math.min(...xsAll);
  let xHi = Math.max(...xsAll);
  let yLo = Math.min(...ysAll);
  let yHi = Math.max(...ysAll);
  if (xHi === xLo) { xHi += 1; xLo -= 1; }
  if (yHi === yLo) { yHi += 1; yLo -= 1; }
  const yPad = 0.04 * (yHi - yLo);
  yLo -= yPad; yHi += yPad;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const px = (v: number) => MARGIN.left + ((tx(v) - xLo) / (xHi - xLo)) * plotW;
  const py = (v: number) => MARGIN.top + (1 - (v - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">${spec.title}</text>`,
  );

  // axes
  const x0 = MARGIN.left;
  const y0 = MARGIN.top + plotH;
  parts.push(
    `<line x1="${x0}" y1="${y0}" x2="${x0 + plotW}" y2="${y0}" stroke="black"/>`,
    `<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}" stroke="black"/>`,
  );
  const xTickVals = spec.logX
    ? niceTicks(xLo, xHi).map((v) => Math.pow(10, v))
    : niceTicks(xLo, xHi);
  for (const v of xTickVals) {
    const X = px(v);
    if (X < x0 - 1e-6 || X > x0 + plotW + 1e-6) continue;
    parts.push(
      `<line x1="${X}" y1="${y0}" x2="${X}" y2="${y0 + 5}" stroke="black"/>`,
      `<text x="${X}" y="${y0 + 20}" text-anchor="middle" font-family="sans-serif" font-size="11">${fmt(v)}</text>`,
    );
  }
  for (const v of niceTicks(yLo, yHi)) {
    const Y = py(v);
    parts.push(
      `<line x1="${x0 - 5}" y1="${Y}" x2="${x0}" y2="${Y}" stroke="black"/>`,
      `<text x="${x0 - 8}" y="${Y + 4}" text-anchor="end" font-family="sans-serif" font-size="11">${fmt(v)}</text>`,
      `<line x1="${x0}" y1="${Y}" x2="${x0 + plotW}" y2="${Y}" stroke="#dddddd" stroke-width="0.5"/>`,
    );
  }
  parts.push(
    `<text x="${x0 + plotW / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-family="sans-serif" font-size="13">${spec.xLabel}</text>`,
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${spec.yLabel}</text>`,
  );

  spec.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const points = s.x
      .map((vx, k) => `${px(vx).toFixed(2)},${py(s.y[k]).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<polyline points="${points}" fill="none" stroke="${color}" stroke-width="1.8"/>`,
    );
    const ly = MARGIN.top + 12 + 18 * i;
    const lx = x0 + plotW - 170;
    parts.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 26}" y2="${ly - 4}" stroke="${color}" stroke-width="2"/>`,
      `<text x="${lx + 32}" y="${ly}" font-family="sans-serif" font-size="12">${s.label}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}
