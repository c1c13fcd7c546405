/**
 * Figure catalogue: each entry knows which CLI output it consumes and how
 * to turn the index plus its CSV files into a chart specification.
 */

import { ChartSpec, Series } from "./svg.js";
import { NumericTable, SchemaError, column } from "./csv.js";

export interface RunEntry {
  value: string;
  ok: boolean;
  error?: string | null;
  files: Record<string, string>;
}

export interface SweepIndex {
  command: string;
  parameter?: string;
  values?: string[];
  files?: Record<string, string>;
  runs?: RunEntry[];
}

export type CsvLoader = (relativePath: string) => NumericTable;

export interface FigureSpec {
  id: number;
  title: string;
  command: string;
  parameter?: string;
  build(index: SweepIndex, load: CsvLoader): ChartSpec;
}

function okRuns(index: SweepIndex): RunEntry[] {
  const runs = (index.runs ?? []).filter((r) => r.ok);
  if (runs.length === 0) {
    throw new SchemaError("index lists no successful runs, nothing to draw");
  }
  return runs;
}

function requireKind(index: SweepIndex, fig: FigureSpec): void {
  if (index.command !== fig.command) {
    throw new SchemaError(
      `figure ${fig.id} needs '${fig.command}' output, index holds '${index.command}'`,
    );
  }
  if (fig.parameter && index.parameter !== fig.parameter) {
    throw new SchemaError(
      `figure ${fig.id} needs a '${fig.parameter}' sweep, index holds '${index.parameter}'`,
    );
  }
}

function profileSeries(index: SweepIndex, load: CsvLoader,
                       legend: (value: string) => string): Series[] {
  return okRuns(index).map((run) => {
    const file = run.files["profile"];
    if (!file) throw new SchemaError(`run ${run.value} lists no profile file`);
    const table = load(file);
    return { label: legend(run.value), x: column(table, "rho"), y: column(table, "payoff") };
  });
}

function payoffChart(title: string, series: Series[]): ChartSpec {
  return {
    title,
    xLabel: "pricing-kernel state",
    yLabel: "terminal payoff",
    series,
  };
}

export const FIGURES: Record<number, FigureSpec> = {
  1: {
    id: 1,
    title: "Pricing-kernel quantile by market price of risk",
    command: "kernel-quantile",
    parameter: "theta",
    build(index, load) {
      const series = okRuns(index).map((run) => {
        const file = run.files["kernel"];
        if (!file) throw new SchemaError(`run ${run.value} lists no kernel file`);
        const table = load(file);
        return {
          label: `theta = ${run.value}`,
          x: column(table, "p"),
          y: column(table, "q_rho"),
        };
      });
      return {
        title: this.title,
        xLabel: "probability level",
        yLabel: "kernel quantile",
        series,
      };
    },
  },
  2: {
    id: 2,
    title: "Endowment against the multiplier",
    command: "budget-curve",
    build(index, load) {
      const file = index.files?.["curve"];
      if (!file) throw new SchemaError("budget-curve index lists no curve file");
      const table = load(file);
      // convention: endowment horizontal, multiplier vertical
      return {
        title: this.title,
        xLabel: "endowment",
        yLabel: "multiplier",
        series: [{ label: "frontier", x: column(table, "x"), y: column(table, "lambda") }],
      };
    },
  },
  3: {
    id: 3,
    title: "Optimal payoff by endowment",
    command: "sweep",
    parameter: "x",
    build(index, load) {
      return payoffChart(this.title,
        profileSeries(index, load, (v) => `x = ${v}`));
    },
  },
  4: {
    id: 4,
    title: "Optimal payoff by market price of risk",
    command: "sweep",
    parameter: "theta",
    build(index, load) {
      return payoffChart(this.title,
        profileSeries(index, load, (v) => `theta = ${v}`));
    },
  },
  5: {
    id: 5,
    title: "Optimal payoff by ambiguity weight",
    command: "sweep",
    parameter: "alpha",
    build(index, load) {
      return payoffChart(this.title,
        profileSeries(index, load, (v) => `alpha = ${v}`));
    },
  },
  6: {
    id: 6,
    title: "Optimal payoff by claim distribution",
    command: "sweep",
    parameter: "claim",
    build(index, load) {
      return payoffChart(this.title,
        profileSeries(index, load, (v) => `TN(${v})`));
    },
  },
  7: {
    id: 7,
    title: "Optimal payoff by curvature parameters",
    command: "sweep",
    parameter: "gamma",
    build(index, load) {
      return payoffChart(this.title,
        profileSeries(index, load, (v) => `gamma = ${v}`));
    },
  },
};

export function buildFigure(id: number, index: SweepIndex, load: CsvLoader): ChartSpec {
  const fig = FIGURES[id];
  if (!fig) {
    throw new SchemaError(`unknown figure id ${id} (known: 1..7)`);
  }
  requireKind(index, fig);
  return fig.build(index, load);
}
